#include "tracker/nnet.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tracker/errors.hpp"
#include "tracker/parallel.hpp"

namespace tracker {

namespace {

constexpr double kLambdaCeiling = 1e12;
constexpr int kJacobianBlock = 512;

double uniform01(std::mt19937_64& eng) { return (eng() >> 11) * 0x1.0p-53; }

double activate(Activation a, double z) {
    switch (a) {
        case Activation::Tanh: return std::tanh(z);
        case Activation::Relu: return z > 0.0 ? z : 0.0;
        case Activation::Linear: return z;
    }
    return z;
}

// Derivative from the post-activation value (exact for all three kinds).
double activate_grad_from_value(Activation a, double value) {
    switch (a) {
        case Activation::Tanh: return 1.0 - value * value;
        case Activation::Relu: return value > 0.0 ? 1.0 : 0.0;
        case Activation::Linear: return 1.0;
    }
    return 1.0;
}

struct ForwardTrace {
    std::vector<Eigen::VectorXd> post;  // post[0] standardized input, post[L] last activation
};

ForwardTrace forward_trace(const FnnModel& net, const Eigen::VectorXd& input) {
    ForwardTrace trace;
    trace.post.reserve(net.weights.size() + 1);
    Eigen::VectorXd a =
        (input - net.input_mean).cwiseQuotient(net.input_std);
    trace.post.push_back(a);
    for (size_t l = 0; l < net.weights.size(); ++l) {
        Eigen::VectorXd z = net.weights[l] * trace.post.back() + net.biases[l];
        for (int i = 0; i < z.size(); ++i) z(i) = activate(net.activations[l], z(i));
        trace.post.push_back(std::move(z));
    }
    return trace;
}

// Backward pass given the seed dL/da_L; accumulates parameter derivatives into
// grad (flattened layout: per layer W column-major then b).
void backward_into(const FnnModel& net, const ForwardTrace& trace, Eigen::VectorXd delta,
                   Eigen::Ref<Eigen::VectorXd> grad) {
    const int layers = static_cast<int>(net.weights.size());
    int offset = static_cast<int>(grad.size());
    for (int l = layers - 1; l >= 0; --l) {
        const Eigen::VectorXd& out = trace.post[static_cast<size_t>(l) + 1];
        for (int i = 0; i < delta.size(); ++i)
            delta(i) *= activate_grad_from_value(net.activations[static_cast<size_t>(l)], out(i));

        const Eigen::VectorXd& in = trace.post[static_cast<size_t>(l)];
        const int rows = static_cast<int>(net.weights[static_cast<size_t>(l)].rows());
        const int cols = static_cast<int>(net.weights[static_cast<size_t>(l)].cols());
        offset -= rows * cols + rows;
        Eigen::Map<Eigen::MatrixXd> dW(grad.data() + offset, rows, cols);
        Eigen::Map<Eigen::VectorXd> db(grad.data() + offset + rows * cols, rows);
        dW.noalias() += delta * in.transpose();
        db += delta;
        if (l > 0) delta = net.weights[static_cast<size_t>(l)].transpose() * delta;
    }
}

// Batched forward over all rows; returns the residual matrix forward(x) - t.
Eigen::MatrixXd residuals(const FnnModel& net, const Dataset& data) {
    Eigen::MatrixXd a =
        ((data.inputs.rowwise() - net.input_mean.transpose()).array().rowwise() /
         net.input_std.transpose().array())
            .transpose();
    for (size_t l = 0; l < net.weights.size(); ++l) {
        Eigen::MatrixXd z = (net.weights[l] * a).colwise() + net.biases[l];
        const Activation act = net.activations[l];
        if (act != Activation::Linear)
            z = z.unaryExpr([act](double v) { return activate(act, v); });
        a = std::move(z);
    }
    Eigen::MatrixXd y =
        ((a.array().colwise() * net.target_std.array()).colwise() + net.target_mean.array())
            .transpose();
    return y - data.targets;
}

}  // namespace

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Tanh: return "tanh";
        case Activation::Relu: return "relu";
        case Activation::Linear: return "linear";
    }
    return "linear";
}

Activation activation_from_string(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::Relu;
    if (name == "linear") return Activation::Linear;
    throw ContractViolation("unknown activation: " + name);
}

void Dataset::validate() const {
    if (inputs.rows() != targets.rows())
        throw ContractViolation("Dataset: input/target row counts differ");
    if (inputs.rows() == 0) throw ContractViolation("Dataset: empty");
    if (!inputs.allFinite() || !targets.allFinite())
        throw ContractViolation("Dataset: non-finite entries");
}

void Dataset::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ContractViolation("cannot open for writing: " + path);
    std::string header;
    for (size_t i = 0; i < feature_names.size(); ++i) {
        if (i) header += ',';
        header += feature_names[i];
    }
    out << header << (header.empty() ? "" : ",") << "target_u\n";
    char buf[40];
    for (int row = 0; row < rows(); ++row) {
        std::string line;
        for (int j = 0; j < input_dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", inputs(row, j));
            line += buf;
            line += ',';
        }
        std::snprintf(buf, sizeof(buf), "%.17g", targets(row, 0));
        line += buf;
        out << line << '\n';
    }
}

int FnnModel::parameter_count() const {
    int count = 0;
    for (size_t l = 0; l < weights.size(); ++l)
        count += static_cast<int>(weights[l].size() + biases[l].size());
    return count;
}

Eigen::VectorXd FnnModel::flatten_parameters() const {
    Eigen::VectorXd theta(parameter_count());
    int offset = 0;
    for (size_t l = 0; l < weights.size(); ++l) {
        const int wn = static_cast<int>(weights[l].size());
        theta.segment(offset, wn) = Eigen::Map<const Eigen::VectorXd>(weights[l].data(), wn);
        offset += wn;
        const int bn = static_cast<int>(biases[l].size());
        theta.segment(offset, bn) = biases[l];
        offset += bn;
    }
    return theta;
}

void FnnModel::set_parameters(const Eigen::VectorXd& theta) {
    if (theta.size() != parameter_count())
        throw ContractViolation("set_parameters: size mismatch");
    int offset = 0;
    for (size_t l = 0; l < weights.size(); ++l) {
        const int wn = static_cast<int>(weights[l].size());
        Eigen::Map<Eigen::VectorXd>(weights[l].data(), wn) = theta.segment(offset, wn);
        offset += wn;
        const int bn = static_cast<int>(biases[l].size());
        biases[l] = theta.segment(offset, bn);
        offset += bn;
    }
}

void FnnModel::validate() const {
    if (layer_sizes.size() < 2) throw ContractViolation("FnnModel: need at least two layers");
    const size_t layers = layer_sizes.size() - 1;
    if (weights.size() != layers || biases.size() != layers || activations.size() != layers)
        throw ContractViolation("FnnModel: layer bookkeeping mismatch");
    for (size_t l = 0; l < layers; ++l) {
        if (weights[l].rows() != layer_sizes[l + 1] || weights[l].cols() != layer_sizes[l])
            throw ContractViolation("FnnModel: weight shape does not chain");
        if (biases[l].size() != layer_sizes[l + 1])
            throw ContractViolation("FnnModel: bias shape does not chain");
    }
    if (activations.back() != Activation::Linear)
        throw ContractViolation("FnnModel: output layer must be linear");
    if (input_mean.size() != layer_sizes.front() || input_std.size() != layer_sizes.front() ||
        target_mean.size() != layer_sizes.back() || target_std.size() != layer_sizes.back())
        throw ContractViolation("FnnModel: standardization vectors mis-sized");
}

FnnModel make_fnn(std::vector<int> layer_sizes, std::vector<Activation> activations) {
    FnnModel net;
    net.layer_sizes = std::move(layer_sizes);
    net.activations = std::move(activations);
    const size_t layers = net.layer_sizes.size() - 1;
    net.weights.reserve(layers);
    net.biases.reserve(layers);
    for (size_t l = 0; l < layers; ++l) {
        net.weights.emplace_back(
            Eigen::MatrixXd::Zero(net.layer_sizes[l + 1], net.layer_sizes[l]));
        net.biases.emplace_back(Eigen::VectorXd::Zero(net.layer_sizes[l + 1]));
    }
    net.input_mean = Eigen::VectorXd::Zero(net.layer_sizes.front());
    net.input_std = Eigen::VectorXd::Ones(net.layer_sizes.front());
    net.target_mean = Eigen::VectorXd::Zero(net.layer_sizes.back());
    net.target_std = Eigen::VectorXd::Ones(net.layer_sizes.back());
    net.validate();
    return net;
}

void initialize_weights(FnnModel& net, unsigned long long seed) {
    std::mt19937_64 eng(seed);
    for (size_t l = 0; l < net.weights.size(); ++l) {
        const double limit =
            std::sqrt(6.0 / static_cast<double>(net.weights[l].rows() + net.weights[l].cols()));
        double* data = net.weights[l].data();
        for (int i = 0; i < net.weights[l].size(); ++i)
            data[i] = limit * (2.0 * uniform01(eng) - 1.0);
        net.biases[l].setZero();
    }
}

Eigen::VectorXd forward(const FnnModel& net, const Eigen::VectorXd& input) {
    if (input.size() != net.input_dim())
        throw ContractViolation("forward: input dimension mismatch");
    const ForwardTrace trace = forward_trace(net, input);
    return net.target_mean + net.target_std.cwiseProduct(trace.post.back());
}

double mse_loss(const FnnModel& net, const Dataset& data) {
    if (data.input_dim() != net.input_dim() || data.target_dim() != net.output_dim())
        throw ContractViolation("mse_loss: dataset dimensions mismatch");
    return residuals(net, data).squaredNorm() / static_cast<double>(data.rows());
}

Eigen::VectorXd gradient(const FnnModel& net, const Dataset& data) {
    data.validate();
    if (data.input_dim() != net.input_dim() || data.target_dim() != net.output_dim())
        throw ContractViolation("gradient: dataset dimensions mismatch");
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.parameter_count());
    const double scale = 2.0 / static_cast<double>(data.rows());
    for (int i = 0; i < data.rows(); ++i) {
        const ForwardTrace trace = forward_trace(net, data.inputs.row(i).transpose());
        const Eigen::VectorXd y =
            net.target_mean + net.target_std.cwiseProduct(trace.post.back());
        const Eigen::VectorXd seed =
            scale * net.target_std.cwiseProduct(y - data.targets.row(i).transpose());
        backward_into(net, trace, seed, grad);
    }
    return grad;
}

Eigen::MatrixXd jacobian(const FnnModel& net, const Dataset& data) {
    data.validate();
    if (net.output_dim() != 1)
        throw ContractViolation("jacobian: scalar-output networks only");
    if (data.input_dim() != net.input_dim() || data.target_dim() != 1)
        throw ContractViolation("jacobian: dataset dimensions mismatch");

    const int params = net.parameter_count();
    Eigen::MatrixXd jac(data.rows(), params);
    parallel_blocks(data.rows(), kJacobianBlock, [&](int begin, int end) {
        Eigen::VectorXd row(params);
        for (int i = begin; i < end; ++i) {
            row.setZero();
            const ForwardTrace trace = forward_trace(net, data.inputs.row(i).transpose());
            Eigen::VectorXd seed = net.target_std;  // d(residual)/d(last activation)
            backward_into(net, trace, seed, row);
            jac.row(i) = row;
        }
    });
    return jac;
}

void TrainConfig::validate() const {
    if (max_iterations <= 0 || loss_tolerance <= 0.0 || lm_lambda_init <= 0.0)
        throw ContractViolation("TrainConfig: all quantities must be positive");
    if (!(lm_lambda_up > 1.0 && 1.0 > lm_lambda_down && lm_lambda_down > 0.0))
        throw ContractViolation("TrainConfig: need lambda_up > 1 > lambda_down > 0");
    if (holdout_fraction < 0.0 || holdout_fraction >= 1.0)
        throw ContractViolation("TrainConfig: holdout_fraction must be in [0, 1)");
    if (learning_rate <= 0.0 || batch_size <= 0 || momentum < 0.0 || momentum >= 1.0)
        throw ContractViolation("TrainConfig: bad first-order settings");
}

namespace {

std::vector<int> fit_standardization(FnnModel& net, const Dataset& data) {
    std::vector<int> constant_features;
    const double n = static_cast<double>(data.rows());
    net.input_mean = data.inputs.colwise().mean().transpose();
    net.input_std =
        ((data.inputs.rowwise() - net.input_mean.transpose()).array().square().colwise().sum() /
         n)
            .sqrt()
            .transpose();
    for (int i = 0; i < net.input_std.size(); ++i)
        if (net.input_std(i) < 1e-9) {
            net.input_std(i) = 1.0;
            constant_features.push_back(i);
        }

    net.target_mean = data.targets.colwise().mean().transpose();
    net.target_std =
        ((data.targets.rowwise() - net.target_mean.transpose()).array().square().colwise().sum() /
         n)
            .sqrt()
            .transpose();
    for (int i = 0; i < net.target_std.size(); ++i)
        if (net.target_std(i) < 1e-9) net.target_std(i) = 1.0;
    return constant_features;
}

// J^T J assembled from fixed 512-row blocks summed in block order, so the
// result does not depend on the worker count.
Eigen::MatrixXd normal_matrix(const Eigen::MatrixXd& jac) {
    const int params = static_cast<int>(jac.cols());
    const int blocks = (static_cast<int>(jac.rows()) + kJacobianBlock - 1) / kJacobianBlock;
    std::vector<Eigen::MatrixXd> partial(static_cast<size_t>(blocks));
    parallel_blocks(static_cast<int>(jac.rows()), kJacobianBlock, [&](int begin, int end) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(params, params);
        h.selfadjointView<Eigen::Lower>().rankUpdate(
            jac.middleRows(begin, end - begin).transpose());
        partial[static_cast<size_t>(begin / kJacobianBlock)] = std::move(h);
    });
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(params, params);
    for (const auto& p : partial) h += p;
    return h.selfadjointView<Eigen::Lower>();
}

TrainResult train_levenberg_marquardt(FnnModel net, const Dataset& data, const TrainConfig& cfg) {
    TrainResult result;
    Eigen::VectorXd theta = net.flatten_parameters();
    const double n = static_cast<double>(data.rows());

    double loss = residuals(net, data).squaredNorm() / n;
    result.loss_history.push_back(loss);
    double lambda = cfg.lm_lambda_init;

    bool refresh = true;
    Eigen::MatrixXd jac, hess;
    Eigen::VectorXd grad;
    const Eigen::MatrixXd identity =
        Eigen::MatrixXd::Identity(net.parameter_count(), net.parameter_count());

    for (int iter = 0; iter < cfg.max_iterations && loss > cfg.loss_tolerance; ++iter) {
        if (refresh) {
            jac = jacobian(net, data);
            hess = normal_matrix(jac);
            grad = jac.transpose() * Eigen::VectorXd(residuals(net, data).col(0));
            refresh = false;
        }
        const Eigen::LLT<Eigen::MatrixXd> llt(hess + lambda * identity);
        if (llt.info() != Eigen::Success) {
            lambda *= cfg.lm_lambda_up;
            if (lambda > kLambdaCeiling)
                throw TrainingDiverged("training diverged", result.loss_history);
            continue;
        }
        const Eigen::VectorXd step = llt.solve(-grad);
        if (!step.allFinite()) {
            lambda *= cfg.lm_lambda_up;
            if (lambda > kLambdaCeiling)
                throw TrainingDiverged("training diverged", result.loss_history);
            continue;
        }

        FnnModel candidate = net;
        candidate.set_parameters(theta + step);
        const double candidate_loss = residuals(candidate, data).squaredNorm() / n;
        if (std::isfinite(candidate_loss) && candidate_loss < loss) {
            theta += step;
            net = std::move(candidate);
            loss = candidate_loss;
            result.loss_history.push_back(loss);
            lambda = std::max(lambda * cfg.lm_lambda_down, 1e-15);
            refresh = true;
        } else {
            lambda *= cfg.lm_lambda_up;
            if (lambda > kLambdaCeiling) break;  // numerical floor reached
        }
    }
    result.model = std::move(net);
    return result;
}

TrainResult train_first_order(FnnModel net, const Dataset& data, const TrainConfig& cfg,
                              std::mt19937_64& eng) {
    TrainResult result;
    const int rows = data.rows();
    const double n = static_cast<double>(rows);
    std::vector<int> order(static_cast<size_t>(rows));
    for (int i = 0; i < rows; ++i) order[static_cast<size_t>(i)] = i;

    Eigen::VectorXd velocity = Eigen::VectorXd::Zero(net.parameter_count());
    double loss = residuals(net, data).squaredNorm() / n;
    result.loss_history.push_back(loss);

    Dataset batch;
    batch.feature_names = data.feature_names;
    for (int epoch = 0; epoch < cfg.max_iterations && loss > cfg.loss_tolerance; ++epoch) {
        // Fisher-Yates with our own engine keeps the permutation portable.
        for (int i = rows - 1; i > 0; --i) {
            const int j = static_cast<int>(eng() % static_cast<unsigned long long>(i + 1));
            std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
        }
        for (int start = 0; start < rows; start += cfg.batch_size) {
            const int len = std::min(cfg.batch_size, rows - start);
            batch.inputs.resize(len, data.input_dim());
            batch.targets.resize(len, data.target_dim());
            for (int k = 0; k < len; ++k) {
                batch.inputs.row(k) = data.inputs.row(order[static_cast<size_t>(start + k)]);
                batch.targets.row(k) = data.targets.row(order[static_cast<size_t>(start + k)]);
            }
            const Eigen::VectorXd g = gradient(net, batch);
            velocity = cfg.momentum * velocity - cfg.learning_rate * g;
            net.set_parameters(net.flatten_parameters() + velocity);
        }
        loss = residuals(net, data).squaredNorm() / n;
        result.loss_history.push_back(loss);
        if (!std::isfinite(loss))
            throw TrainingDiverged("training diverged", result.loss_history);
    }
    result.model = std::move(net);
    return result;
}

}  // namespace

TrainResult train(const FnnModel& net, const Dataset& data, const TrainConfig& cfg) {
    cfg.validate();
    data.validate();
    net.validate();
    if (data.input_dim() != net.input_dim() || data.target_dim() != net.output_dim())
        throw ContractViolation("train: dataset dimensions mismatch");

    std::mt19937_64 eng(cfg.rng_seed);

    Dataset training = data;
    Dataset holdout;
    if (cfg.holdout_fraction > 0.0) {
        const int rows = data.rows();
        std::vector<int> order(static_cast<size_t>(rows));
        for (int i = 0; i < rows; ++i) order[static_cast<size_t>(i)] = i;
        for (int i = rows - 1; i > 0; --i) {
            const int j = static_cast<int>(eng() % static_cast<unsigned long long>(i + 1));
            std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
        }
        const int held = std::max(1, static_cast<int>(cfg.holdout_fraction * rows));
        const int kept = rows - held;
        if (kept < 1) throw ContractViolation("train: holdout leaves no training rows");
        training.inputs.resize(kept, data.input_dim());
        training.targets.resize(kept, data.target_dim());
        holdout.inputs.resize(held, data.input_dim());
        holdout.targets.resize(held, data.target_dim());
        for (int k = 0; k < kept; ++k) {
            training.inputs.row(k) = data.inputs.row(order[static_cast<size_t>(k)]);
            training.targets.row(k) = data.targets.row(order[static_cast<size_t>(k)]);
        }
        for (int k = 0; k < held; ++k) {
            holdout.inputs.row(k) = data.inputs.row(order[static_cast<size_t>(kept + k)]);
            holdout.targets.row(k) = data.targets.row(order[static_cast<size_t>(kept + k)]);
        }
    }

    FnnModel model = net;
    initialize_weights(model, eng());
    // A feature that never varies in training carries no information; pin its
    // first-layer weights to zero so out-of-distribution values of it at
    // inference cannot leak leftover initialization noise into the output.
    for (int col : fit_standardization(model, training)) model.weights[0].col(col).setZero();

    TrainResult result = cfg.trainer == Trainer::LevenbergMarquardt
                             ? train_levenberg_marquardt(std::move(model), training, cfg)
                             : train_first_order(std::move(model), training, cfg, eng);
    result.holdout_loss = cfg.holdout_fraction > 0.0 ? mse_loss(result.model, holdout)
                                                     : std::numeric_limits<double>::quiet_NaN();
    return result;
}

std::string FnnModel::to_json() const {
    nlohmann::json j;
    j["layer_sizes"] = layer_sizes;
    j["activations"] = nlohmann::json::array();
    for (Activation a : activations) j["activations"].push_back(to_string(a));
    auto vec = [](const Eigen::VectorXd& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    j["input_mean"] = vec(input_mean);
    j["input_std"] = vec(input_std);
    j["target_mean"] = vec(target_mean);
    j["target_std"] = vec(target_std);
    j["weights"] = nlohmann::json::array();
    j["biases"] = nlohmann::json::array();
    for (size_t l = 0; l < weights.size(); ++l) {
        nlohmann::json rows = nlohmann::json::array();
        for (int i = 0; i < weights[l].rows(); ++i) {
            std::vector<double> row(static_cast<size_t>(weights[l].cols()));
            for (int jcol = 0; jcol < weights[l].cols(); ++jcol)
                row[static_cast<size_t>(jcol)] = weights[l](i, jcol);
            rows.push_back(row);
        }
        j["weights"].push_back(rows);
        j["biases"].push_back(vec(biases[l]));
    }
    return j.dump(2);
}

void FnnModel::save_json(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ContractViolation("cannot open for writing: " + path);
    out << to_json() << '\n';
}

FnnModel FnnModel::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    FnnModel net;
    net.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    for (const auto& name : j.at("activations"))
        net.activations.push_back(activation_from_string(name.get<std::string>()));
    auto vec = [](const nlohmann::json& arr) {
        const auto v = arr.get<std::vector<double>>();
        return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<int>(v.size())).eval();
    };
    net.input_mean = vec(j.at("input_mean"));
    net.input_std = vec(j.at("input_std"));
    net.target_mean = vec(j.at("target_mean"));
    net.target_std = vec(j.at("target_std"));
    for (const auto& wl : j.at("weights")) {
        const int rows = static_cast<int>(wl.size());
        const int cols = rows > 0 ? static_cast<int>(wl[0].size()) : 0;
        Eigen::MatrixXd w(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int c = 0; c < cols; ++c) w(i, c) = wl[static_cast<size_t>(i)][static_cast<size_t>(c)].get<double>();
        net.weights.push_back(std::move(w));
    }
    for (const auto& bl : j.at("biases")) net.biases.push_back(vec(bl));
    net.validate();
    return net;
}

FnnModel FnnModel::load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ContractViolation("cannot open model file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str());
}

}  // namespace tracker
