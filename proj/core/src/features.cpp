#include "tracker/features.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "tracker/errors.hpp"

namespace tracker {

namespace {

std::string offset_name(const std::string& base, int k) {
    if (k == 0) return base + "(t)";
    if (k > 0) return base + "(t+" + std::to_string(k) + ")";
    return base + "(t-" + std::to_string(-k) + ")";
}

}  // namespace

std::vector<std::string> FeatureSpec::feature_names() const {
    std::vector<std::string> names;
    if (mode == FeatureMode::StateSpace) {
        names.push_back(difference ? "dx0" : "x0");
        for (int i = 1; i < n; ++i) names.push_back("x" + std::to_string(i));
        names.push_back((difference ? "d" : "") + offset_name("yd", r));
    } else {
        for (int k = r; k >= r - n; --k)
            names.push_back((difference ? "d" : "") + offset_name("yd", k));
        for (int j = 1; j <= n - r; ++j)
            names.push_back((difference ? "d" : "") + offset_name("u", -j));
    }
    return names;
}

FeatureAssembler::FeatureAssembler(FeatureSpec spec) : spec_(spec) {
    if (spec_.r < 1 || spec_.r > spec_.n)
        throw ContractViolation("FeatureSpec: need 1 <= r <= n");
    if (spec_.mode == FeatureMode::TransferFunction)
        u_history_.assign(static_cast<size_t>(spec_.n - spec_.r), 0.0);
}

double FeatureAssembler::reference(double y_now, const Trajectory& y_d, int t) const {
    return spec_.difference_reference == DifferenceReference::ActualNow ? y_now
                                                                        : y_d.at_clamped(t);
}

Eigen::VectorXd FeatureAssembler::assemble(const Eigen::VectorXd& x, double y_now,
                                           const Trajectory& y_d, int t) const {
    Eigen::VectorXd row(spec_.input_width());
    const double ref = spec_.difference ? reference(y_now, y_d, t) : 0.0;
    if (spec_.mode == FeatureMode::StateSpace) {
        if (x.size() != spec_.n) throw ContractViolation("assemble: state dimension mismatch");
        row.head(spec_.n) = x;
        row(0) -= ref;  // positions differenced, velocity-like components raw
        row(spec_.n) = y_d.at_clamped(t + spec_.r) - ref;
    } else {
        for (int k = 0; k <= spec_.n; ++k)
            row(k) = y_d.at_clamped(t + spec_.r - k) - ref;
        for (int j = 1; j <= spec_.n - spec_.r; ++j)
            row(spec_.n + j) = u_history_[static_cast<size_t>(j - 1)] - ref;
    }
    return row;
}

double FeatureAssembler::finalize(double net_output, double y_now, const Trajectory& y_d,
                                  int t) {
    const double u =
        spec_.difference ? net_output + reference(y_now, y_d, t) : net_output;
    record(u);
    return u;
}

void FeatureAssembler::record(double u) {
    if (!u_history_.empty()) {
        u_history_.pop_back();
        u_history_.insert(u_history_.begin(), u);
    }
}

Dataset build_dataset(const RunLog& log, const FeatureSpec& spec) {
    const int n = spec.n;
    const int r = spec.r;
    if (log.size() <= n + r) throw ContractViolation("build_dataset: log too short");
    if (spec.mode == FeatureMode::StateSpace && log.state_dim() != n)
        throw ContractViolation("build_dataset: log state dimension mismatch");

    const int first = spec.mode == FeatureMode::StateSpace ? 0 : n - r;
    const int last = log.size() - 1 - r;  // inclusive

    FeatureSpec raw = spec;
    raw.difference = false;
    FeatureAssembler assembler(raw);

    Dataset data;
    data.feature_names = spec.feature_names();
    data.inputs.resize(last - first + 1, spec.input_width());
    data.targets.resize(last - first + 1, 1);

    // Training pairing: the achieved output y plays the role of y_d.
    for (int t = 0; t <= last; ++t) {
        if (t >= first)
            data.inputs.row(t - first) =
                assembler.assemble(log.x[static_cast<size_t>(t)], log.y[t], log.y, t).transpose();
        assembler.record(log.u[t]);
        if (t >= first) data.targets(t - first, 0) = log.u[t];
    }
    return spec.difference ? apply_difference(data, spec) : data;
}

Dataset apply_difference(const Dataset& raw, const FeatureSpec& spec) {
    if (!spec.difference) throw ContractViolation("apply_difference: spec.difference is false");
    Dataset out = raw;
    out.feature_names = spec.feature_names();
    const int ref_col = spec.mode == FeatureMode::StateSpace ? 0 : spec.r;
    for (int i = 0; i < raw.rows(); ++i) {
        const double ref = raw.inputs(i, ref_col);
        if (spec.mode == FeatureMode::StateSpace) {
            out.inputs(i, 0) -= ref;
            out.inputs(i, spec.n) -= ref;
        } else {
            for (int j = 0; j < spec.input_width(); ++j) out.inputs(i, j) -= ref;
        }
        out.targets(i, 0) -= ref;
    }
    return out;
}

std::vector<Trajectory> sinusoid_family(const std::vector<double>& amplitudes,
                                        const std::vector<double>& frequencies_hz, double T,
                                        int steps) {
    if (amplitudes.empty() || frequencies_hz.empty())
        throw ContractViolation("sinusoid_family: empty parameter list");
    std::vector<Trajectory> family;
    family.reserve(amplitudes.size() * frequencies_hz.size());
    for (double a : amplitudes) {
        for (double f : frequencies_hz) {
            Trajectory traj;
            traj.period = T;
            traj.values.resize(static_cast<size_t>(steps));
            for (int t = 0; t < steps; ++t)
                traj.values[static_cast<size_t>(t)] =
                    a * std::sin(2.0 * std::numbers::pi * f * T * t);
            family.push_back(std::move(traj));
        }
    }
    return family;
}

Dataset balanced_sample(const std::vector<Dataset>& sources, int per_source,
                        unsigned long long seed) {
    if (sources.empty()) throw ContractViolation("balanced_sample: no sources");
    const int width = sources.front().input_dim();
    int total = 0;
    for (const auto& src : sources) {
        if (src.rows() < per_source)
            throw ContractViolation("balanced_sample: source smaller than per_source");
        if (src.input_dim() != width || src.feature_names != sources.front().feature_names)
            throw ContractViolation("balanced_sample: sources disagree on features");
        total += per_source;
    }

    Dataset out;
    out.feature_names = sources.front().feature_names;
    out.inputs.resize(total, width);
    out.targets.resize(total, sources.front().target_dim());

    std::mt19937_64 eng(seed);
    int cursor = 0;
    std::vector<int> index;
    for (const auto& src : sources) {
        index.resize(static_cast<size_t>(src.rows()));
        for (int i = 0; i < src.rows(); ++i) index[static_cast<size_t>(i)] = i;
        // Partial Fisher-Yates: the first per_source entries are a uniform
        // draw without replacement.
        for (int k = 0; k < per_source; ++k) {
            const int j =
                k + static_cast<int>(eng() % static_cast<unsigned long long>(src.rows() - k));
            std::swap(index[static_cast<size_t>(k)], index[static_cast<size_t>(j)]);
            out.inputs.row(cursor) = src.inputs.row(index[static_cast<size_t>(k)]);
            out.targets.row(cursor) = src.targets.row(index[static_cast<size_t>(k)]);
            ++cursor;
        }
    }
    return out;
}

}  // namespace tracker
