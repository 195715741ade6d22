#include "tracker/plant.hpp"

#include <cmath>
#include <string>

#include "tracker/errors.hpp"
#include "tracker/polynomial.hpp"

namespace tracker {

namespace {

constexpr double kOutputGuard = 1e9;

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

double sinc(double s) {
    if (std::abs(s) < 1e-8) return 1.0 - s * s / 6.0;
    return std::sin(s) / s;
}

}  // namespace

LtiStateSpace::LtiStateSpace(Eigen::MatrixXd A_, Eigen::VectorXd b_, Eigen::RowVectorXd c_)
    : A(std::move(A_)), b(std::move(b_)), c(std::move(c_)) {
    if (A.rows() != A.cols()) throw ContractViolation("LtiStateSpace: A must be square");
    if (A.rows() < 1) throw ContractViolation("LtiStateSpace: state dimension must be >= 1");
    if (b.size() != A.rows() || c.size() != A.cols())
        throw ContractViolation("LtiStateSpace: b/c dimensions must match A");
}

TransferFunctionModel::TransferFunctionModel(std::vector<double> alpha_, std::vector<double> beta_)
    : alpha(std::move(alpha_)), beta(std::move(beta_)) {
    if (alpha.empty()) throw ContractViolation("TransferFunctionModel: order must be >= 1");
    if (beta.empty() || beta.size() > alpha.size())
        throw ContractViolation("TransferFunctionModel: relative degree must be in [1, n]");
    if (beta.back() == 0.0)
        throw ContractViolation("TransferFunctionModel: leading numerator coefficient is zero");
}

std::vector<double> TransferFunctionModel::denominator() const {
    std::vector<double> den = alpha;
    den.push_back(1.0);
    return den;
}

std::pair<Eigen::VectorXd, double> step_lti(const LtiStateSpace& sys, const Eigen::VectorXd& x,
                                            double u) {
    if (x.size() != sys.n()) throw ContractViolation("step_lti: state dimension mismatch");
    const double y = sys.c * x;
    Eigen::VectorXd x_next = sys.A * x + sys.b * u;
    return {std::move(x_next), y};
}

namespace {

template <typename StepFn, typename OutFn>
RunLog simulate_loop(int n, const Trajectory& u_seq, const Eigen::VectorXd& x0, StepFn step,
                     OutFn output) {
    if (u_seq.size() == 0) throw ContractViolation("simulate: empty input sequence");
    if (x0.size() != n) throw ContractViolation("simulate: x0 dimension mismatch");

    RunLog log;
    log.u = u_seq;
    log.y.period = log.y_d.period = u_seq.period;
    log.y.values.reserve(u_seq.values.size());
    log.x.reserve(u_seq.values.size());

    Eigen::VectorXd x = x0;
    for (int t = 0; t < u_seq.size(); ++t) {
        const double y = output(x);
        if (!std::isfinite(y) || std::abs(y) > kOutputGuard || !finite(x)) {
            log.u.values.resize(log.y.values.size());
            log.y_d = log.u;
            throw DivergenceError(t, "simulation diverged at step " + std::to_string(t),
                                  std::move(log));
        }
        log.y.values.push_back(y);
        log.x.push_back(x);
        x = step(x, u_seq[t]);
    }
    log.y_d = u_seq;  // callers running a tracking experiment overwrite this
    return log;
}

}  // namespace

RunLog simulate(const LtiStateSpace& sys, const Trajectory& u_seq, const Eigen::VectorXd& x0) {
    return simulate_loop(
        sys.n(), u_seq, x0,
        [&](const Eigen::VectorXd& x, double u) -> Eigen::VectorXd { return sys.A * x + sys.b * u; },
        [&](const Eigen::VectorXd& x) -> double { return sys.c * x; });
}

RunLog simulate(const NonlinearSystem& sys, const Trajectory& u_seq, const Eigen::VectorXd& x0) {
    return simulate_loop(
        sys.n, u_seq, x0,
        [&](const Eigen::VectorXd& x, double u) -> Eigen::VectorXd { return sys.f(x) + sys.g(x) * u; },
        [&](const Eigen::VectorXd& x) -> double { return sys.h(x); });
}

TransferFunctionModel ss_to_tf(const LtiStateSpace& sys) {
    const int n = sys.n();

    // Faddeev-LeVerrier: denominator coefficients and the adjugate expansion
    // adj(zI - A) = sum_k z^{n-1-k} M_{k+1} in one sweep.
    std::vector<double> den(static_cast<size_t>(n) + 1, 0.0);
    den[static_cast<size_t>(n)] = 1.0;
    std::vector<double> num(static_cast<size_t>(n), 0.0);

    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= n; ++k) {
        num[static_cast<size_t>(n - k)] = sys.c * M * sys.b;
        const Eigen::MatrixXd AM = sys.A * M;
        const double coef = -AM.trace() / static_cast<double>(k);
        den[static_cast<size_t>(n - k)] = coef;
        M = AM + coef * Eigen::MatrixXd::Identity(n, n);
    }

    double scale = 0.0;
    for (double v : num) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) throw ContractViolation("ss_to_tf: zero transfer function");

    int deg = n - 1;
    while (deg > 0 && std::abs(num[static_cast<size_t>(deg)]) <= 1e-9 * scale) --deg;
    num.resize(static_cast<size_t>(deg) + 1);

    den.pop_back();  // drop the monic z^n term; stored implicitly
    return TransferFunctionModel(std::move(den), std::move(num));
}

LtiStateSpace tf_to_ss(const TransferFunctionModel& tf) {
    const int n = tf.n();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = 1.0;
    for (int j = 0; j < n; ++j) A(n - 1, j) = -tf.alpha[static_cast<size_t>(j)];

    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;

    Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(n);
    for (size_t i = 0; i < tf.beta.size(); ++i) c(static_cast<int>(i)) = tf.beta[i];

    return LtiStateSpace(std::move(A), std::move(b), std::move(c));
}

LtiStateSpace sim_stable_system() {
    Eigen::MatrixXd A(2, 2);
    A << 0.0, 1.0, -0.15, 0.8;
    Eigen::VectorXd b(2);
    b << 0.0, 1.0;
    Eigen::RowVectorXd c(2);
    c << -0.2, 1.0;
    return LtiStateSpace(A, b, c);
}

LtiStateSpace sim_unstable_system() {
    Eigen::MatrixXd A(2, 2);
    A << 0.0, 1.0, -0.15, 0.8;
    Eigen::VectorXd b(2);
    b << 0.0, 1.0;
    Eigen::RowVectorXd c(2);
    c << -450.9, 450.0;
    return LtiStateSpace(A, b, c);
}

double PendulumParams::hhat(const Eigen::VectorXd& x) const {
    const double x1 = x(0), x2 = x(1);
    return x1 + 2.0 * T * x2 +
           T * T * (-gravity * std::sin(x1) - (damping + kd) * x2 - kp * x1);
}

double PendulumParams::input_sensitivity(const Eigen::VectorXd& x) const {
    return T * T * reference_gain * (kp + gravity * sinc(x(0)));
}

NonlinearSystem make_pendulum(const PendulumParams& params) {
    NonlinearSystem sys;
    sys.n = 2;
    sys.region = {{-8.0, 8.0}, {-60.0, 60.0}};
    sys.f = [params](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd next(2);
        next(0) = x(0) + params.T * x(1);
        next(1) = x(1) + params.T * (-params.gravity * std::sin(x(0)) -
                                     (params.damping + params.kd) * x(1) - params.kp * x(0));
        return next;
    };
    sys.g = [params](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd gain(2);
        gain(0) = 0.0;
        gain(1) = params.T * params.reference_gain * (params.kp + params.gravity * sinc(x(0)));
        return gain;
    };
    sys.h = [](const Eigen::VectorXd& x) -> double { return x(0); };
    return sys;
}

}  // namespace tracker
