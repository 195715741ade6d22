#include "tracker/inverse.hpp"

#include <cmath>
#include <numeric>

#include "tracker/errors.hpp"

namespace tracker {

SsInverse::SsInverse(const LtiStateSpace& sys, int r) {
    if (r < 1 || r > sys.n()) throw ContractViolation("SsInverse: r out of range");
    Eigen::RowVectorXd v = sys.c;
    for (int k = 1; k < r; ++k) v = v * sys.A;
    cArm1b_ = v * sys.b;
    if (cArm1b_ == 0.0) throw ContractViolation("SsInverse: c A^{r-1} b vanishes");
    cAr_ = v * sys.A;
}

double SsInverse::operator()(const Eigen::VectorXd& x, double yd_future) const {
    return (yd_future - cAr_ * x) / cArm1b_;
}

double exact_inverse_ss(const LtiStateSpace& sys, int r, const Eigen::VectorXd& x,
                        double yd_future) {
    return SsInverse(sys, r)(x, yd_future);
}

double exact_inverse_tf(const TransferFunctionModel& tf, std::span<const double> yd_window,
                        std::span<const double> u_history) {
    const int n = tf.n();
    const int r = tf.r();
    if (static_cast<int>(yd_window.size()) != n + 1)
        throw ContractViolation("exact_inverse_tf: yd window must have n+1 entries");
    if (static_cast<int>(u_history.size()) != n - r)
        throw ContractViolation("exact_inverse_tf: u history must have n-r entries");

    double acc = yd_window[0];  // y_d(t+r)
    for (int j = 1; j <= n; ++j) acc += tf.alpha[static_cast<size_t>(n - j)] * yd_window[static_cast<size_t>(j)];
    for (int j = 1; j <= n - r; ++j)
        acc -= tf.beta[static_cast<size_t>(n - r - j)] * u_history[static_cast<size_t>(j - 1)];
    return acc / tf.leading_beta();
}

double difference_bias_coefficient(const TransferFunctionModel& tf) {
    const double sum_beta = std::accumulate(tf.beta.begin(), tf.beta.end(), 0.0);
    const double sum_alpha = std::accumulate(tf.alpha.begin(), tf.alpha.end(), 0.0);
    return (1.0 - sum_beta + sum_alpha) / tf.leading_beta();
}

std::pair<double, double> exact_inverse_diff(const TransferFunctionModel& tf,
                                             std::span<const double> delta_yd_window,
                                             std::span<const double> delta_u_history,
                                             double yd_now) {
    const double delta_u = exact_inverse_tf(tf, delta_yd_window, delta_u_history);
    const double s_term = difference_bias_coefficient(tf) * yd_now;
    return {delta_u, s_term};
}

double exact_inverse_affine_nonlinear(
    const std::function<double(const Eigen::VectorXd&)>& hhat,
    const std::function<double(const Eigen::VectorXd&)>& input_sensitivity,
    const Eigen::VectorXd& x, double yd_future) {
    const double d = input_sensitivity(x);
    if (std::abs(d) < 1e-12) throw ContractViolation("relative degree lost at state");
    return (yd_future - hhat(x)) / d;
}

TfInverseContext::TfInverseContext(TransferFunctionModel tf) : tf_(std::move(tf)) {
    u_history_.assign(static_cast<size_t>(tf_.n() - tf_.r()), 0.0);
}

double TfInverseContext::step(const Trajectory& y_d, int t) {
    const int n = tf_.n();
    const int r = tf_.r();
    std::vector<double> window(static_cast<size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) window[static_cast<size_t>(j)] = y_d.at_clamped(t + r - j);
    const double u = exact_inverse_tf(tf_, window, u_history_);
    if (!u_history_.empty()) {
        u_history_.pop_back();
        u_history_.insert(u_history_.begin(), u);
    }
    return u;
}

}  // namespace tracker
