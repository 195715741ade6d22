#pragma once

#include <Eigen/Core>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "tracker/plant.hpp"

namespace tracker {

/// Output equation of the inverse dynamics in state-space form:
///   u(t) = (y_d(t+r) - c A^r x(t)) / (c A^{r-1} b)
/// Caches c A^r and c A^{r-1} b at construction. With this reference the plant
/// satisfies y(t+r) = y_d(t+r) exactly.
class SsInverse {
public:
    SsInverse(const LtiStateSpace& sys, int r);

    double operator()(const Eigen::VectorXd& x, double yd_future) const;

    const Eigen::RowVectorXd& cAr() const { return cAr_; }
    double markov() const { return cArm1b_; }

private:
    Eigen::RowVectorXd cAr_;
    double cArm1b_;
};

double exact_inverse_ss(const LtiStateSpace& sys, int r, const Eigen::VectorXd& x,
                        double yd_future);

/// Transfer-function form of the inverse. Windows are ordered newest first:
/// yd_window = [y_d(t+r), ..., y_d(t-n+r)] (n+1 values) and
/// u_history = [u(t-1), ..., u(t-n+r)] (n-r values).
double exact_inverse_tf(const TransferFunctionModel& tf, std::span<const double> yd_window,
                        std::span<const double> u_history);

/// Difference form of the transfer-function inverse. Takes the same windows
/// with every entry expressed relative to y_d(t) and returns the
/// difference-form output together with the absolute-level term
///   s(y_d(t)) = (1/beta_{n-r}) (1 - sum beta + sum alpha) y_d(t),
/// the only piece that depends on the absolute level. Reconstruction:
/// delta_u + s_term + y_d(t) equals the undifferenced inverse.
std::pair<double, double> exact_inverse_diff(const TransferFunctionModel& tf,
                                             std::span<const double> delta_yd_window,
                                             std::span<const double> delta_u_history,
                                             double yd_now);

/// Coefficient of y_d(t) in the difference form; zero exactly when the system
/// has unity DC gain.
double difference_bias_coefficient(const TransferFunctionModel& tf);

/// Inverse for the control-affine nonlinear composition
/// y(t+r) = hhat(x) + D(x) u. Throws when |D(x)| < 1e-12 (relative degree
/// lost at that state).
double exact_inverse_affine_nonlinear(
    const std::function<double(const Eigen::VectorXd&)>& hhat,
    const std::function<double(const Eigen::VectorXd&)>& input_sensitivity,
    const Eigen::VectorXd& x, double yd_future);

/// Streaming helper around exact_inverse_tf: owns the past-u ring buffer
/// (zero-initialized) and pulls the y_d window with preview and end-hold from
/// a trajectory. One context per run; not shared across threads.
class TfInverseContext {
public:
    explicit TfInverseContext(TransferFunctionModel tf);

    /// Reference for step t of the desired trajectory; records it in the ring.
    double step(const Trajectory& y_d, int t);

private:
    TransferFunctionModel tf_;
    std::vector<double> u_history_;  // newest first, length n - r
};

}  // namespace tracker
