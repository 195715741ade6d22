#pragma once

#include <Eigen/Core>
#include <functional>
#include <utility>
#include <vector>

#include "tracker/trajectory.hpp"

namespace tracker {

/// Discrete-time SISO LTI system
///   x(t+1) = A x(t) + b u(t),   y(t) = c x(t)
/// The output is read at the pre-update state each step; the r-step delay
/// bookkeeping of the inverse laws depends on this convention.
struct LtiStateSpace {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::RowVectorXd c;

    LtiStateSpace() = default;
    LtiStateSpace(Eigen::MatrixXd A_, Eigen::VectorXd b_, Eigen::RowVectorXd c_);

    int n() const { return static_cast<int>(A.rows()); }
};

/// Rational z-domain model with monic denominator:
///
///   Y(z)/U(z) = (beta_{n-r} z^{n-r} + ... + beta_0) / (z^n + alpha_{n-1} z^{n-1} + ... + alpha_0)
///
/// Coefficients are stored ascending: alpha[i] multiplies z^i (n entries),
/// beta[i] multiplies z^i (n-r+1 entries, leading entry nonzero).
struct TransferFunctionModel {
    std::vector<double> alpha;
    std::vector<double> beta;

    TransferFunctionModel() = default;
    TransferFunctionModel(std::vector<double> alpha_, std::vector<double> beta_);

    int n() const { return static_cast<int>(alpha.size()); }
    int r() const { return n() - (static_cast<int>(beta.size()) - 1); }
    double leading_beta() const { return beta.back(); }

    /// Denominator as a full ascending coefficient vector including the monic z^n term.
    std::vector<double> denominator() const;
};

/// Control-affine nonlinear system x(t+1) = f(x) + g(x) u, y = h(x),
/// with a declared box operating region per state component.
struct NonlinearSystem {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> g;
    std::function<double(const Eigen::VectorXd&)> h;
    int n = 0;
    std::vector<std::pair<double, double>> region;
};

/// One simulation step. Returns (x_next, y) where y = c x is the output at the
/// current (pre-update) state.
std::pair<Eigen::VectorXd, double> step_lti(const LtiStateSpace& sys,
                                            const Eigen::VectorXd& x, double u);

/// Forward simulation under a given reference sequence. Aborts with
/// DivergenceError when |y| > 1e9 or any state component becomes non-finite.
RunLog simulate(const LtiStateSpace& sys, const Trajectory& u_seq, const Eigen::VectorXd& x0);
RunLog simulate(const NonlinearSystem& sys, const Trajectory& u_seq, const Eigen::VectorXd& x0);

/// Equivalent transfer function: monic characteristic polynomial of A in the
/// denominator, c adj(zI - A) b in the numerator, r = n - deg(numerator).
/// Throws on an identically zero numerator.
TransferFunctionModel ss_to_tf(const LtiStateSpace& sys);

/// Controllable canonical realization (b = [0,...,0,1]^T). Round-trips through
/// ss_to_tf to the original coefficients.
LtiStateSpace tf_to_ss(const TransferFunctionModel& tf);

// Systems used by the shipped studies ------------------------------------

/// Baseline closed loop with poles {0.3, 0.5} and a stable zero at 0.2.
LtiStateSpace sim_stable_system();

/// Same poles, non-minimum-phase zero at 1.002 (c = [-450.9, 450]).
LtiStateSpace sim_unstable_system();

/// PD-controlled damped pendulum closed loop with a reference-scheduled
/// gravity feedforward term, discretized at T = 0.02 s:
///
///   x1+ = x1 + T x2
///   x2+ = x2 + T(-a sin x1 - d x2 + kp (gu - x1) - kd x2 + a sinc(x1) gu)
///   y   = x1
///
/// The feedforward gives the loop exactly unity DC gain for every step
/// amplitude (steady state x1 = g u); the gain mismatch factor g != 1
/// destroys that, which is what the difference-learning study needs.
struct PendulumParams {
    double T = 0.02;
    double gravity = 9.81;
    double damping = 0.5;
    double kp = 16.0;
    double kd = 8.0;
    double reference_gain = 1.0;  // the "gamma" mismatch factor

    /// Two-step output composition y(t+2) = hhat(x) + D(x) u, exact because
    /// x1(t+2) is linear in x(t+1).
    double hhat(const Eigen::VectorXd& x) const;
    double input_sensitivity(const Eigen::VectorXd& x) const;  // D(x), never zero
};

NonlinearSystem make_pendulum(const PendulumParams& params = {});

}  // namespace tracker
