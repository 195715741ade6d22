#include "tracker/sysid.hpp"

#include <Eigen/Dense>
#include <cmath>

#include <nlohmann/json.hpp>

#include "tracker/errors.hpp"
#include "tracker/polynomial.hpp"

namespace tracker {

namespace {

constexpr double kUnitCircleBand = 1e-6;
constexpr double kEligibilityTol = 1e-2;  // |step error| below this counts as unity gain

}  // namespace

int relative_degree_lti(const LtiStateSpace& sys, double tol) {
    if (tol <= 0.0) throw ContractViolation("relative_degree_lti: tol must be positive");
    Eigen::RowVectorXd v = sys.c;
    for (int r = 1; r <= sys.n(); ++r) {
        if (std::abs(v * sys.b) > tol) return r;
        v = v * sys.A;
    }
    throw ContractViolation("relative degree undefined");
}

int relative_degree_from_step(const RunLog& step_log, double tol) {
    if (step_log.size() < 2) throw ContractViolation("step log too short");
    const double amplitude = std::abs(step_log.u[step_log.size() - 1]);
    if (tol <= 0.0) tol = 1e-6 * (amplitude > 0.0 ? amplitude : 1.0);
    for (int t = 1; t < step_log.size(); ++t)
        if (std::abs(step_log.y[t]) > tol) return t;
    throw ContractViolation("no response detected");
}

double dc_gain(const LtiStateSpace& sys) {
    const int n = sys.n();
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) - sys.A;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-12)
        throw ContractViolation("DC gain undefined (integrator)");
    return sys.c * lu.solve(sys.b);
}

double dc_gain(const TransferFunctionModel& tf) {
    const double den = poly_eval(tf.denominator(), 1.0);
    if (std::abs(den) < 1e-12) throw ContractViolation("DC gain undefined (integrator)");
    return poly_eval(tf.beta, 1.0) / den;
}

std::vector<std::complex<double>> zeros(const TransferFunctionModel& tf) {
    if (tf.beta.size() == 1) return {};
    return poly_roots(tf.beta);
}

bool is_minimum_phase(const std::vector<std::complex<double>>& zs, bool* near_unit_circle) {
    bool warn = false;
    bool inside = true;
    for (const auto& z : zs) {
        const double m = std::abs(z);
        if (m >= 1.0 - kUnitCircleBand) inside = false;
        if (m >= 1.0 - kUnitCircleBand && m <= 1.0 + kUnitCircleBand) warn = true;
    }
    if (near_unit_circle) *near_unit_circle = warn;
    return inside;
}

double step_steady_state_error(const RunLog& step_log, double tail_fraction) {
    if (!(tail_fraction > 0.0 && tail_fraction <= 0.5))
        throw ContractViolation("tail_fraction must be in (0, 0.5]");
    const int len = step_log.size();
    const int window = static_cast<int>(tail_fraction * len);
    if (window < 10) throw ContractViolation("log too short for steady-state window");
    const double amplitude = step_log.y_d[len - 1];
    double acc = 0.0;
    for (int t = len - window; t < len; ++t) acc += std::abs(step_log.y[t] - amplitude);
    return acc / window;
}

namespace {

RunLog unit_step_response(const LtiStateSpace& sys, int horizon) {
    Trajectory u = Trajectory::constant(1.0, horizon, 1.0);
    RunLog log = simulate(sys, u, Eigen::VectorXd::Zero(sys.n()));
    return log;
}

}  // namespace

SysIdReport identify(const LtiStateSpace& sys, int step_horizon) {
    SysIdReport report;
    report.relative_degree = relative_degree_lti(sys);
    report.dc_gain = dc_gain(sys);
    const TransferFunctionModel tf = ss_to_tf(sys);
    report.zeros = zeros(tf);
    report.minimum_phase = is_minimum_phase(report.zeros, &report.near_unit_circle_warning);

    const RunLog step = unit_step_response(sys, step_horizon);
    report.step_steady_state_error = step_steady_state_error(step, 0.25);
    report.difference_learning_eligible = report.step_steady_state_error < kEligibilityTol;
    return report;
}

SysIdReport identify_from_step(const RunLog& step_log) {
    SysIdReport report;
    report.relative_degree = relative_degree_from_step(step_log);
    report.step_steady_state_error = step_steady_state_error(step_log, 0.25);
    const double amplitude = step_log.y_d[step_log.size() - 1];
    report.dc_gain = amplitude != 0.0 ? step_log.y[step_log.size() - 1] / amplitude : 0.0;
    report.minimum_phase = true;  // no zero dynamics observable from the step map
    report.difference_learning_eligible = report.step_steady_state_error < kEligibilityTol;
    return report;
}

std::string SysIdReport::to_json() const {
    nlohmann::json j;
    j["relative_degree"] = relative_degree;
    j["dc_gain"] = dc_gain;
    j["zeros"] = nlohmann::json::array();
    for (const auto& z : zeros) j["zeros"].push_back({{"re", z.real()}, {"im", z.imag()}});
    j["minimum_phase"] = minimum_phase;
    j["near_unit_circle_warning"] = near_unit_circle_warning;
    j["step_steady_state_error"] = step_steady_state_error;
    j["difference_learning_eligible"] = difference_learning_eligible;
    return j.dump(2);
}

}  // namespace tracker
