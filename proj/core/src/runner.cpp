#include "tracker/runner.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "tracker/errors.hpp"

namespace tracker {

namespace {

constexpr double kOutputGuard = 1e9;

struct SystemView {
    int n;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> step;
    std::function<double(const Eigen::VectorXd&)> output;
};

SystemView view(const LtiStateSpace& sys) {
    return {sys.n(),
            [&sys](const Eigen::VectorXd& x, double u) -> Eigen::VectorXd {
                return sys.A * x + sys.b * u;
            },
            [&sys](const Eigen::VectorXd& x) -> double { return sys.c * x; }};
}

SystemView view(const NonlinearSystem& sys) {
    return {sys.n,
            [&sys](const Eigen::VectorXd& x, double u) -> Eigen::VectorXd {
                return sys.f(x) + sys.g(x) * u;
            },
            [&sys](const Eigen::VectorXd& x) -> double { return sys.h(x); }};
}

RunLog run_enhanced_view(const SystemView& sys, const ReferencePolicy& policy,
                         const FeatureSpec& spec, const Trajectory& y_d,
                         const Eigen::VectorXd& x0) {
    if (y_d.size() == 0) throw ContractViolation("run_enhanced: empty desired trajectory");
    if (x0.size() != sys.n) throw ContractViolation("run_enhanced: x0 dimension mismatch");

    RunLog log;
    log.u.period = log.y.period = y_d.period;
    log.y_d = y_d;

    FeatureAssembler assembler(spec);
    Eigen::VectorXd x = x0;
    for (int t = 0; t < y_d.size(); ++t) {
        const double y = sys.output(x);
        if (!std::isfinite(y) || std::abs(y) > kOutputGuard || !x.allFinite()) {
            log.y_d.values.resize(log.y.values.size());
            throw DivergenceError(t, "enhanced run diverged at step " + std::to_string(t),
                                  std::move(log));
        }
        const Eigen::VectorXd input = assembler.assemble(x, y, y_d, t);
        const double u = assembler.finalize(policy(input), y, y_d, t);
        log.u.values.push_back(u);
        log.y.values.push_back(y);
        log.x.push_back(x);
        x = sys.step(x, u);
    }
    return log;
}

template <typename System>
RunLog run_baseline_impl(const System& sys, const Trajectory& y_d, const Eigen::VectorXd& x0) {
    RunLog log = simulate(sys, y_d, x0);
    log.y_d = y_d;
    return log;
}

template <typename System>
EvaluationResult evaluate_impl(const System& sys, const ReferencePolicy& policy,
                               const FeatureSpec& spec, const Trajectory& y_d,
                               const Eigen::VectorXd& x0, int skip) {
    EvaluationResult result;
    result.baseline = run_baseline_impl(sys, y_d, x0);
    result.report.rms_baseline = rms_error(result.baseline.y, y_d, skip);
    for (int t = 0; t < y_d.size(); ++t)
        result.report.per_step_errors_baseline.push_back(result.baseline.y[t] - y_d[t]);

    try {
        result.enhanced = run_enhanced_view(view(sys), policy, spec, y_d, x0);
        result.report.rms_enhanced = rms_error(result.enhanced.y, y_d, skip);
        result.report.reduction_percent =
            100.0 * (1.0 - result.report.rms_enhanced / result.report.rms_baseline);
        for (int t = 0; t < y_d.size(); ++t)
            result.report.per_step_errors_enhanced.push_back(result.enhanced.y[t] - y_d[t]);
    } catch (const DivergenceError& err) {
        result.report.diverged = true;
        result.report.diverged_step = err.step();
        result.report.rms_enhanced = std::numeric_limits<double>::quiet_NaN();
        result.report.reduction_percent = std::numeric_limits<double>::quiet_NaN();
        result.enhanced = err.partial;
        for (int t = 0; t < result.enhanced.size(); ++t)
            result.report.per_step_errors_enhanced.push_back(result.enhanced.y[t] -
                                                             y_d.at_clamped(t));
    }
    return result;
}

}  // namespace

RunLog run_baseline(const LtiStateSpace& sys, const Trajectory& y_d, const Eigen::VectorXd& x0) {
    return run_baseline_impl(sys, y_d, x0);
}

RunLog run_baseline(const NonlinearSystem& sys, const Trajectory& y_d,
                    const Eigen::VectorXd& x0) {
    return run_baseline_impl(sys, y_d, x0);
}

RunLog run_enhanced(const LtiStateSpace& sys, const ReferencePolicy& policy,
                    const FeatureSpec& spec, const Trajectory& y_d, const Eigen::VectorXd& x0) {
    return run_enhanced_view(view(sys), policy, spec, y_d, x0);
}

RunLog run_enhanced(const NonlinearSystem& sys, const ReferencePolicy& policy,
                    const FeatureSpec& spec, const Trajectory& y_d, const Eigen::VectorXd& x0) {
    return run_enhanced_view(view(sys), policy, spec, y_d, x0);
}

ReferencePolicy policy_from_net(const FnnModel& net) {
    return [net](const Eigen::VectorXd& input) -> double { return forward(net, input)(0); };
}

RunLog run_enhanced(const LtiStateSpace& sys, const FnnModel& net, const FeatureSpec& spec,
                    const Trajectory& y_d, const Eigen::VectorXd& x0) {
    if (net.input_dim() != spec.input_width())
        throw ContractViolation("run_enhanced: network input dimension does not match spec");
    return run_enhanced(sys, policy_from_net(net), spec, y_d, x0);
}

RunLog run_enhanced(const NonlinearSystem& sys, const FnnModel& net, const FeatureSpec& spec,
                    const Trajectory& y_d, const Eigen::VectorXd& x0) {
    if (net.input_dim() != spec.input_width())
        throw ContractViolation("run_enhanced: network input dimension does not match spec");
    return run_enhanced(sys, policy_from_net(net), spec, y_d, x0);
}

double rms_error(const Trajectory& y, const Trajectory& y_d, int skip) {
    if (y.size() != y_d.size()) throw ContractViolation("rms_error: length mismatch");
    if (skip < 0 || skip >= y.size()) throw ContractViolation("rms_error: bad skip");
    double acc = 0.0;
    for (int t = skip; t < y.size(); ++t) {
        const double e = y[t] - y_d[t];
        acc += e * e;
    }
    return std::sqrt(acc / (y.size() - skip));
}

EvaluationResult evaluate_tracking(const LtiStateSpace& sys, const ReferencePolicy& policy,
                                   const FeatureSpec& spec, const Trajectory& y_d,
                                   const Eigen::VectorXd& x0, int skip) {
    return evaluate_impl(sys, policy, spec, y_d, x0, skip);
}

EvaluationResult evaluate_tracking(const NonlinearSystem& sys, const ReferencePolicy& policy,
                                   const FeatureSpec& spec, const Trajectory& y_d,
                                   const Eigen::VectorXd& x0, int skip) {
    return evaluate_impl(sys, policy, spec, y_d, x0, skip);
}

std::string ExperimentReport::to_json() const {
    nlohmann::json j;
    j["rms_baseline"] = rms_baseline;
    j["rms_enhanced"] = std::isfinite(rms_enhanced) ? nlohmann::json(rms_enhanced)
                                                    : nlohmann::json(nullptr);
    j["reduction_percent"] = std::isfinite(reduction_percent)
                                 ? nlohmann::json(reduction_percent)
                                 : nlohmann::json(nullptr);
    j["diverged"] = diverged;
    j["diverged_step"] = diverged_step;
    j["per_step_errors"] = {{"baseline", per_step_errors_baseline},
                            {"enhanced", per_step_errors_enhanced}};
    return j.dump(2);
}

}  // namespace tracker
