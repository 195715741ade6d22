#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>

#include "tracker/features.hpp"
#include "tracker/nnet.hpp"
#include "tracker/plant.hpp"
#include "tracker/trajectory.hpp"

namespace tracker {

/// Tracking comparison between the bare closed loop and the add-on-enhanced
/// one. reduction_percent = 100 (1 - rms_enhanced / rms_baseline) when both
/// runs stayed finite.
struct ExperimentReport {
    double rms_baseline = 0.0;
    double rms_enhanced = 0.0;
    double reduction_percent = 0.0;
    bool diverged = false;
    int diverged_step = -1;
    std::vector<double> per_step_errors_baseline;
    std::vector<double> per_step_errors_enhanced;

    std::string to_json() const;
};

/// Any reference generator evaluated on an assembled feature row.
using ReferencePolicy = std::function<double(const Eigen::VectorXd&)>;

/// Baseline run: the desired trajectory is fed directly as the reference.
RunLog run_baseline(const LtiStateSpace& sys, const Trajectory& y_d, const Eigen::VectorXd& x0);
RunLog run_baseline(const NonlinearSystem& sys, const Trajectory& y_d, const Eigen::VectorXd& x0);

/// Enhanced run: each step assembles features from the live state/output and
/// the previewed desired trajectory, asks the policy for the reference (with
/// difference-mode reconstruction) and steps the plant once. Divergence
/// propagates as DivergenceError carrying the partial log.
RunLog run_enhanced(const LtiStateSpace& sys, const ReferencePolicy& policy,
                    const FeatureSpec& spec, const Trajectory& y_d, const Eigen::VectorXd& x0);
RunLog run_enhanced(const NonlinearSystem& sys, const ReferencePolicy& policy,
                    const FeatureSpec& spec, const Trajectory& y_d, const Eigen::VectorXd& x0);
RunLog run_enhanced(const LtiStateSpace& sys, const FnnModel& net, const FeatureSpec& spec,
                    const Trajectory& y_d, const Eigen::VectorXd& x0);
RunLog run_enhanced(const NonlinearSystem& sys, const FnnModel& net, const FeatureSpec& spec,
                    const Trajectory& y_d, const Eigen::VectorXd& x0);

/// RMS of y - y_d over steps >= skip.
double rms_error(const Trajectory& y, const Trajectory& y_d, int skip);

struct EvaluationResult {
    ExperimentReport report;
    RunLog baseline;
    RunLog enhanced;  // partial when the enhanced run diverged
};

/// Runs both loops and assembles the report; enhanced-run divergence is
/// folded into the report instead of propagating.
EvaluationResult evaluate_tracking(const LtiStateSpace& sys, const ReferencePolicy& policy,
                                   const FeatureSpec& spec, const Trajectory& y_d,
                                   const Eigen::VectorXd& x0, int skip);
EvaluationResult evaluate_tracking(const NonlinearSystem& sys, const ReferencePolicy& policy,
                                   const FeatureSpec& spec, const Trajectory& y_d,
                                   const Eigen::VectorXd& x0, int skip);

/// Policy wrapper around a trained network.
ReferencePolicy policy_from_net(const FnnModel& net);

}  // namespace tracker
