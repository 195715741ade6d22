#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tracker/config.hpp"
#include "tracker/features.hpp"
#include "tracker/nnet.hpp"
#include "tracker/plant.hpp"
#include "tracker/runner.hpp"

namespace tracker {

/// System instance built from a config, together with the identified
/// relative degree and the analytic inverse used as the modeling oracle.
struct BuiltSystem {
    bool is_lti = true;
    LtiStateSpace lti;
    NonlinearSystem nonlinear;
    PendulumParams pendulum;
    int n = 0;
    int r = 0;
    double T = 1.0;
};

BuiltSystem build_system(const ExperimentConfig& cfg);
FeatureSpec feature_spec_for(const ExperimentConfig& cfg, const BuiltSystem& sys);
Trajectory test_trajectory_for(const ExperimentConfig& cfg, const BuiltSystem& sys);

/// Exact-inverse reference along given states; the modeling oracle the
/// network output is compared against.
std::vector<double> oracle_references(const BuiltSystem& sys, const RunLog& log,
                                      const Trajectory& y_d);

struct TrainOutcome {
    FnnModel model;
    std::vector<double> loss_history;
    double final_loss = 0.0;
    double holdout_loss = 0.0;
    std::vector<std::string> notes;  // e.g. sample-rate aliasing warnings
};

/// Sinusoid family -> baseline runs -> balanced dataset -> training.
TrainOutcome train_pipeline(const ExperimentConfig& cfg);

/// Same pipeline on an explicit trajectory family (used by studies that need
/// a richer excitation than the plain sinusoid grid).
TrainOutcome train_on_trajectories(const ExperimentConfig& cfg,
                                   const std::vector<Trajectory>& family);

struct EvaluateOutcome {
    EvaluationResult eval;
    std::vector<double> oracle_u;  // along the enhanced run's states
    double modeling_rms = 0.0;     // RMS(u_dnn - u_oracle) over steps >= skip
    Trajectory y_d;
    int skip = 0;
};

EvaluateOutcome evaluate_pipeline(const ExperimentConfig& cfg, const FnnModel& model);

// CLI entry points. Exit codes: 0 completed (including scientifically
// expected divergence), 1 config error, 2 training failure.
int cmd_identify(ExperimentConfig cfg, std::ostream& out);
int cmd_train(ExperimentConfig cfg, std::ostream& out);
int cmd_evaluate(ExperimentConfig cfg, std::ostream& out);
int cmd_reproduce(const std::string& study, ExperimentConfig base, std::ostream& out);

}  // namespace tracker
