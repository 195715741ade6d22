#include "tracker/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>

#include <nlohmann/json.hpp>

#include "tracker/errors.hpp"
#include "tracker/inverse.hpp"
#include "tracker/sysid.hpp"

namespace tracker {

namespace {

namespace fs = std::filesystem;

void write_text(const std::string& path, const std::string& text) {
    fs::create_directories(fs::path(path).parent_path().empty()
                               ? fs::path(".")
                               : fs::path(path).parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write: " + path);
    out << text << '\n';
}

int to_int(double v, const std::string& what) {
    if (v != std::floor(v)) throw ConfigError(what + " must be an integer");
    return static_cast<int>(v);
}

LtiStateSpace custom_lti(const ExperimentConfig& cfg) {
    const int n = static_cast<int>(cfg.custom_b.size());
    if (static_cast<int>(cfg.custom_A.size()) != n * n ||
        static_cast<int>(cfg.custom_c.size()) != n)
        throw ConfigError("custom system: A must be n*n, b and c length n");
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = cfg.custom_A[static_cast<size_t>(i * n + j)];
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(cfg.custom_b.data(), n);
    Eigen::RowVectorXd c = Eigen::Map<const Eigen::RowVectorXd>(cfg.custom_c.data(), n);
    return LtiStateSpace(A, b, c);
}

std::vector<std::string> aliasing_notes(const ExperimentConfig& cfg) {
    std::vector<std::string> notes;
    for (double f : cfg.frequencies_hz) {
        const double cycles_per_two_samples = 2.0 * f * cfg.sample_period;
        if (f > 0.0 &&
            std::abs(cycles_per_two_samples - std::round(cycles_per_two_samples)) < 1e-9) {
            notes.push_back("frequency " + std::to_string(f) + " Hz aliases to a constant at T = " +
                            std::to_string(cfg.sample_period) + " s");
        }
    }
    return notes;
}

}  // namespace

BuiltSystem build_system(const ExperimentConfig& cfg) {
    BuiltSystem sys;
    sys.T = cfg.sample_period;
    if (cfg.system == "sim_stable" || cfg.system == "sim_unstable" || cfg.system == "custom") {
        sys.is_lti = true;
        sys.lti = cfg.system == "sim_stable"     ? sim_stable_system()
                  : cfg.system == "sim_unstable" ? sim_unstable_system()
                                                 : custom_lti(cfg);
        sys.n = sys.lti.n();
        sys.r = relative_degree_lti(sys.lti);
    } else {
        sys.is_lti = false;
        sys.pendulum.T = cfg.sample_period;
        sys.pendulum.reference_gain = cfg.system == "pendulum_scaled_gain" ? cfg.gamma : 1.0;
        sys.nonlinear = make_pendulum(sys.pendulum);
        sys.n = sys.nonlinear.n;
        // Identified from the step response, as one would on hardware.
        Trajectory step = Trajectory::constant(1.0, 64, sys.T);
        RunLog log = simulate(sys.nonlinear, step, Eigen::VectorXd::Zero(2));
        log.y_d = step;
        sys.r = relative_degree_from_step(log);
    }
    return sys;
}

FeatureSpec feature_spec_for(const ExperimentConfig& cfg, const BuiltSystem& sys) {
    FeatureSpec spec;
    spec.mode = cfg.feature_mode == "state_space" ? FeatureMode::StateSpace
                                                  : FeatureMode::TransferFunction;
    spec.r = sys.r;
    spec.n = sys.n;
    spec.difference = cfg.difference == 1;
    spec.difference_reference = cfg.difference_reference == "actual_now"
                                    ? DifferenceReference::ActualNow
                                    : DifferenceReference::DesiredNow;
    return spec;
}

Trajectory test_trajectory_for(const ExperimentConfig& cfg, const BuiltSystem& sys) {
    const int steps = to_int(cfg.eval_steps, "evaluate.steps");
    std::string name = cfg.test_trajectory;
    if (name.empty()) name = sys.is_lti ? "paper_sim" : "pendulum_unseen";

    Trajectory traj;
    traj.period = sys.T;
    traj.values.resize(static_cast<size_t>(steps));
    if (name == "paper_sim") {
        for (int t = 0; t < steps; ++t)
            traj.values[static_cast<size_t>(t)] =
                std::sin(2.0 * std::numbers::pi * t / 15.0) +
                std::cos(2.0 * std::numbers::pi * t / 12.0) - 1.0;
    } else if (name == "pendulum_unseen") {
        for (int t = 0; t < steps; ++t) {
            const double time = t * sys.T;
            traj.values[static_cast<size_t>(t)] =
                1.2 * std::sin(2.0 * std::numbers::pi * 0.35 * time) +
                0.6 * std::cos(2.0 * std::numbers::pi * 0.15 * time) - 0.6;
        }
    } else if (name == "step") {
        const int onset = steps / 6;
        for (int t = 0; t < steps; ++t)
            traj.values[static_cast<size_t>(t)] = t < onset ? 0.0 : cfg.step_amplitude;
    } else {
        throw ConfigError("unknown evaluate.trajectory: " + name);
    }
    return traj;
}

std::vector<double> oracle_references(const BuiltSystem& sys, const RunLog& log,
                                      const Trajectory& y_d) {
    std::vector<double> oracle;
    oracle.reserve(static_cast<size_t>(log.size()));
    if (sys.is_lti) {
        const SsInverse inverse(sys.lti, sys.r);
        for (int t = 0; t < log.size(); ++t)
            oracle.push_back(inverse(log.x[static_cast<size_t>(t)], y_d.at_clamped(t + sys.r)));
    } else {
        const PendulumParams& p = sys.pendulum;
        for (int t = 0; t < log.size(); ++t)
            oracle.push_back(exact_inverse_affine_nonlinear(
                [&p](const Eigen::VectorXd& x) { return p.hhat(x); },
                [&p](const Eigen::VectorXd& x) { return p.input_sensitivity(x); },
                log.x[static_cast<size_t>(t)], y_d.at_clamped(t + sys.r)));
    }
    return oracle;
}

TrainOutcome train_pipeline(const ExperimentConfig& cfg) {
    return train_on_trajectories(
        cfg, sinusoid_family(cfg.amplitudes, cfg.frequencies_hz, cfg.sample_period,
                             to_int(cfg.steps_per_trajectory, "data.steps_per_trajectory")));
}

TrainOutcome train_on_trajectories(const ExperimentConfig& cfg,
                                   const std::vector<Trajectory>& family) {
    const BuiltSystem sys = build_system(cfg);
    const FeatureSpec spec = feature_spec_for(cfg, sys);

    std::vector<Dataset> datasets;
    datasets.reserve(family.size());
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(sys.n);
    for (const Trajectory& traj : family) {
        const RunLog log = sys.is_lti ? run_baseline(sys.lti, traj, x0)
                                      : run_baseline(sys.nonlinear, traj, x0);
        datasets.push_back(build_dataset(log, spec));
    }
    const Dataset data =
        balanced_sample(datasets, to_int(cfg.rows_per_trajectory, "data.rows_per_trajectory"),
                        static_cast<unsigned long long>(cfg.seed));

    std::vector<int> sizes{spec.input_width()};
    std::vector<Activation> acts;
    for (double h : cfg.hidden_layers) {
        sizes.push_back(static_cast<int>(h));
        acts.push_back(activation_from_string(cfg.activation));
    }
    sizes.push_back(1);
    acts.push_back(Activation::Linear);

    TrainConfig tc;
    tc.max_iterations = to_int(cfg.max_iterations, "training.max_iterations");
    tc.loss_tolerance = cfg.loss_tolerance;
    tc.lm_lambda_init = cfg.lm_lambda_init;
    tc.lm_lambda_up = cfg.lm_lambda_up;
    tc.lm_lambda_down = cfg.lm_lambda_down;
    tc.rng_seed = static_cast<unsigned long long>(cfg.seed);
    tc.trainer = cfg.trainer == "levenberg_marquardt" ? Trainer::LevenbergMarquardt
                                                      : Trainer::FirstOrder;
    tc.holdout_fraction = cfg.holdout_fraction;
    tc.learning_rate = cfg.learning_rate;
    tc.momentum = cfg.momentum;
    tc.batch_size = to_int(cfg.batch_size, "training.batch_size");

    const TrainResult result = train(make_fnn(sizes, acts), data, tc);

    TrainOutcome outcome;
    outcome.model = result.model;
    outcome.loss_history = result.loss_history;
    outcome.final_loss = result.loss_history.back();
    outcome.holdout_loss = result.holdout_loss;
    outcome.notes = aliasing_notes(cfg);
    return outcome;
}

EvaluateOutcome evaluate_pipeline(const ExperimentConfig& cfg, const FnnModel& model) {
    const BuiltSystem sys = build_system(cfg);
    const FeatureSpec spec = feature_spec_for(cfg, sys);
    if (model.input_dim() != spec.input_width())
        throw ConfigError("model input width does not match the feature spec");

    EvaluateOutcome outcome;
    outcome.y_d = test_trajectory_for(cfg, sys);
    outcome.skip = sys.n;
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(sys.n);
    outcome.eval = sys.is_lti
                       ? evaluate_tracking(sys.lti, policy_from_net(model), spec, outcome.y_d,
                                           x0, outcome.skip)
                       : evaluate_tracking(sys.nonlinear, policy_from_net(model), spec,
                                           outcome.y_d, x0, outcome.skip);

    outcome.oracle_u = oracle_references(sys, outcome.eval.enhanced, outcome.y_d);
    double acc = 0.0;
    int count = 0;
    for (int t = outcome.skip; t < outcome.eval.enhanced.size(); ++t) {
        const double d = outcome.eval.enhanced.u[t] - outcome.oracle_u[static_cast<size_t>(t)];
        acc += d * d;
        ++count;
    }
    outcome.modeling_rms = count > 0 ? std::sqrt(acc / count) : 0.0;
    return outcome;
}

namespace {

std::string loss_history_csv(const std::vector<double>& history) {
    std::string text = "iteration,loss";
    char buf[40];
    for (size_t i = 0; i < history.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "\n%zu,%.17g", i, history[i]);
        text += buf;
    }
    return text;
}

std::string tracking_csv(const EvaluateOutcome& outcome) {
    std::string text = "t,y_d,y_baseline,y_enhanced,u_dnn,u_oracle";
    char buf[200];
    const RunLog& base = outcome.eval.baseline;
    const RunLog& enh = outcome.eval.enhanced;
    for (int t = 0; t < base.size(); ++t) {
        const bool have = t < enh.size();
        std::snprintf(buf, sizeof(buf), "\n%d,%.17g,%.17g,%.17g,%.17g,%.17g", t,
                      outcome.y_d[t], base.y[t],
                      have ? enh.y[t] : std::nan(""),
                      have ? enh.u[t] : std::nan(""),
                      have ? outcome.oracle_u[static_cast<size_t>(t)] : std::nan(""));
        text += buf;
    }
    return text;
}

constexpr const char* kPlotScript = R"(# gnuplot script for the tracking comparison
set datafile separator ','
set key autotitle columnhead
set xlabel 't [steps]'
plot 'tracking.csv' using 1:2 with lines title 'y_d', \
     'tracking.csv' using 1:3 with lines title 'baseline y', \
     'tracking.csv' using 1:4 with lines title 'enhanced y'
pause -1
)";

template <typename Fn>
int guarded(std::ostream& out, Fn&& fn) {
    try {
        fn();
        return 0;
    } catch (const ConfigError& e) {
        out << "config error: " << e.what() << '\n';
        return 1;
    } catch (const ContractViolation& e) {
        out << "config error: " << e.what() << '\n';
        return 1;
    } catch (const TrainingDiverged& e) {
        out << "training failed: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace

int cmd_identify(ExperimentConfig cfg, std::ostream& out) {
    return guarded(out, [&]() {
        cfg.resolve();
        const BuiltSystem sys = build_system(cfg);
        SysIdReport report;
        if (sys.is_lti) {
            report = identify(sys.lti);
            // Cross-check the matrix-based delay against the step response.
            Trajectory step = Trajectory::constant(1.0, 64, sys.T);
            RunLog log = simulate(sys.lti, step, Eigen::VectorXd::Zero(sys.n));
            log.y_d = step;
            if (relative_degree_from_step(log) != report.relative_degree)
                out << "warning: step-response delay disagrees with the matrix test\n";
        } else {
            Trajectory step = Trajectory::constant(1.0, 800, sys.T);
            RunLog log = simulate(sys.nonlinear, step, Eigen::VectorXd::Zero(sys.n));
            log.y_d = step;
            report = identify_from_step(log);
        }
        const std::string json = report.to_json();
        write_text(cfg.out_dir + "/identify.json", json);
        out << json << '\n';
        if (!report.minimum_phase)
            out << "warning: non-minimum-phase zeros; the add-on approach will be ineffective\n";
        if (!report.difference_learning_eligible)
            out << "note: non-unity DC gain; difference learning is not applicable\n";
    });
}

int cmd_train(ExperimentConfig cfg, std::ostream& out) {
    return guarded(out, [&]() {
        cfg.resolve();
        fs::create_directories(cfg.out_dir);
        TrainOutcome outcome;
        try {
            outcome = train_pipeline(cfg);
        } catch (const TrainingDiverged& e) {
            // Keep what we have for post-mortem, then report failure.
            write_text(cfg.out_dir + "/loss_history.csv", loss_history_csv(e.loss_history));
            throw;
        }
        outcome.model.save_json(cfg.model_path);
        write_text(cfg.out_dir + "/loss_history.csv", loss_history_csv(outcome.loss_history));

        nlohmann::json report;
        report["config"] = nlohmann::json::parse(cfg.to_json());
        report["final_loss"] = outcome.final_loss;
        report["accepted_steps"] = outcome.loss_history.size() - 1;
        if (std::isfinite(outcome.holdout_loss)) report["holdout_loss"] = outcome.holdout_loss;
        report["notes"] = outcome.notes;
        write_text(cfg.out_dir + "/train_report.json", report.dump(2));

        out << "trained " << cfg.system << ": final loss " << outcome.final_loss << " after "
            << outcome.loss_history.size() - 1 << " accepted steps\n";
        for (const auto& note : outcome.notes) out << "note: " << note << '\n';
        out << "model: " << cfg.model_path << '\n';
    });
}

int cmd_evaluate(ExperimentConfig cfg, std::ostream& out) {
    return guarded(out, [&]() {
        cfg.resolve();
        fs::create_directories(cfg.out_dir);
        const FnnModel model = FnnModel::load_json(cfg.model_path);
        const EvaluateOutcome outcome = evaluate_pipeline(cfg, model);

        nlohmann::json report = nlohmann::json::parse(outcome.eval.report.to_json());
        report["config"] = nlohmann::json::parse(cfg.to_json());
        report["modeling_rms"] = outcome.modeling_rms;
        report["notes"] = aliasing_notes(cfg);
        write_text(cfg.out_dir + "/report.json", report.dump(2));
        write_text(cfg.out_dir + "/tracking.csv", tracking_csv(outcome));
        write_text(cfg.out_dir + "/plot.gp", kPlotScript);

        if (outcome.eval.report.diverged) {
            out << "enhanced run diverged at step " << outcome.eval.report.diverged_step
                << " (a valid outcome for non-minimum-phase baselines)\n";
        } else {
            out << "rms baseline " << outcome.eval.report.rms_baseline << ", enhanced "
                << outcome.eval.report.rms_enhanced << " ("
                << outcome.eval.report.reduction_percent << "% reduction), modeling rms "
                << outcome.modeling_rms << '\n';
        }
        out << "report: " << cfg.out_dir << "/report.json\n";
    });
}

namespace {

nlohmann::json reproduce_sim(const ExperimentConfig& base, std::ostream& out) {
    nlohmann::json composite;
    for (const std::string name : {"sim_stable", "sim_unstable"}) {
        ExperimentConfig cfg = base;
        cfg.system = name;
        cfg.out_dir = base.out_dir + "/" + name;
        cfg.model_path.clear();
        cfg.test_trajectory.clear();
        cfg.eval_steps = -1;
        cfg.resolve();
        fs::create_directories(cfg.out_dir);

        const TrainOutcome trained = train_pipeline(cfg);
        trained.model.save_json(cfg.model_path);
        write_text(cfg.out_dir + "/loss_history.csv", loss_history_csv(trained.loss_history));
        const EvaluateOutcome evaluated = evaluate_pipeline(cfg, trained.model);
        write_text(cfg.out_dir + "/tracking.csv", tracking_csv(evaluated));

        double max_abs_y_500 = 0.0;
        int first_above_1e3 = -1;
        for (int t = 0; t < evaluated.eval.enhanced.size(); ++t) {
            const double mag = std::abs(evaluated.eval.enhanced.y[t]);
            if (t < 500) max_abs_y_500 = std::max(max_abs_y_500, mag);
            if (first_above_1e3 < 0 && mag > 1e3) first_above_1e3 = t;
        }

        nlohmann::json entry;
        entry["config"] = nlohmann::json::parse(cfg.to_json());
        entry["final_loss"] = trained.final_loss;
        entry["modeling_rms"] = evaluated.modeling_rms;
        entry["report"] = nlohmann::json::parse(evaluated.eval.report.to_json());
        entry["max_abs_y_before_step_500"] = max_abs_y_500;
        entry["first_step_with_abs_y_above_1e3"] = first_above_1e3;
        entry["notes"] = trained.notes;
        composite[name] = entry;

        out << name << ": final loss " << trained.final_loss;
        if (evaluated.eval.report.diverged)
            out << ", diverged at step " << evaluated.eval.report.diverged_step << '\n';
        else
            out << ", tracking rms " << evaluated.eval.report.rms_enhanced << " ("
                << evaluated.eval.report.reduction_percent << "% reduction)" << '\n';
    }
    return composite;
}

// The study family adds symmetric level offsets to the sinusoids so the
// dataset is rich in near-steady rows at many absolute levels; that is what
// pins the learned map at zero difference features to the conditional mean.
std::vector<Trajectory> offset_sinusoid_family(double T, int steps) {
    std::vector<Trajectory> family;
    for (double offset : {-2.0, -1.0, 1.0, 2.0}) {
        for (Trajectory traj : sinusoid_family({1.0, 2.0}, {0.05, 0.15, 0.4}, T, steps)) {
            for (double& v : traj.values) v += offset;
            family.push_back(std::move(traj));
        }
    }
    return family;
}

nlohmann::json reproduce_diff_learning(const ExperimentConfig& base, std::ostream& out) {
    nlohmann::json composite;
    for (const std::string name : {"pendulum", "pendulum_scaled_gain"}) {
        ExperimentConfig cfg = base;
        cfg.system = name;
        cfg.out_dir = base.out_dir + "/" + name;
        cfg.model_path.clear();
        cfg.difference = 1;
        // Reconstructing u against the live output would close a high-gain
        // loop around the learned inverse and mask the DC-gain bias this
        // study is about; reference everything to the desired value instead.
        cfg.difference_reference = "desired_now";
        cfg.test_trajectory = "step";
        cfg.step_amplitude = 1.0;
        cfg.eval_steps = 1500;  // the bias-free loop settles through a slow crawl
        cfg.sample_period = -1.0;
        cfg.rows_per_trajectory = 300;
        // A small smooth net keeps the comparison about the training scheme:
        // high capacity only overfits the one-to-many residual that the
        // scaled system's dataset carries, with erratic local slopes.
        cfg.hidden_layers = {10};
        cfg.resolve();
        fs::create_directories(cfg.out_dir);

        const TrainOutcome trained = train_on_trajectories(
            cfg, offset_sinusoid_family(cfg.sample_period,
                                        to_int(cfg.steps_per_trajectory,
                                               "data.steps_per_trajectory")));
        trained.model.save_json(cfg.model_path);
        const EvaluateOutcome evaluated = evaluate_pipeline(cfg, trained.model);
        write_text(cfg.out_dir + "/tracking.csv", tracking_csv(evaluated));

        RunLog enhanced = evaluated.eval.enhanced;
        const double offset = step_steady_state_error(enhanced, 0.2);

        nlohmann::json entry;
        entry["config"] = nlohmann::json::parse(cfg.to_json());
        entry["final_loss"] = trained.final_loss;
        entry["step_steady_state_offset"] = offset;
        composite[name] = entry;
        out << name << ": difference-mode step offset " << offset << '\n';
    }
    const double unity = composite["pendulum"]["step_steady_state_offset"].get<double>();
    const double scaled =
        composite["pendulum_scaled_gain"]["step_steady_state_offset"].get<double>();
    composite["difference_learning_requires_unity_dc_gain"] = unity < 0.05 && scaled > 0.2;
    return composite;
}

nlohmann::json reproduce_feature_dim(const ExperimentConfig& base, std::ostream& out) {
    nlohmann::json composite;
    for (const std::string name : {"pendulum", "sim_stable"}) {
        ExperimentConfig cfg = base;
        cfg.system = name;
        cfg.sample_period = -1.0;
        cfg.difference = -1;
        cfg.resolve();
        const BuiltSystem sys = build_system(cfg);

        // Build both modes on a short baseline run and report the realized widths.
        Trajectory traj = sinusoid_family({1.0}, {0.2}, cfg.sample_period, 400).front();
        const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(sys.n);
        const RunLog log =
            sys.is_lti ? run_baseline(sys.lti, traj, x0) : run_baseline(sys.nonlinear, traj, x0);

        nlohmann::json entry;
        entry["n"] = sys.n;
        entry["r"] = sys.r;
        for (const auto mode : {FeatureMode::StateSpace, FeatureMode::TransferFunction}) {
            FeatureSpec spec;
            spec.mode = mode;
            spec.n = sys.n;
            spec.r = sys.r;
            const Dataset data = build_dataset(log, spec);
            const std::string label =
                mode == FeatureMode::StateSpace ? "state_space_width" : "transfer_function_width";
            entry[label] = data.input_dim();
        }
        composite[name] = entry;
        out << name << ": state-space width " << entry["state_space_width"]
            << " (n+1), transfer-function width " << entry["transfer_function_width"]
            << " (2n-r+1)\n";
    }
    return composite;
}

}  // namespace

int cmd_reproduce(const std::string& study, ExperimentConfig base, std::ostream& out) {
    return guarded(out, [&]() {
        base.resolve();
        fs::create_directories(base.out_dir);
        nlohmann::json composite;
        if (study == "sim")
            composite = reproduce_sim(base, out);
        else if (study == "diff_learning")
            composite = reproduce_diff_learning(base, out);
        else if (study == "feature_dim")
            composite = reproduce_feature_dim(base, out);
        else
            throw ConfigError("unknown study: " + study + " (expected sim|diff_learning|feature_dim)");
        write_text(base.out_dir + "/" + study + "_report.json", composite.dump(2));
        out << "report: " << base.out_dir << "/" << study << "_report.json\n";
    });
}

}  // namespace tracker
