#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tracker/commands.hpp"
#include "tracker/config.hpp"
#include "tracker/errors.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    double seed = -1.0;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Experiment config file (TOML-style key = value)");
    cmd->add_option("--seed", args.seed, "Override the training seed");
    cmd->add_option("--out", args.out_dir, "Output directory (default: out)");
}

tracker::ExperimentConfig load(const CommonArgs& args) {
    tracker::ExperimentConfig cfg;
    if (!args.config_path.empty())
        cfg = tracker::ExperimentConfig::from_file(args.config_path);
    if (args.seed >= 0.0) cfg.seed = args.seed;
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    // An unset evaluate.model resolves to <out>/model.json after overrides.
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DNN-enhanced tracking toolkit: identification, inverse-dynamics training and "
                 "closed-loop evaluation for discrete-time SISO baselines"};
    app.require_subcommand(1);

    CommonArgs identify_args, train_args, evaluate_args, reproduce_args;
    std::string study;

    CLI::App* identify = app.add_subcommand(
        "identify", "Relative degree, DC gain, zeros and difference-learning eligibility");
    add_common(identify, identify_args);

    CLI::App* train = app.add_subcommand(
        "train", "Generate the sinusoid family, build the dataset and train the add-on network");
    add_common(train, train_args);

    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "Run baseline and enhanced loops on the test trajectory and emit reports");
    add_common(evaluate, evaluate_args);

    CLI::App* reproduce =
        app.add_subcommand("reproduce", "Canned studies: sim | diff_learning | feature_dim");
    reproduce->add_option("study", study, "Which study to run")->required();
    add_common(reproduce, reproduce_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (identify->parsed()) return tracker::cmd_identify(load(identify_args), std::cout);
        if (train->parsed()) return tracker::cmd_train(load(train_args), std::cout);
        if (evaluate->parsed()) return tracker::cmd_evaluate(load(evaluate_args), std::cout);
        if (reproduce->parsed())
            return tracker::cmd_reproduce(study, load(reproduce_args), std::cout);
    } catch (const tracker::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
