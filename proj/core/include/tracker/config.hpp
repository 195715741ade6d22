#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace tracker {

/// Parsed value from the TOML-style experiment file. All numbers are doubles.
using ConfigValue = std::variant<double, bool, std::string, std::vector<double>>;

/// Minimal TOML-style reader: `key = value` lines, `[section]` headers that
/// prefix subsequent keys as `section.key`, `#` comments, numeric arrays in
/// brackets, quoted or bare strings, true/false booleans.
std::map<std::string, ConfigValue> parse_config_text(const std::string& text);
std::map<std::string, ConfigValue> parse_config_file(const std::string& path);

/// Fully resolved experiment description. Defaults depend on the selected
/// system; unknown keys in the file are an error.
struct ExperimentConfig {
    std::string system = "sim_stable";
    double gamma = 0.5;  // mismatch factor of pendulum_scaled_gain
    std::vector<double> custom_A, custom_b, custom_c;  // row-major A for system = "custom"
    double sample_period = -1.0;                       // <0 resolves per system
    std::string out_dir = "out";

    std::string feature_mode = "state_space";
    int difference = -1;  // -1 resolves per system (pendulum: on, sims: off)
    std::string difference_reference = "actual_now";

    std::vector<double> hidden_layers = {20, 20};
    std::string activation = "tanh";
    std::string trainer = "levenberg_marquardt";
    double max_iterations = 1000;
    double loss_tolerance = 1e-9;
    double lm_lambda_init = 1e-3;
    double lm_lambda_up = 10.0;
    double lm_lambda_down = 0.1;
    double seed = 1;
    double holdout_fraction = 0.0;
    double learning_rate = 1e-3;
    double momentum = 0.9;
    double batch_size = 64;

    std::vector<double> amplitudes = {1, 2, 3, 4, 5};
    std::vector<double> frequencies_hz = {0.024, 0.032, 0.048, 0.091, 1.000};
    double steps_per_trajectory = 1000;
    double rows_per_trajectory = 200;

    std::string test_trajectory;  // "", "step" or "custom" handled per system
    double eval_steps = -1;
    double step_amplitude = 1.0;
    std::string model_path;  // defaults to <out_dir>/model.json

    static ExperimentConfig from_map(const std::map<std::string, ConfigValue>& kv);
    static ExperimentConfig from_file(const std::string& path);

    /// Applies per-system defaults and checks invariants. Throws ConfigError.
    void resolve();

    std::string to_json() const;
};

}  // namespace tracker
