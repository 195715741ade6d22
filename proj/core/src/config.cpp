#include "tracker/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tracker/errors.hpp"

namespace tracker {

namespace {

std::string trim(const std::string& s) {
    size_t begin = 0, end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

ConfigValue parse_value(const std::string& raw, int line_no) {
    const std::string v = trim(raw);
    if (v.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty value");
    if (v == "true") return true;
    if (v == "false") return false;
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw ConfigError("line " + std::to_string(line_no) + ": unterminated string");
        return v.substr(1, v.size() - 2);
    }
    if (v.front() == '[') {
        if (v.back() != ']')
            throw ConfigError("line " + std::to_string(line_no) + ": unterminated array");
        std::vector<double> values;
        std::stringstream body(v.substr(1, v.size() - 2));
        std::string cell;
        while (std::getline(body, cell, ',')) {
            const std::string entry = trim(cell);
            if (entry.empty()) continue;
            try {
                size_t used = 0;
                values.push_back(std::stod(entry, &used));
                if (used != entry.size()) throw std::invalid_argument(entry);
            } catch (const std::exception&) {
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": array entries must be numbers");
            }
        }
        return values;
    }
    try {
        size_t used = 0;
        const double num = std::stod(v, &used);
        if (used == v.size()) return num;
    } catch (const std::exception&) {
    }
    return v;  // bare string
}

}  // namespace

std::map<std::string, ConfigValue> parse_config_text(const std::string& text) {
    std::map<std::string, ConfigValue> kv;
    std::stringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        kv[full] = parse_value(line.substr(eq + 1), line_no);
    }
    return kv;
}

std::map<std::string, ConfigValue> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

namespace {

class Binder {
public:
    explicit Binder(const std::map<std::string, ConfigValue>& kv) : kv_(kv) {}

    void number(const std::string& key, double& target) {
        bind(key, [&target, key](const ConfigValue& v) {
            if (const double* num = std::get_if<double>(&v)) {
                target = *num;
                return;
            }
            throw ConfigError(key + ": expected a number");
        });
    }
    void text(const std::string& key, std::string& target) {
        bind(key, [&target, key](const ConfigValue& v) {
            if (const std::string* s = std::get_if<std::string>(&v)) {
                target = *s;
                return;
            }
            throw ConfigError(key + ": expected a string");
        });
    }
    void flag(const std::string& key, int& target) {
        bind(key, [&target, key](const ConfigValue& v) {
            if (const bool* b = std::get_if<bool>(&v)) {
                target = *b ? 1 : 0;
                return;
            }
            throw ConfigError(key + ": expected true or false");
        });
    }
    void array(const std::string& key, std::vector<double>& target) {
        bind(key, [&target, key](const ConfigValue& v) {
            if (const auto* arr = std::get_if<std::vector<double>>(&v)) {
                target = *arr;
                return;
            }
            throw ConfigError(key + ": expected a numeric array");
        });
    }

    void finish() const {
        for (const auto& [key, value] : kv_)
            if (!seen_.contains(key)) throw ConfigError("unknown config key: " + key);
    }

private:
    void bind(const std::string& key, const std::function<void(const ConfigValue&)>& apply) {
        seen_.insert({key});
        const auto it = kv_.find(key);
        if (it != kv_.end()) apply(it->second);
    }

    const std::map<std::string, ConfigValue>& kv_;
    std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig ExperimentConfig::from_map(const std::map<std::string, ConfigValue>& kv) {
    ExperimentConfig cfg;
    Binder bind(kv);
    bind.text("system", cfg.system);
    bind.number("gamma", cfg.gamma);
    bind.array("A", cfg.custom_A);
    bind.array("b", cfg.custom_b);
    bind.array("c", cfg.custom_c);
    bind.number("sample_period", cfg.sample_period);
    bind.text("out_dir", cfg.out_dir);

    bind.text("features.mode", cfg.feature_mode);
    bind.flag("features.difference", cfg.difference);
    bind.text("features.difference_reference", cfg.difference_reference);

    bind.array("training.hidden_layers", cfg.hidden_layers);
    bind.text("training.activation", cfg.activation);
    bind.text("training.trainer", cfg.trainer);
    bind.number("training.max_iterations", cfg.max_iterations);
    bind.number("training.loss_tolerance", cfg.loss_tolerance);
    bind.number("training.lm_lambda_init", cfg.lm_lambda_init);
    bind.number("training.lm_lambda_up", cfg.lm_lambda_up);
    bind.number("training.lm_lambda_down", cfg.lm_lambda_down);
    bind.number("training.seed", cfg.seed);
    bind.number("training.holdout_fraction", cfg.holdout_fraction);
    bind.number("training.learning_rate", cfg.learning_rate);
    bind.number("training.momentum", cfg.momentum);
    bind.number("training.batch_size", cfg.batch_size);

    bind.array("data.amplitudes", cfg.amplitudes);
    bind.array("data.frequencies_hz", cfg.frequencies_hz);
    bind.number("data.steps_per_trajectory", cfg.steps_per_trajectory);
    bind.number("data.rows_per_trajectory", cfg.rows_per_trajectory);

    bind.text("evaluate.trajectory", cfg.test_trajectory);
    bind.number("evaluate.steps", cfg.eval_steps);
    bind.number("evaluate.step_amplitude", cfg.step_amplitude);
    bind.text("evaluate.model", cfg.model_path);
    bind.finish();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    return from_map(parse_config_file(path));
}

void ExperimentConfig::resolve() {
    const bool pendulum = system == "pendulum" || system == "pendulum_scaled_gain";
    if (system != "sim_stable" && system != "sim_unstable" && !pendulum && system != "custom")
        throw ConfigError("unknown system: " + system);
    if (system == "custom" &&
        (custom_A.empty() || custom_b.empty() || custom_c.empty()))
        throw ConfigError("custom system needs A, b and c");
    if (sample_period < 0.0) sample_period = pendulum ? 0.02 : 1.0;
    if (difference < 0) difference = pendulum ? 1 : 0;
    if (feature_mode != "state_space" && feature_mode != "transfer_function")
        throw ConfigError("features.mode must be state_space or transfer_function");
    if (difference_reference != "actual_now" && difference_reference != "desired_now")
        throw ConfigError("features.difference_reference must be actual_now or desired_now");
    if (trainer != "levenberg_marquardt" && trainer != "first_order")
        throw ConfigError("training.trainer must be levenberg_marquardt or first_order");
    if (amplitudes.empty()) throw ConfigError("data.amplitudes must be nonempty");
    if (frequencies_hz.empty()) throw ConfigError("data.frequencies_hz must be nonempty");
    if (steps_per_trajectory < 16) throw ConfigError("data.steps_per_trajectory too small");
    if (rows_per_trajectory < 1) throw ConfigError("data.rows_per_trajectory must be positive");
    if (hidden_layers.empty()) throw ConfigError("training.hidden_layers must be nonempty");
    for (double h : hidden_layers)
        if (h < 1 || h != std::floor(h)) throw ConfigError("training.hidden_layers must be positive integers");
    if (eval_steps < 0)
        eval_steps = pendulum ? 1000 : 600;
    if (model_path.empty()) model_path = out_dir + "/model.json";
}

std::string ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["system"] = system;
    j["gamma"] = gamma;
    j["sample_period"] = sample_period;
    j["out_dir"] = out_dir;
    if (system == "custom") {
        j["A"] = custom_A;
        j["b"] = custom_b;
        j["c"] = custom_c;
    }
    j["features"] = {{"mode", feature_mode},
                     {"difference", difference == 1},
                     {"difference_reference", difference_reference}};
    j["training"] = {{"hidden_layers", hidden_layers},
                     {"activation", activation},
                     {"trainer", trainer},
                     {"max_iterations", max_iterations},
                     {"loss_tolerance", loss_tolerance},
                     {"lm_lambda_init", lm_lambda_init},
                     {"lm_lambda_up", lm_lambda_up},
                     {"lm_lambda_down", lm_lambda_down},
                     {"seed", seed},
                     {"holdout_fraction", holdout_fraction},
                     {"learning_rate", learning_rate},
                     {"momentum", momentum},
                     {"batch_size", batch_size}};
    j["data"] = {{"amplitudes", amplitudes},
                 {"frequencies_hz", frequencies_hz},
                 {"steps_per_trajectory", steps_per_trajectory},
                 {"rows_per_trajectory", rows_per_trajectory}};
    j["evaluate"] = {{"trajectory", test_trajectory},
                     {"steps", eval_steps},
                     {"step_amplitude", step_amplitude},
                     {"model", model_path}};
    return j.dump(2);
}

}  // namespace tracker
