#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace tracker {

enum class Activation { Tanh, Relu, Linear };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Training rows: one sample per row of inputs/targets.
struct Dataset {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd targets;
    std::vector<std::string> feature_names;

    int rows() const { return static_cast<int>(inputs.rows()); }
    int input_dim() const { return static_cast<int>(inputs.cols()); }
    int target_dim() const { return static_cast<int>(targets.cols()); }

    void validate() const;  // equal row counts, finite entries

    /// CSV with feature_names as the header row and the target as the final
    /// column `target_u`.
    void write_csv(const std::string& path) const;
};

/// Fully connected feedforward network with per-feature z-score
/// standardization folded into the forward map. The standardization vectors
/// default to the identity so hand-built networks behave as plain layer
/// stacks; train() fits them to its dataset.
struct FnnModel {
    std::vector<int> layer_sizes;              // input dim, hidden..., output dim
    std::vector<Eigen::MatrixXd> weights;      // weights[l] is sizes[l+1] x sizes[l]
    std::vector<Eigen::VectorXd> biases;
    std::vector<Activation> activations;       // one per non-input layer; last must be Linear

    Eigen::VectorXd input_mean, input_std;
    Eigen::VectorXd target_mean, target_std;

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    int parameter_count() const;

    Eigen::VectorXd flatten_parameters() const;
    void set_parameters(const Eigen::VectorXd& theta);

    void validate() const;

    std::string to_json() const;
    void save_json(const std::string& path) const;
    static FnnModel from_json(const std::string& text);
    static FnnModel load_json(const std::string& path);
};

/// Zero-initialized network of the given shape (identity standardization).
FnnModel make_fnn(std::vector<int> layer_sizes, std::vector<Activation> activations);

/// Seeded scaled-uniform initialization: weights uniform in
/// +-sqrt(6/(fan_in+fan_out)), biases zero.
void initialize_weights(FnnModel& net, unsigned long long seed);

Eigen::VectorXd forward(const FnnModel& net, const Eigen::VectorXd& input);

/// Mean squared error (1/N) sum ||forward(x_i) - t_i||^2.
double mse_loss(const FnnModel& net, const Dataset& data);

/// Exact reverse-mode gradient of mse_loss with respect to the flattened
/// parameters.
Eigen::VectorXd gradient(const FnnModel& net, const Dataset& data);

/// Per-sample residual derivatives for scalar-output networks:
/// row i = d(forward(x_i) - t_i)/d(theta). gradient == (2/N) J^T residuals.
Eigen::MatrixXd jacobian(const FnnModel& net, const Dataset& data);

enum class Trainer { LevenbergMarquardt, FirstOrder };

struct TrainConfig {
    int max_iterations = 1000;
    double loss_tolerance = 1e-10;
    double lm_lambda_init = 1e-3;
    double lm_lambda_up = 10.0;
    double lm_lambda_down = 0.1;
    unsigned long long rng_seed = 1;
    Trainer trainer = Trainer::LevenbergMarquardt;
    double holdout_fraction = 0.0;  // 0 disables the holdout split

    // First-order fallback settings.
    double learning_rate = 1e-3;
    double momentum = 0.9;
    int batch_size = 64;

    void validate() const;
};

struct TrainResult {
    FnnModel model;
    std::vector<double> loss_history;  // initial loss plus every accepted step
    double holdout_loss = 0.0;         // NaN-free only when holdout_fraction > 0
};

/// Trains a copy of `net` on `data`. Standardization is recomputed from the
/// training split. Levenberg-Marquardt accepts only loss-decreasing steps;
/// throws TrainingDiverged when the damped normal equations stay singular
/// beyond lambda = 1e12. Deterministic for a fixed rng_seed.
TrainResult train(const FnnModel& net, const Dataset& data, const TrainConfig& cfg);

}  // namespace tracker
