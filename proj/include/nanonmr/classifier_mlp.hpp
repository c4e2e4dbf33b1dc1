#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nanonmr/dataset.hpp"

namespace nanonmr {

enum class InputEncoding { zero_one, plus_minus };
enum class Optimizer { momentum, adam };

// Feed-forward fully connected network, ReLU hidden layers and a single
// sigmoid output. Weight matrices are stored flat with shape
// [n_in, n_out] (input-major), so weights[l][in * n_out + out].
struct MLPModel {
    std::vector<std::size_t> layer_sizes;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    InputEncoding input_encoding = InputEncoding::zero_one;

    void validate() const;
};

std::size_t param_count(const MLPModel& model);

// Weights drawn Normal(0, 1/fan_in) (standard deviation 1/sqrt(fan_in)),
// biases zero; layer_sizes.front() is the input width, layer_sizes.back()
// must be 1.
MLPModel init_mlp(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed);

// The benchmark architecture: n_input -> 20 -> 35 -> 1.
MLPModel init_default_mlp(std::size_t n_input, std::uint64_t seed);

double forward_mlp(const MLPModel& model, std::span<const double> x);
double forward_mlp(const MLPModel& model, const std::vector<std::uint8_t>& bits);

// Mean of squared score-target differences; rejects empty input.
double mse_loss(std::span<const double> scores, std::span<const double> targets);

struct MLPGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

// Exact MSE gradients over the batch (mean reduction). The ReLU subgradient
// at exactly 0 is 0.
MLPGradients mlp_gradients(const MLPModel& model, std::span<const std::vector<double>> inputs,
                           std::span<const double> targets);

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 64;
    std::size_t max_epochs = 200;
    std::size_t early_stop_patience = 20;
    std::uint64_t init_seed = 1;
    std::uint64_t shuffle_seed = 2;  // validation split and batch order
    double validation_fraction = 0.1;
    Optimizer optimizer = Optimizer::adam;
    double momentum = 0.9;  // used by Optimizer::momentum
    InputEncoding input_encoding = InputEncoding::zero_one;
    std::vector<std::size_t> hidden_sizes{20, 35};

    void validate() const;
};

struct TrainHistory {
    std::vector<double> train_loss;  // per epoch, mean over batches
    std::vector<double> val_loss;    // per epoch
    std::size_t best_epoch = 0;      // 1-based epoch of the returned model
};

struct TrainResult {
    MLPModel model;
    TrainHistory history;
};

// Mini-batch MSE training with early stopping on a stratified validation
// split; returns the best-validation snapshot. Deterministic given the two
// seeds. Throws (naming the epoch) if the loss diverges to NaN.
TrainResult train_mlp(const Dataset& train_ds, const TrainConfig& cfg);

struct ScoreDecision {
    int label = 0;
    double score = 0.0;
};

// Threshold at 0.5; a score of exactly 0.5 maps to label 1.
ScoreDecision classify_mlp(const MLPModel& model, const std::vector<std::uint8_t>& bits);

// Checkpoint: JSON with layer sizes, flat weight/bias arrays and the
// training configuration; doubles round-trip exactly.
void save_checkpoint(const MLPModel& model, const TrainConfig& cfg, const std::string& path);
struct Checkpoint {
    MLPModel model;
    TrainConfig config;
};
Checkpoint load_checkpoint(const std::string& path);

// Logistic regression on the raw bits (no interaction terms), trained
// full-batch from a zero initialization.
struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
};

struct LinearTrainConfig {
    double learning_rate = 0.05;
    std::size_t max_iters = 300;
};

LinearModel train_linear_baseline(const Dataset& train_ds, const LinearTrainConfig& cfg = {});
ScoreDecision classify_linear(const LinearModel& model, const std::vector<std::uint8_t>& bits);

}  // namespace nanonmr
