#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace perfdiag {

enum class Activation { Tanh, Relu, Sigmoid, Linear };

std::string to_string(Activation activation);
Activation parse_activation(std::string_view text);

// Symmetric encoder/decoder stack. layer_sizes runs input..bottleneck..output
// with first == last == D; the activation applies to hidden layers, the
// output layer is always linear.
struct Topology {
    std::vector<std::size_t> layer_sizes;
    Activation activation = Activation::Tanh;

    std::size_t input_dim() const { return layer_sizes.empty() ? 0 : layer_sizes.front(); }
    void validate() const;

    // [D, ceil(D/2), ceil(D/4), ceil(D/2), D] with tanh hidden layers.
    static Topology default_for(std::size_t dim, Activation activation = Activation::Tanh);

    bool operator==(const Topology& other) const = default;
};

// Per-feature standardization fitted on training data. Zero-variance
// features keep stddev 1 and are flagged constant.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<bool> constant;

    std::size_t dimension() const { return mean.size(); }
    std::vector<double> standardize(std::span<const double> x) const;
    std::vector<double> destandardize(std::span<const double> x) const;

    static Scaler identity(std::size_t dim);

    bool operator==(const Scaler& other) const = default;
};

// Population mean/std per feature over >= 2 samples.
Scaler fit_scaler(const std::vector<std::vector<double>>& samples);

enum class OptimizerKind { Sgd, Adam };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view text);

struct TrainConfig {
    int epochs = 500;
    int batch_size = 32;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::Adam;
    std::uint64_t seed = 42;
    int early_stop_patience = 20;
    double validation_fraction = 0.1; // in [0, 0.5)

    void validate() const;
};

struct TrainingMeta {
    std::uint64_t seed = 0;
    int epochs_run = 0;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    // Mean squared reconstruction error over the training split after each
    // epoch. Not persisted in bundles.
    std::vector<double> loss_history;
};

struct AutoencoderModel {
    Topology topology;
    // weights[l]: layer_sizes[l+1] x layer_sizes[l], row-major
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    Scaler scaler;
    TrainingMeta meta;

    std::size_t dimension() const { return topology.input_dim(); }
};

// Seeded Glorot-uniform weights, zero biases, identity scaler.
AutoencoderModel init_model(const Topology& topology, std::uint64_t seed);

// Encoder+decoder evaluation on an already-standardized vector; no scaler.
std::vector<double> forward_scaled(const AutoencoderModel& model, std::span<const double> xs);

// Standardize, reconstruct, de-standardize.
std::vector<double> forward(const AutoencoderModel& model, std::span<const double> x);

// Euclidean norm of (standardized input - reconstruction) in standardized
// feature space; the anomaly score.
double reconstruction_error(const AutoencoderModel& model, std::span<const double> x);

struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

// Mean over the batch of the squared reconstruction error, computed in
// standardized space on pre-standardized inputs. When `gradients` is given
// it receives d(loss)/d(param) via backpropagation.
double batch_loss(const AutoencoderModel& model, const std::vector<std::vector<double>>& batch,
                  Gradients* gradients = nullptr);

// Minibatch training with seeded init/shuffling and optional early stop on
// a validation split. Deterministic for a fixed config.
AutoencoderModel train(const std::vector<std::vector<double>>& samples, const Topology& topology,
                       const TrainConfig& config);

// Compares backpropagation against central finite differences (h = 1e-5)
// on seeded random weights and inputs; returns the max guarded relative
// error |a - n| / max(1e-2, |a| + |n|) over all parameters. Relu nets
// re-sample inputs that land near an activation kink.
double gradient_check(const Topology& topology, std::uint64_t seed);

} // namespace perfdiag
