#pragma once

// Small binary classifiers trained from scratch: logistic regression or a
// rectifier MLP with one sigmoid output q = P(y = 1). Labels follow the
// positive = 0 convention, so the positive-class probability recorded in
// score traces is p = 1 - q.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trendpu/matrix.hpp"

namespace trendpu {

struct ModelSpec {
    std::size_t input_dim = 1;
    std::vector<std::size_t> hidden_dims;  // empty -> logistic regression

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct DenseLayer {
    Matrix weights;  // out x in
    std::vector<double> bias;

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct ModelParams {
    ModelSpec spec;
    std::vector<DenseLayer> layers;  // hidden layers followed by the 1-unit output layer

    std::size_t parameter_count() const noexcept;

    /// Flat views in a fixed order (per layer: weights then bias).
    std::vector<double> flatten() const;
    void assign_flat(std::span<const double> flat);

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Gradients share the parameter layout.
using Gradients = ModelParams;

inline constexpr double kLogClip = 1e-7;

/// Zero-filled parameters of the right shapes.
ModelParams zero_params(const ModelSpec& spec);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
ModelParams init_params(const ModelSpec& spec, std::uint64_t seed);

/// q = P(y = 1 | x), strictly inside (0, 1) for finite parameters.
double forward(const ModelParams& params, std::span<const double> x);

/// Positive-class probabilities p = 1 - q, one per row.
std::vector<double> predict_scores(const ModelParams& params, const Matrix& features);

/// Binary cross-entropy with q clamped to [kLogClip, 1 - kLogClip].
double cross_entropy(double q, int y);

/// Weighted cross-entropy sum_i w_i * CE(q_i, y_i) and, optionally, its gradient.
/// Gradients use the unclamped q.
double weighted_loss(const ModelParams& params, const Matrix& features, std::span<const int> targets,
                     std::span<const double> weights, Gradients* grad = nullptr);

/// Resampling loss: mean CE of positives against label 0 plus mean CE of
/// unlabeled rows against label 1.
double batch_loss(const ModelParams& params, const Matrix& positive_batch, const Matrix& unlabeled_batch);

Gradients backward(const ModelParams& params, const Matrix& positive_batch, const Matrix& unlabeled_batch);

/// batch_loss and backward from a single pass.
double batch_loss_and_gradient(const ModelParams& params, const Matrix& positive_batch, const Matrix& unlabeled_batch,
                               Gradients& grad);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    Gradients first_moment;
    Gradients second_moment;
    std::uint64_t step = 0;
};

AdamState make_adam_state(const ModelParams& params, const AdamConfig& config);

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state);

void save_checkpoint(const ModelParams& params, std::ostream& out);
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(std::istream& in);
ModelParams load_checkpoint(const std::string& path);

}  // namespace trendpu
