#pragma once

#include "snodri/matrix.hpp"
#include "snodri/timeseries.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace snodri {

/// Layer sizes [d, hidden, 1, hidden, d]; tanh hidden and bottleneck, linear output.
struct NetworkSpec {
    std::size_t input_dim = 0;
    std::size_t hidden_width = 15;
    std::size_t bottleneck_width = 1;

    bool operator==(const NetworkSpec&) const = default;
    std::vector<std::size_t> layer_sizes() const {
        return {input_dim, hidden_width, bottleneck_width, hidden_width, input_dim};
    }
};

/// Four affine layers: w[l] maps layer l width to layer l+1 width.
struct NetworkWeights {
    std::vector<Matrix> w;
    std::vector<std::vector<double>> b;

    bool operator==(const NetworkWeights&) const = default;
};

struct TrainConfig {
    int epochs = 3000;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double huber_delta = 1.0;
    std::uint64_t seed = 0;

    bool operator==(const TrainConfig&) const = default;
};

struct TrainedEncoder {
    NetworkSpec spec;
    NetworkWeights weights;
    std::vector<std::string> column_ids;
    std::vector<ZScoreParams> column_params;
    std::vector<double> loss_history;  // mean loss at the start of each epoch
    TrainConfig config;
};

struct ForwardResult {
    Matrix reconstruction;  // rows x d
    Matrix bottleneck;      // rows x 1, values in (-1, 1)
};

/// Huber penalty of one residual: r^2/2 inside delta, delta*(|r| - delta/2) outside.
double huber_loss(double residual, double delta);

ForwardResult forward(const NetworkSpec& spec, const NetworkWeights& weights, const Matrix& batch,
                      Exec exec = Exec::parallel);

struct LossAndGradients {
    double loss = 0.0;
    NetworkWeights gradients;
};

/**
 * Mean Huber reconstruction loss over all rows x d residuals plus exact
 * backpropagated gradients for every weight and bias. Exposed so the
 * gradients can be checked against finite differences.
 */
LossAndGradients compute_loss_and_gradients(const NetworkSpec& spec,
                                            const NetworkWeights& weights, const Matrix& batch,
                                            double huber_delta, Exec exec = Exec::parallel);

/// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights and biases, layer by layer.
NetworkWeights init_weights(const NetworkSpec& spec, std::uint64_t seed);

/**
 * Full-batch Adam for cfg.epochs steps on the design matrix. The batch is
 * the whole dataset, so an epoch is one optimizer step; loss_history
 * records the pre-update loss of each epoch. Deterministic given seed.
 */
TrainedEncoder train_autoencoder(const DesignMatrix& data, const TrainConfig& cfg,
                                 Exec exec = Exec::parallel);

/**
 * Encoder half only (input through bottleneck). `data` must already be
 * standardized with the encoder's stored column parameters; columns far
 * from zero mean and unit spread trigger a warning, not an error.
 */
MonthlySeries encode(const TrainedEncoder& model, const DesignMatrix& data,
                     Exec exec = Exec::parallel);

/// JSON model document; load(save(m)) re-serializes bit-exactly.
void save_encoder(const TrainedEncoder& model, const std::filesystem::path& path);
std::string encoder_to_json(const TrainedEncoder& model);
TrainedEncoder load_encoder(const std::filesystem::path& path);
TrainedEncoder encoder_from_json(const std::string& text);

}  // namespace snodri
