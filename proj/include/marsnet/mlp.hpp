#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "marsnet/matrix.hpp"
#include "marsnet/parallel.hpp"

namespace marsnet::neural {

enum class Activation { LogSigmoid, Linear };

inline double logsig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Fully connected feedforward network. Parameters live in one flat vector laid out
/// layer by layer: the (out x in) weight matrix row-major, then the out biases.
class MlpNetwork {
public:
    MlpNetwork() = default;
    /// All parameters zero.
    explicit MlpNetwork(std::vector<std::size_t> layer_sizes, Activation hidden = Activation::LogSigmoid,
                        Activation output = Activation::Linear);

    const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
    std::size_t n_inputs() const noexcept { return sizes_.front(); }
    std::size_t n_outputs() const noexcept { return sizes_.back(); }
    /// Number of weight layers.
    std::size_t depth() const noexcept { return sizes_.size() - 1; }
    std::size_t n_params() const noexcept { return params_.size(); }
    Activation hidden_activation() const noexcept { return hidden_; }
    Activation output_activation() const noexcept { return output_; }
    Activation activation(std::size_t layer) const noexcept { return layer + 1 == depth() ? output_ : hidden_; }

    std::span<double> params() noexcept { return params_; }
    std::span<const double> params() const noexcept { return params_; }
    void set_params(std::span<const double> p);

    double& weight(std::size_t layer, std::size_t out, std::size_t in) {
        return params_[offsets_[layer] + out * sizes_[layer] + in];
    }
    double weight(std::size_t layer, std::size_t out, std::size_t in) const {
        return params_[offsets_[layer] + out * sizes_[layer] + in];
    }
    double& bias(std::size_t layer, std::size_t out) { return params_[bias_offset(layer) + out]; }
    double bias(std::size_t layer, std::size_t out) const { return params_[bias_offset(layer) + out]; }
    std::size_t weight_offset(std::size_t layer) const noexcept { return offsets_[layer]; }
    std::size_t bias_offset(std::size_t layer) const noexcept {
        return offsets_[layer] + sizes_[layer + 1] * sizes_[layer];
    }

    std::vector<double> predict(std::span<const double> input) const;
    /// Single-output convenience over every row.
    std::vector<double> predict_batch(const Matrix& rows) const;

    std::string to_json() const;
    static MlpNetwork from_json(const std::string& text);

    friend bool operator==(const MlpNetwork&, const MlpNetwork&) = default;

private:
    std::vector<std::size_t> sizes_;
    Activation hidden_ = Activation::LogSigmoid;
    Activation output_ = Activation::Linear;
    std::vector<std::size_t> offsets_;
    std::vector<double> params_;
};

/// Per-layer activations from a forward pass; activations[0] is the input.
struct ForwardCache {
    std::vector<std::vector<double>> activations;
    const std::vector<double>& output() const { return activations.back(); }
};

ForwardCache mlp_forward(const MlpNetwork& net, std::span<const double> input);

/// Reproducible uniform draws in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for every weight and bias.
MlpNetwork init_weights(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed,
                        Activation hidden = Activation::LogSigmoid, Activation output = Activation::Linear);

/// Targets for a training batch: one row per sample, one column per output.
Matrix as_targets(std::span<const double> y);

/// E = (1/N) sum_n sum_k (yhat_nk - y_nk)^2.
double mlp_loss(const MlpNetwork& net, const Matrix& X, const Matrix& Y, Execution execution = Execution::Parallel);
double mlp_loss(const MlpNetwork& net, const Matrix& X, std::span<const double> y,
                Execution execution = Execution::Parallel);

/// Loss and its gradient with respect to every parameter, in params() order.
///
/// Serial accumulates sample by sample. Parallel splits the batch into fixed blocks of
/// kGradientBlock samples and adds the block sums pairwise in a fixed order, so its
/// result does not depend on the thread count (it can differ from Serial in the last
/// bits).
double loss_and_gradient(const MlpNetwork& net, const Matrix& X, const Matrix& Y, std::span<double> gradient,
                         Execution execution = Execution::Parallel);

inline constexpr std::size_t kGradientBlock = 32;

std::vector<double> backprop_gradient(const MlpNetwork& net, const Matrix& X, std::span<const double> y,
                                      Execution execution = Execution::Parallel);

}  // namespace marsnet::neural
