#include "marsnet/mlp.hpp"

#include <cmath>
#include <random>
#include <utility>

#include <json.hpp>

namespace marsnet::neural {

MlpNetwork::MlpNetwork(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output)
    : sizes_(std::move(layer_sizes)), hidden_(hidden), output_(output) {
    if (sizes_.size() < 2) throw StructuralError("network needs at least an input and an output layer");
    for (auto s : sizes_)
        if (s == 0) throw StructuralError("layer sizes must be positive");
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        offsets_.push_back(offset);
        offset += sizes_[l + 1] * (sizes_[l] + 1);
    }
    params_.assign(offset, 0.0);
}

void MlpNetwork::set_params(std::span<const double> p) {
    if (p.size() != params_.size()) throw StructuralError("parameter vector has wrong length");
    params_.assign(p.begin(), p.end());
}

ForwardCache mlp_forward(const MlpNetwork& net, std::span<const double> input) {
    if (input.size() != net.n_inputs())
        throw StructuralError("input has " + std::to_string(input.size()) + " values, network expects " +
                              std::to_string(net.n_inputs()));
    const auto& sizes = net.layer_sizes();
    ForwardCache cache;
    cache.activations.reserve(sizes.size());
    cache.activations.emplace_back(input.begin(), input.end());
    for (std::size_t l = 0; l < net.depth(); ++l) {
        const auto& in = cache.activations.back();
        std::vector<double> out(sizes[l + 1]);
        const bool squash = net.activation(l) == Activation::LogSigmoid;
        for (std::size_t j = 0; j < out.size(); ++j) {
            double z = net.bias(l, j);
            for (std::size_t i = 0; i < in.size(); ++i) z += net.weight(l, j, i) * in[i];
            out[j] = squash ? logsig(z) : z;
        }
        cache.activations.push_back(std::move(out));
    }
    return cache;
}

std::vector<double> MlpNetwork::predict(std::span<const double> input) const {
    return mlp_forward(*this, input).activations.back();
}

std::vector<double> MlpNetwork::predict_batch(const Matrix& rows) const {
    if (n_outputs() != 1) throw StructuralError("predict_batch needs a single-output network");
    std::vector<double> out;
    out.reserve(rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i) out.push_back(predict(rows.row(i)).front());
    return out;
}

MlpNetwork init_weights(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed, Activation hidden,
                        Activation output) {
    MlpNetwork net(layer_sizes, hidden, output);
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < net.depth(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer_sizes[l]));
        std::uniform_real_distribution<double> draw(-bound, bound);
        const std::size_t begin = net.weight_offset(l);
        const std::size_t end = net.bias_offset(l) + layer_sizes[l + 1];
        for (std::size_t k = begin; k < end; ++k) net.params()[k] = draw(rng);
    }
    return net;
}

Matrix as_targets(std::span<const double> y) {
    Matrix Y(y.size(), 1);
    for (std::size_t i = 0; i < y.size(); ++i) Y(i, 0) = y[i];
    return Y;
}

namespace {

const char* activation_name(Activation a) { return a == Activation::LogSigmoid ? "logsig" : "linear"; }

Activation parse_activation(const std::string& s) {
    if (s == "logsig") return Activation::LogSigmoid;
    if (s == "linear") return Activation::Linear;
    throw StructuralError("unknown activation '" + s + "'");
}

}  // namespace

std::string MlpNetwork::to_json() const {
    using nlohmann::json;
    json layers = json::array();
    for (std::size_t l = 0; l < depth(); ++l) {
        const auto w0 = params_.begin() + static_cast<std::ptrdiff_t>(weight_offset(l));
        const auto b0 = params_.begin() + static_cast<std::ptrdiff_t>(bias_offset(l));
        const auto b1 = b0 + static_cast<std::ptrdiff_t>(sizes_[l + 1]);
        layers.push_back({{"weights", std::vector<double>(w0, b0)}, {"biases", std::vector<double>(b0, b1)}});
    }
    json j = {{"model", "mlp"},
              {"layer_sizes", sizes_},
              {"hidden_activation", activation_name(hidden_)},
              {"output_activation", activation_name(output_)},
              {"layers", std::move(layers)}};
    return j.dump(2);
}

MlpNetwork MlpNetwork::from_json(const std::string& text) {
    using nlohmann::json;
    try {
        const json j = json::parse(text);
        if (j.at("model") != "mlp") throw StructuralError("not a network document");
        MlpNetwork net(j.at("layer_sizes").get<std::vector<std::size_t>>(),
                       parse_activation(j.at("hidden_activation").get<std::string>()),
                       parse_activation(j.at("output_activation").get<std::string>()));
        const auto& layers = j.at("layers");
        if (layers.size() != net.depth()) throw StructuralError("layer count does not match layer_sizes");
        for (std::size_t l = 0; l < net.depth(); ++l) {
            const auto w = layers[l].at("weights").get<std::vector<double>>();
            const auto b = layers[l].at("biases").get<std::vector<double>>();
            if (w.size() != net.sizes_[l + 1] * net.sizes_[l] || b.size() != net.sizes_[l + 1])
                throw StructuralError("layer " + std::to_string(l) + " has the wrong shape");
            std::copy(w.begin(), w.end(), net.params_.begin() + static_cast<std::ptrdiff_t>(net.weight_offset(l)));
            std::copy(b.begin(), b.end(), net.params_.begin() + static_cast<std::ptrdiff_t>(net.bias_offset(l)));
        }
        return net;
    } catch (const json::exception& e) {
        throw StructuralError(std::string("malformed network JSON: ") + e.what());
    }
}

}  // namespace marsnet::neural
