// Batch loss and gradient kernels. The serial path is the reference; the parallel path
// partitions samples into fixed blocks so the summation tree is independent of how many
// threads run it.

#include <vector>

#include "marsnet/mlp.hpp"

namespace marsnet::neural {
namespace {

void check_batch(const MlpNetwork& net, const Matrix& X, const Matrix& Y) {
    if (X.rows() != Y.rows()) throw StructuralError("inputs and targets have different row counts");
    if (X.rows() == 0) throw DomainError("empty training batch");
    if (X.cols() != net.n_inputs()) throw StructuralError("input width does not match network");
    if (Y.cols() != net.n_outputs()) throw StructuralError("target width does not match network");
}

double sample_error(const MlpNetwork& net, std::span<const double> x, std::span<const double> y) {
    const auto cache = mlp_forward(net, x);
    double e = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double r = cache.output()[k] - y[k];
        e += r * r;
    }
    return e;
}

// Adds d(squared error)/d(params) for one sample into `acc`; returns the squared error.
double sample_gradient(const MlpNetwork& net, std::span<const double> x, std::span<const double> y,
                       std::span<double> acc) {
    const auto cache = mlp_forward(net, x);
    const auto& sizes = net.layer_sizes();
    const std::size_t depth = net.depth();

    std::vector<double> delta(sizes.back());
    double e = 0.0;
    for (std::size_t k = 0; k < delta.size(); ++k) {
        const double a = cache.output()[k];
        const double r = a - y[k];
        e += r * r;
        delta[k] = 2.0 * r * (net.activation(depth - 1) == Activation::LogSigmoid ? a * (1.0 - a) : 1.0);
    }

    for (std::size_t l = depth; l-- > 0;) {
        const auto& in = cache.activations[l];
        const std::size_t w0 = net.weight_offset(l);
        const std::size_t b0 = net.bias_offset(l);
        for (std::size_t j = 0; j < sizes[l + 1]; ++j) {
            double* row = acc.data() + w0 + j * sizes[l];
            for (std::size_t i = 0; i < sizes[l]; ++i) row[i] += delta[j] * in[i];
            acc[b0 + j] += delta[j];
        }
        if (l == 0) break;
        std::vector<double> prev(sizes[l], 0.0);
        for (std::size_t j = 0; j < sizes[l + 1]; ++j)
            for (std::size_t i = 0; i < sizes[l]; ++i) prev[i] += net.weight(l, j, i) * delta[j];
        if (net.activation(l - 1) == Activation::LogSigmoid)
            for (std::size_t i = 0; i < prev.size(); ++i) prev[i] *= in[i] * (1.0 - in[i]);
        delta = std::move(prev);
    }
    return e;
}

// Pairwise combination of block partials in a fixed order; the total ends in element 0.
void pairwise_reduce(std::vector<double>& errors) {
    for (std::size_t stride = 1; stride < errors.size(); stride *= 2)
        for (std::size_t i = 0; i + stride < errors.size(); i += 2 * stride) errors[i] += errors[i + stride];
}

void pairwise_reduce(std::vector<std::vector<double>>& parts) {
    for (std::size_t stride = 1; stride < parts.size(); stride *= 2)
        for (std::size_t i = 0; i + stride < parts.size(); i += 2 * stride) {
            auto& dst = parts[i];
            const auto& src = parts[i + stride];
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
        }
}

std::size_t block_count(std::size_t n) { return (n + kGradientBlock - 1) / kGradientBlock; }

}  // namespace

double mlp_loss(const MlpNetwork& net, const Matrix& X, const Matrix& Y, Execution execution) {
    check_batch(net, X, Y);
    const std::size_t n = X.rows();
    if (execution == Execution::Serial) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += sample_error(net, X.row(i), Y.row(i));
        return sum / static_cast<double>(n);
    }
    const std::size_t blocks = block_count(n);
    std::vector<double> errors(blocks, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kGradientBlock;
        const std::size_t hi = std::min(n, lo + kGradientBlock);
        double sum = 0.0;
        for (std::size_t i = lo; i < hi; ++i) sum += sample_error(net, X.row(i), Y.row(i));
        errors[static_cast<std::size_t>(b)] = sum;
    }
    pairwise_reduce(errors);
    return errors[0] / static_cast<double>(n);
}

double mlp_loss(const MlpNetwork& net, const Matrix& X, std::span<const double> y, Execution execution) {
    return mlp_loss(net, X, as_targets(y), execution);
}

double loss_and_gradient(const MlpNetwork& net, const Matrix& X, const Matrix& Y, std::span<double> gradient,
                         Execution execution) {
    check_batch(net, X, Y);
    if (gradient.size() != net.n_params()) throw StructuralError("gradient buffer has wrong length");
    const std::size_t n = X.rows();
    const double scale = 1.0 / static_cast<double>(n);

    if (execution == Execution::Serial) {
        std::fill(gradient.begin(), gradient.end(), 0.0);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += sample_gradient(net, X.row(i), Y.row(i), gradient);
        for (auto& g : gradient) g *= scale;
        return sum * scale;
    }

    const std::size_t blocks = block_count(n);
    std::vector<std::vector<double>> parts(blocks, std::vector<double>(net.n_params(), 0.0));
    std::vector<double> errors(blocks, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
        const auto bi = static_cast<std::size_t>(b);
        const std::size_t lo = bi * kGradientBlock;
        const std::size_t hi = std::min(n, lo + kGradientBlock);
        double sum = 0.0;
        for (std::size_t i = lo; i < hi; ++i) sum += sample_gradient(net, X.row(i), Y.row(i), parts[bi]);
        errors[bi] = sum;
    }
    pairwise_reduce(parts);
    pairwise_reduce(errors);
    for (std::size_t k = 0; k < gradient.size(); ++k) gradient[k] = parts[0][k] * scale;
    return errors[0] * scale;
}

std::vector<double> backprop_gradient(const MlpNetwork& net, const Matrix& X, std::span<const double> y,
                                      Execution execution) {
    std::vector<double> g(net.n_params());
    loss_and_gradient(net, X, as_targets(y), g, execution);
    return g;
}

}  // namespace marsnet::neural
