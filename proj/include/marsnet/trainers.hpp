#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "marsnet/matrix.hpp"
#include "marsnet/mlp.hpp"

namespace marsnet::neural {

/// A differentiable scalar function of a parameter vector.
class Objective {
public:
    virtual ~Objective() = default;
    virtual std::size_t size() const = 0;
    virtual double value(std::span<const double> w) = 0;
    /// Writes the gradient into `gradient` and returns the value.
    virtual double value_and_gradient(std::span<const double> w, std::span<double> gradient) = 0;
};

/// Batch MSE of a network on fixed data, as a function of its parameters.
class NetworkObjective final : public Objective {
public:
    NetworkObjective(MlpNetwork net, Matrix X, Matrix Y, Execution execution = Execution::Parallel);

    std::size_t size() const override { return net_.n_params(); }
    double value(std::span<const double> w) override;
    double value_and_gradient(std::span<const double> w, std::span<double> gradient) override;

private:
    MlpNetwork net_;
    Matrix X_;
    Matrix Y_;
    Execution execution_;
};

struct StopCriteria {
    std::size_t epochs = 600;
    double gradient_floor = 1e-8;  // on the Euclidean norm
    double mse_floor = 1e-12;
};

struct GdConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    StopCriteria stop;
    void validate() const;
};

enum class BetaVariant { FletcherReeves, PolakRibiere };

struct CgConfig {
    BetaVariant beta = BetaVariant::FletcherReeves;
    /// Line search stops when the bracket is narrower than this fraction of the step.
    double line_tolerance = 1e-4;
    std::size_t line_max_evaluations = 20;
    StopCriteria stop;
};

struct ScgConfig {
    double sigma = 1e-4;
    double lambda_initial = 1e-6;
    double lambda_max = 1e25;
    StopCriteria stop;
};

/// Working state of scaled conjugate gradient between iterations.
struct ScgState {
    std::vector<double> direction;  // p
    std::vector<double> residual;   // r = -gradient
    double lambda = 0.0;
    double lambda_bar = 0.0;
    bool success = true;
    double comparison = 0.0;        // Delta
    double curvature = 0.0;         // delta
};

enum class Termination { EpochLimit, GradientFloor, MseFloor, Stalled };

std::string to_string(Termination t);

struct TrainReport {
    /// Training MSE after each epoch.
    std::vector<double> mse;
    std::size_t epochs = 0;
    Termination termination = Termination::EpochLimit;
    std::size_t gradient_evaluations = 0;
    std::size_t function_evaluations = 0;
    /// Per epoch: whether the step moved the weights.
    std::vector<bool> accepted;
    /// (epoch, mse) rows.
    std::string to_csv() const;
};

/// Passed to an optional observer after every epoch.
struct IterationInfo {
    std::size_t epoch = 0;
    std::span<const double> weights;
    std::span<const double> direction;  // direction used this epoch (empty for gradient descent)
    double loss = 0.0;
    bool accepted = true;
    double lambda = 0.0;                // SCG only
};

using Observer = std::function<void(const IterationInfo&)>;

/// Batch gradient descent with momentum: dw(n) = -lr * grad E + momentum * dw(n-1).
TrainReport gd_minimize(Objective& f, std::vector<double>& w, const GdConfig& config, const Observer& observe = {});

/// Nonlinear conjugate gradient with a Brent line search along each direction.
TrainReport cg_minimize(Objective& f, std::vector<double>& w, const CgConfig& config, const Observer& observe = {});

/// Scaled conjugate gradient: no line search, two gradient evaluations per epoch.
TrainReport scg_minimize(Objective& f, std::vector<double>& w, const ScgConfig& config,
                         const Observer& observe = {});

TrainReport gd_train(MlpNetwork& net, const Matrix& X, std::span<const double> y, const GdConfig& config);
TrainReport cg_train(MlpNetwork& net, const Matrix& X, std::span<const double> y, const CgConfig& config);
TrainReport scg_train(MlpNetwork& net, const Matrix& X, std::span<const double> y, const ScgConfig& config);

}  // namespace marsnet::neural
