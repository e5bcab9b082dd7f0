#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "marsnet/mars_fit.hpp"
#include "marsnet/mlp.hpp"
#include "marsnet/parallel.hpp"
#include "marsnet/timeseries.hpp"
#include "marsnet/trainers.hpp"

namespace marsnet::bench {

enum class Trainer { Gd, Cg, Scg };

struct SynthSource {
    std::size_t years = 87;
    std::uint64_t seed = 7;
    double sigma = 0.3;
};

struct BenchConfig {
    std::optional<std::filesystem::path> data;  // CSV input; synthetic series when unset
    SynthSource synth;
    std::size_t train_years = 40;
    std::size_t n_lags = 12;
    timeseries::Standardization standardization = timeseries::Standardization::Global;

    std::vector<std::size_t> max_basis_sweep = {5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
    std::size_t min_span = 1;
    std::size_t degree = 1;
    std::optional<double> gcv_penalty;

    std::vector<std::size_t> hidden = {12, 12};
    std::size_t epochs = 600;
    Trainer trainer = Trainer::Scg;
    std::uint64_t seed = 1;
    double learning_rate = 0.05;  // gradient descent only
    double momentum = 0.9;        // gradient descent only

    std::filesystem::path out_dir = "bench_out";
    /// Write wall-clock seconds into report files (makes them run-dependent).
    bool timing = false;
    Execution execution = Execution::Parallel;

    void validate() const;
};

/// Applies one `key=value` setting. Keys are the long flag names without dashes,
/// e.g. `train-years`, `max-basis-sweep`, `synth`. Throws UsageError.
void apply_setting(BenchConfig& config, std::string_view key, std::string_view value);
/// Reads a flat `key = value` file; `#` starts a comment.
void apply_config_file(BenchConfig& config, const std::filesystem::path& path);

std::string to_string(Trainer t);

struct ModelResult {
    std::string name;
    double train_rmse = 0.0;
    double test_rmse = 0.0;
    std::optional<std::size_t> iterations;  // "-" for MARS
    std::optional<double> seconds;
};

struct SweepRow {
    std::size_t max_basis = 0;
    std::size_t terms = 0;
    double train_gcv = 0.0;
    double train_rmse = 0.0;
    double test_rmse = 0.0;
};

struct BenchReport {
    std::vector<ModelResult> models;
    std::vector<SweepRow> sweep;
    std::size_t selected_max_basis = 0;
    double climatology_train_rmse = 0.0;
    double climatology_test_rmse = 0.0;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    std::string ann_termination;
    mars::MarsModel mars_model;
    neural::MlpNetwork network;
    std::vector<std::filesystem::path> files;
};

/// Series, standardization, and lag dataset with the chronological split applied.
struct PreparedData {
    timeseries::MonthlySeries series;
    timeseries::Standardizer standardizer;
    timeseries::LagDataset dataset;
};

PreparedData prepare_data(const BenchConfig& config);

struct MarsSweepResult {
    std::vector<SweepRow> rows;
    std::vector<mars::FitResult> fits;  // one per sweep setting
    std::size_t selected = 0;           // index chosen by training GCV
};

/// Fits one MARS model per sweep setting on the training rows only.
MarsSweepResult fit_mars_sweep(const timeseries::LagDataset& data, const BenchConfig& config);

struct AnnResult {
    neural::MlpNetwork network;
    neural::TrainReport report;
};

/// Trains the network on the training rows only.
AnnResult fit_ann(const timeseries::LagDataset& data, const BenchConfig& config);

/// Runs the whole comparison and writes report.txt, report.json, train_curve.csv,
/// sweep.csv, predictions.csv, mars_forward.csv and mars_prune.csv into out_dir.
BenchReport run_benchmark(const BenchConfig& config);

/// Table with columns Model | Train RMSE | Test RMSE | Iterations | Seconds.
std::string emit_table(const BenchReport& report);

struct PlotTraces {
    neural::TrainReport curve;
    std::vector<SweepRow> sweep;
    std::vector<std::size_t> month;  // position of each target in the series
    std::vector<double> actual;
    std::vector<double> mars_pred;
    std::vector<double> ann_pred;
};

/// Writes train_curve.csv, sweep.csv and predictions.csv; returns their paths.
std::vector<std::filesystem::path> emit_plot_csvs(const PlotTraces& traces, const std::filesystem::path& dir);

}  // namespace marsnet::bench
