// marsnet: one-month-ahead forecasting benchmark, MARS versus a feedforward network.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "marsnet/bench.hpp"
#include "marsnet/format.hpp"

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kNumerical = 3;

int run(const marsnet::bench::BenchConfig& config) {
    const auto report = marsnet::bench::run_benchmark(config);
    std::cout << marsnet::bench::emit_table(report) << '\n'
              << "climatology test RMSE " << marsnet::format_fixed(report.climatology_test_rmse, 4) << '\n'
              << "MARS: max_basis " << report.selected_max_basis << " selected by training GCV, "
              << report.mars_model.terms().size() << " terms\n"
              << "ANN: " << report.models.back().iterations.value_or(0) << " epochs, " << report.ann_termination
              << '\n';
    for (const auto& f : report.files) std::cout << "wrote " << f.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MARS vs neural network monthly rainfall forecasting benchmark"};
    app.set_help_all_flag("--help-all");

    std::string config_file;
    app.add_option("--config", config_file, "flat key=value file; flags override it");

    // Flag name -> value, applied after the config file.
    std::map<std::string, std::string> flags;
    const std::pair<const char*, const char*> options[] = {
        {"data", "monthly CSV (year,month,value or year,jan..dec)"},
        {"synth", "synthetic series YEARS:SEED:SIGMA (default 87:7:0.3)"},
        {"train-years", "leading years used for training (default 40)"},
        {"lags", "lagged months per input row (default 12)"},
        {"standardize", "global | monthly (default global)"},
        {"max-basis-sweep", "list '5,10,15' or range '5:50:5' (default 5:50:5)"},
        {"min-span", "minimum observations between knots (default 1)"},
        {"degree", "maximum interaction degree (default 1)"},
        {"gcv-penalty", "GCV cost per knot (default 2 additive, 3 with interactions)"},
        {"hidden", "hidden layer sizes (default 12,12)"},
        {"epochs", "training epochs (default 600)"},
        {"trainer", "gd | cg | scg (default scg)"},
        {"seed", "weight initialization seed (default 1)"},
        {"learning-rate", "gradient descent learning rate (default 0.05)"},
        {"momentum", "gradient descent momentum (default 0.9)"},
        {"out", "output directory (default bench_out)"},
    };
    for (const auto& [name, help] : options)
        app.add_option_function<std::string>(std::string("--") + name,
                                             [&flags, key = std::string(name)](const std::string& v) { flags[key] = v; },
                                             help);
    bool timing = false;
    app.add_flag("--timing", timing, "write wall-clock seconds into report files");
    bool serial = false;
    app.add_flag("--serial", serial, "use the serial reference kernels");
    std::size_t threads = 0;
    app.add_option("--threads", threads, "OpenMP threads (default: all)");

    auto* synth_cmd = app.add_subcommand("synth", "write a synthetic monthly series as CSV and exit");
    std::size_t years = 87;
    std::uint64_t seed = 7;
    double sigma = 0.3;
    std::string synth_out;
    synth_cmd->add_option("--years", years, "number of years")->capture_default_str();
    synth_cmd->add_option("--seed", seed, "random seed")->capture_default_str();
    synth_cmd->add_option("--sigma", sigma, "log-normal noise sigma")->capture_default_str();
    synth_cmd->add_option("-o,--output", synth_out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (threads > 0) marsnet::set_threads(threads);
        if (*synth_cmd) {
            const auto series = marsnet::timeseries::synth_monsoon(years, seed, sigma);
            std::ofstream out(synth_out, std::ios::binary);
            if (!out) throw marsnet::DataError("cannot write " + synth_out);
            out << marsnet::timeseries::to_csv(series);
            return 0;
        }
        marsnet::bench::BenchConfig config;
        if (!config_file.empty()) marsnet::bench::apply_config_file(config, config_file);
        for (const auto& [key, value] : flags) marsnet::bench::apply_setting(config, key, value);
        if (timing) config.timing = true;
        if (serial) config.execution = marsnet::Execution::Serial;
        return run(config);
    } catch (const marsnet::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const marsnet::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const marsnet::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    }
}
