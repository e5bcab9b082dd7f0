#include "marsnet/bench.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "marsnet/format.hpp"

namespace marsnet::bench {
namespace {

using Clock = std::chrono::steady_clock;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
    const std::string s = trim(text);
    T v{};
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || end != s.data() + s.size())
        throw UsageError(std::string(key) + ": '" + s + "' is not a valid number");
    return v;
}

std::vector<std::size_t> parse_list(std::string_view key, std::string_view text) {
    std::vector<std::size_t> out;
    const std::string s = trim(text);
    // start:stop:step form
    if (std::count(s.begin(), s.end(), ':') == 2) {
        const auto a = s.find(':'), b = s.find(':', a + 1);
        const auto lo = parse_number<std::size_t>(key, s.substr(0, a));
        const auto hi = parse_number<std::size_t>(key, s.substr(a + 1, b - a - 1));
        const auto step = parse_number<std::size_t>(key, s.substr(b + 1));
        if (step == 0) throw UsageError(std::string(key) + ": step must be positive");
        for (auto v = lo; v <= hi; v += step) out.push_back(v);
        return out;
    }
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        out.push_back(parse_number<std::size_t>(key, std::string_view(s).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name, const std::string& body) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << body;
    if (!out) throw DataError("failed writing " + path.string());
    return path;
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw DataError("cannot create output directory " + dir.string());
}

neural::StopCriteria stop_after(std::size_t epochs) {
    neural::StopCriteria stop;
    stop.epochs = epochs;
    return stop;
}

std::vector<std::size_t> layer_sizes(const BenchConfig& config) {
    std::vector<std::size_t> sizes{config.n_lags};
    sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
    sizes.push_back(1);
    return sizes;
}

}  // namespace

std::string to_string(Trainer t) {
    switch (t) {
        case Trainer::Gd: return "gd";
        case Trainer::Cg: return "cg";
        case Trainer::Scg: return "scg";
    }
    return "scg";
}

void BenchConfig::validate() const {
    if (max_basis_sweep.empty()) throw UsageError("max-basis-sweep must not be empty");
    for (std::size_t i = 0; i < max_basis_sweep.size(); ++i) {
        if (max_basis_sweep[i] == 0) throw UsageError("max-basis-sweep values must be positive");
        if (i > 0 && max_basis_sweep[i] <= max_basis_sweep[i - 1])
            throw UsageError("max-basis-sweep must be strictly ascending");
    }
    if (train_years == 0) throw UsageError("train-years must be positive");
    if (n_lags == 0) throw UsageError("lags must be positive");
    if (min_span == 0) throw UsageError("min-span must be positive");
    if (degree == 0) throw UsageError("degree must be positive");
    if (epochs == 0) throw UsageError("epochs must be positive");
    for (auto h : hidden)
        if (h == 0) throw UsageError("hidden layer sizes must be positive");
    if (gcv_penalty && !(*gcv_penalty >= 0.0)) throw UsageError("gcv-penalty must be non-negative");
    if (!data && (synth.years == 0 || !(synth.sigma >= 0.0))) throw UsageError("synth needs YEARS>0 and SIGMA>=0");
}

void apply_setting(BenchConfig& c, std::string_view key, std::string_view value) {
    const std::string v = trim(value);
    if (key == "data") {
        c.data = v;
    } else if (key == "synth") {
        const auto a = v.find(':'), b = v.find(':', a == std::string::npos ? a : a + 1);
        if (a == std::string::npos || b == std::string::npos) throw UsageError("synth expects YEARS:SEED:SIGMA");
        c.synth = {parse_number<std::size_t>(key, v.substr(0, a)),
                   parse_number<std::uint64_t>(key, v.substr(a + 1, b - a - 1)),
                   parse_number<double>(key, v.substr(b + 1))};
        c.data.reset();
    } else if (key == "train-years") {
        c.train_years = parse_number<std::size_t>(key, v);
    } else if (key == "lags") {
        c.n_lags = parse_number<std::size_t>(key, v);
    } else if (key == "standardize") {
        if (v == "global") c.standardization = timeseries::Standardization::Global;
        else if (v == "monthly") c.standardization = timeseries::Standardization::PerMonth;
        else throw UsageError("standardize must be 'global' or 'monthly'");
    } else if (key == "max-basis-sweep") {
        c.max_basis_sweep = parse_list(key, v);
    } else if (key == "min-span") {
        c.min_span = parse_number<std::size_t>(key, v);
    } else if (key == "degree") {
        c.degree = parse_number<std::size_t>(key, v);
    } else if (key == "gcv-penalty") {
        c.gcv_penalty = parse_number<double>(key, v);
    } else if (key == "hidden") {
        c.hidden = parse_list(key, v);
    } else if (key == "epochs") {
        c.epochs = parse_number<std::size_t>(key, v);
    } else if (key == "trainer") {
        if (v == "gd") c.trainer = Trainer::Gd;
        else if (v == "cg") c.trainer = Trainer::Cg;
        else if (v == "scg") c.trainer = Trainer::Scg;
        else throw UsageError("trainer must be gd, cg or scg");
    } else if (key == "seed") {
        c.seed = parse_number<std::uint64_t>(key, v);
    } else if (key == "learning-rate") {
        c.learning_rate = parse_number<double>(key, v);
    } else if (key == "momentum") {
        c.momentum = parse_number<double>(key, v);
    } else if (key == "out") {
        c.out_dir = v;
    } else if (key == "timing") {
        if (v == "true" || v == "1") c.timing = true;
        else if (v == "false" || v == "0") c.timing = false;
        else throw UsageError("timing must be true or false");
    } else if (key == "serial") {
        c.execution = (v == "true" || v == "1") ? Execution::Serial : Execution::Parallel;
    } else {
        throw UsageError("unknown setting '" + std::string(key) + "'");
    }
}

void apply_config_file(BenchConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
        apply_setting(config, trim(std::string_view(line).substr(0, eq)), std::string_view(line).substr(eq + 1));
    }
}

PreparedData prepare_data(const BenchConfig& config) {
    config.validate();
    PreparedData p;
    p.series = config.data ? timeseries::load_csv(*config.data)
                           : timeseries::synth_monsoon(config.synth.years, config.synth.seed, config.synth.sigma);
    const std::size_t boundary = config.train_years * 12;
    if (boundary >= p.series.size())
        throw DataError("train-years " + std::to_string(config.train_years) + " leaves no test data in a " +
                        std::to_string(p.series.size()) + "-month series");
    try {
        p.standardizer = timeseries::fit_standardizer(p.series, {0, boundary}, config.standardization);
        const auto z = timeseries::standardize(p.series, p.standardizer);
        p.dataset = timeseries::lag_embed(z, config.n_lags, p.series.start_month);
        timeseries::chrono_split(p.dataset, config.train_years);
    } catch (const DomainError& e) {
        throw DataError(e.what());
    }
    return p;
}

MarsSweepResult fit_mars_sweep(const timeseries::LagDataset& data, const BenchConfig& config) {
    const Matrix train_X = data.train_X();
    const auto train_y = data.train_y();
    const Matrix test_X = data.test_X();

    MarsSweepResult out;
    for (std::size_t max_basis : config.max_basis_sweep) {
        mars::MarsFitConfig mc;
        mc.max_basis_functions = max_basis;
        mc.min_span = config.min_span;
        mc.max_interaction_degree = config.degree;
        mc.gcv_penalty = config.gcv_penalty;
        mc.execution = config.execution;
        auto result = mars::fit(train_X, train_y, mc);
        SweepRow row;
        row.max_basis = max_basis;
        row.terms = result.model.terms().size();
        row.train_gcv = result.model.fit_gcv();
        row.train_rmse = timeseries::rmse(result.model.predict_batch(train_X), train_y);
        row.test_rmse = timeseries::rmse(result.model.predict_batch(test_X), data.test_y());
        // Ties keep the smaller setting.
        if (out.rows.empty() || row.train_gcv < out.rows[out.selected].train_gcv) out.selected = out.rows.size();
        out.rows.push_back(row);
        out.fits.push_back(std::move(result));
    }
    return out;
}

AnnResult fit_ann(const timeseries::LagDataset& data, const BenchConfig& config) {
    AnnResult out{neural::init_weights(layer_sizes(config), config.seed), {}};
    neural::NetworkObjective objective(out.network, data.train_X(), neural::as_targets(data.train_y()),
                                       config.execution);
    std::vector<double> w(out.network.params().begin(), out.network.params().end());
    const auto stop = stop_after(config.epochs);
    try {
        switch (config.trainer) {
            case Trainer::Gd:
                out.report = neural::gd_minimize(objective, w, {config.learning_rate, config.momentum, stop});
                break;
            case Trainer::Cg: {
                neural::CgConfig cg;
                cg.stop = stop;
                out.report = neural::cg_minimize(objective, w, cg);
                break;
            }
            case Trainer::Scg: {
                neural::ScgConfig scg;
                scg.stop = stop;
                out.report = neural::scg_minimize(objective, w, scg);
                break;
            }
        }
    } catch (const NumericalError& e) {
        throw NumericalError("ANN-" + to_string(config.trainer) + ": " + e.detail(), e.epoch());
    }
    out.network.set_params(w);
    return out;
}

std::string emit_table(const BenchReport& report) {
    auto pad = [](std::string s, std::size_t width) {
        if (s.size() < width) s.append(width - s.size(), ' ');
        return s;
    };
    std::ostringstream os;
    os << pad("Model", 10) << pad("Train RMSE", 12) << pad("Test RMSE", 12) << pad("Iterations", 12) << "Seconds\n";
    for (const auto& m : report.models) {
        os << pad(m.name, 10) << pad(format_fixed(m.train_rmse, 4), 12) << pad(format_fixed(m.test_rmse, 4), 12)
           << pad(m.iterations ? std::to_string(*m.iterations) : "-", 12)
           << (m.seconds ? format_fixed(*m.seconds, 2) : "-") << '\n';
    }
    return os.str();
}

std::vector<std::filesystem::path> emit_plot_csvs(const PlotTraces& t, const std::filesystem::path& dir) {
    ensure_dir(dir);
    const std::size_t n = t.month.size();
    if (t.actual.size() != n || t.mars_pred.size() != n || t.ann_pred.size() != n)
        throw StructuralError("prediction columns differ in length");

    std::vector<std::filesystem::path> files;
    files.push_back(write_file(dir, "train_curve.csv", t.curve.to_csv()));

    std::ostringstream sweep;
    sweep << "max_basis,terms,train_gcv,train_rmse,test_rmse\n";
    for (const auto& r : t.sweep)
        sweep << r.max_basis << ',' << r.terms << ',' << format_double(r.train_gcv) << ','
              << format_double(r.train_rmse) << ',' << format_double(r.test_rmse) << '\n';
    files.push_back(write_file(dir, "sweep.csv", sweep.str()));

    std::ostringstream pred;
    pred << "month_index,actual,mars_pred,ann_pred\n";
    for (std::size_t i = 0; i < n; ++i)
        pred << t.month[i] << ',' << format_double(t.actual[i]) << ',' << format_double(t.mars_pred[i]) << ','
             << format_double(t.ann_pred[i]) << '\n';
    files.push_back(write_file(dir, "predictions.csv", pred.str()));
    return files;
}

BenchReport run_benchmark(const BenchConfig& config) {
    const PreparedData prepared = prepare_data(config);
    const auto& data = prepared.dataset;
    ensure_dir(config.out_dir);

    const auto t0 = Clock::now();
    MarsSweepResult sweep = fit_mars_sweep(data, config);
    const auto t1 = Clock::now();
    AnnResult ann = fit_ann(data, config);
    const auto t2 = Clock::now();

    const auto& chosen = sweep.fits[sweep.selected];
    const Matrix train_X = data.train_X();
    const Matrix test_X = data.test_X();
    const auto mars_train = chosen.model.predict_batch(train_X);
    const auto mars_test = chosen.model.predict_batch(test_X);
    const auto ann_train = ann.network.predict_batch(train_X);
    const auto ann_test = ann.network.predict_batch(test_X);
    for (double v : ann_test)
        if (!std::isfinite(v)) throw NumericalError("ANN-" + to_string(config.trainer) + " produced non-finite output", ann.report.epochs);

    BenchReport report;
    const double seconds_mars = std::chrono::duration<double>(t1 - t0).count();
    const double seconds_ann = std::chrono::duration<double>(t2 - t1).count();
    report.models.push_back({"MARS", timeseries::rmse(mars_train, data.train_y()),
                             timeseries::rmse(mars_test, data.test_y()), std::nullopt, seconds_mars});
    std::string ann_name = "ANN-" + to_string(config.trainer);
    std::transform(ann_name.begin(), ann_name.end(), ann_name.begin(), [](unsigned char c) { return std::toupper(c); });
    report.models.push_back({ann_name, timeseries::rmse(ann_train, data.train_y()),
                             timeseries::rmse(ann_test, data.test_y()), ann.report.epochs, seconds_ann});
    report.sweep = sweep.rows;
    report.selected_max_basis = sweep.rows[sweep.selected].max_basis;
    const auto clim = timeseries::climatology(data);
    const auto train_months = std::span(data.month).subspan(data.train.begin, data.train.size());
    const auto test_months = std::span(data.month).subspan(data.test.begin, data.test.size());
    report.climatology_train_rmse =
        timeseries::rmse(timeseries::climatology_predict(clim, train_months), data.train_y());
    report.climatology_test_rmse = timeseries::rmse(timeseries::climatology_predict(clim, test_months), data.test_y());
    report.train_rows = data.train.size();
    report.test_rows = data.test.size();
    report.ann_termination = neural::to_string(ann.report.termination);
    report.mars_model = chosen.model;
    report.network = ann.network;

    // Files: timing only when asked, so repeated runs are byte-identical by default.
    BenchReport written = report;
    if (!config.timing)
        for (auto& m : written.models) m.seconds.reset();

    PlotTraces traces;
    traces.curve = ann.report;
    traces.sweep = sweep.rows;
    for (std::size_t i = data.test.begin; i < data.test.end; ++i) {
        traces.month.push_back(data.target_position[i]);
        traces.actual.push_back(prepared.series.values[data.target_position[i]]);
    }
    traces.mars_pred = timeseries::inverse_standardize(mars_test, test_months, prepared.standardizer);
    traces.ann_pred = timeseries::inverse_standardize(ann_test, test_months, prepared.standardizer);
    report.files = emit_plot_csvs(traces, config.out_dir);
    report.files.push_back(write_file(config.out_dir, "mars_forward.csv", mars::to_csv(chosen.forward)));
    report.files.push_back(write_file(config.out_dir, "mars_prune.csv", mars::to_csv(chosen.prune)));

    std::ostringstream txt;
    txt << emit_table(written) << '\n'
        << "Climatology test RMSE " << format_fixed(report.climatology_test_rmse, 4) << '\n'
        << "MARS selected by training GCV: max_basis " << report.selected_max_basis << ", "
        << chosen.model.terms().size() << " terms\n"
        << "Rows: " << report.train_rows << " train, " << report.test_rows << " test\n";
    report.files.push_back(write_file(config.out_dir, "report.txt", txt.str()));

    using nlohmann::json;
    json models = json::array();
    for (const auto& m : written.models) {
        json jm = {{"name", m.name}, {"train_rmse", m.train_rmse}, {"test_rmse", m.test_rmse}};
        jm["iterations"] = m.iterations ? json(*m.iterations) : json(nullptr);
        if (m.seconds) jm["seconds"] = *m.seconds;
        models.push_back(std::move(jm));
    }
    json sweep_rows = json::array();
    for (const auto& r : sweep.rows)
        sweep_rows.push_back({{"max_basis", r.max_basis},
                              {"terms", r.terms},
                              {"train_gcv", r.train_gcv},
                              {"train_rmse", r.train_rmse},
                              {"test_rmse", r.test_rmse}});
    json manifest = json::array();
    for (const auto& f : report.files) manifest.push_back(f.filename().string());
    manifest.push_back("report.json");
    const json doc = {{"models", std::move(models)},
                      {"sweep", std::move(sweep_rows)},
                      {"selected_max_basis", report.selected_max_basis},
                      {"climatology", {{"train_rmse", report.climatology_train_rmse},
                                       {"test_rmse", report.climatology_test_rmse}}},
                      {"rows", {{"train", report.train_rows}, {"test", report.test_rows}}},
                      {"ann_termination", report.ann_termination},
                      {"mars_model", json::parse(chosen.model.to_json())},
                      {"network", json::parse(ann.network.to_json())},
                      {"files", std::move(manifest)}};
    report.files.push_back(write_file(config.out_dir, "report.json", doc.dump(2) + "\n"));
    return report;
}

}  // namespace marsnet::bench
