#include "marsnet/timeseries.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "marsnet/format.hpp"

namespace marsnet::timeseries {
namespace {

constexpr std::array<const char*, 12> kMonthNames = {"jan", "feb", "mar", "apr", "may", "jun",
                                                     "jul", "aug", "sep", "oct", "nov", "dec"};

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double parse_value(const std::string& field, std::size_t line) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || end != field.data() + field.size())
        throw DataError("'" + field + "' is not a number", line);
    if (!std::isfinite(v)) throw DataError("non-finite value '" + field + "'", line);
    return v;
}

int parse_int(const std::string& field, std::size_t line) {
    int v = 0;
    auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || end != field.data() + field.size())
        throw DataError("'" + field + "' is not an integer", line);
    return v;
}

double population_std(std::span<const double> v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

MonthlySeries parse_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_fields(lower(line));
            break;
        }
    }
    if (header.empty()) throw DataError("empty file");

    bool wide = false;
    if (header == std::vector<std::string>{"year", "month", "value"}) {
        wide = false;
    } else if (header.size() == 13 && header[0] == "year" &&
               std::equal(kMonthNames.begin(), kMonthNames.end(), header.begin() + 1)) {
        wide = true;
    } else {
        throw DataError("header must be 'year,month,value' or 'year,jan,...,dec'", line_no);
    }

    MonthlySeries series;
    int year = 0, month = 0;  // of the last value read
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw DataError("expected " + std::to_string(header.size()) + " fields, found " +
                                std::to_string(fields.size()),
                            line_no);
        const int y = parse_int(fields[0], line_no);
        if (wide) {
            if (!series.values.empty() && y != year + 1) throw DataError("years must be consecutive", line_no);
            if (series.values.empty()) series.start_year = y;
            for (std::size_t m = 1; m <= 12; ++m) series.values.push_back(parse_value(fields[m], line_no));
            year = y;
            month = 12;
        } else {
            const int m = parse_int(fields[1], line_no);
            if (m < 1 || m > 12) throw DataError("month must be 1-12", line_no);
            if (series.values.empty()) {
                series.start_year = y;
                series.start_month = m;
            } else {
                const int want_year = month == 12 ? year + 1 : year;
                const int want_month = month == 12 ? 1 : month + 1;
                if (y != want_year || m != want_month)
                    throw DataError("months must be consecutive and increasing", line_no);
            }
            series.values.push_back(parse_value(fields[2], line_no));
            year = y;
            month = m;
        }
    }
    if (series.values.size() < 24)
        throw DataError("need at least 24 months, found " + std::to_string(series.values.size()));
    return series;
}

MonthlySeries load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return parse_csv(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.detail(), e.line());
    }
}

std::string to_csv(const MonthlySeries& series) {
    std::ostringstream os;
    os << "year,month,value\n";
    for (std::size_t t = 0; t < series.size(); ++t) {
        const auto offset = static_cast<int>(static_cast<std::size_t>(series.start_month - 1) + t);
        os << series.start_year + offset / 12 << ',' << offset % 12 + 1 << ',' << format_double(series.values[t])
           << '\n';
    }
    return os.str();
}

Standardizer Standardizer::fit(const MonthlySeries& series, Range positions, Standardization mode) {
    if (positions.empty() || positions.end > series.size()) throw DomainError("standardizer: bad training range");
    Standardizer z;
    z.mode_ = mode;
    const auto segment = std::span(series.values).subspan(positions.begin, positions.size());
    if (mode == Standardization::Global) {
        z.mean_.fill(mean_of(segment));
        z.std_.fill(population_std(segment, z.mean_[0]));
        if (!(z.std_[0] > 0.0)) throw DomainError("standardizer: training segment is constant");
        return z;
    }
    for (int m = 1; m <= 12; ++m) {
        std::vector<double> vals;
        for (std::size_t t = positions.begin; t < positions.end; ++t)
            if (series.month_at(t) == m) vals.push_back(series.values[t]);
        if (vals.empty()) throw DomainError("standardizer: training segment lacks month " + std::to_string(m));
        const auto i = static_cast<std::size_t>(m - 1);
        z.mean_[i] = mean_of(vals);
        z.std_[i] = population_std(vals, z.mean_[i]);
        if (!(z.std_[i] > 0.0)) throw DomainError("standardizer: month " + std::to_string(m) + " is constant");
    }
    return z;
}

Standardizer fit_standardizer(const MonthlySeries& series, Range train_positions, Standardization mode) {
    return Standardizer::fit(series, train_positions, mode);
}

std::vector<double> standardize(const MonthlySeries& series, const Standardizer& z) {
    std::vector<double> out(series.size());
    for (std::size_t t = 0; t < series.size(); ++t) out[t] = z.transform(series.values[t], series.month_at(t));
    return out;
}

std::vector<double> inverse_standardize(std::span<const double> values, std::span<const int> months,
                                        const Standardizer& z) {
    if (values.size() != months.size()) throw StructuralError("values and months differ in length");
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = z.inverse(values[i], months[i]);
    return out;
}

LagDataset lag_embed(std::span<const double> values, std::size_t n_lags, int start_month) {
    if (n_lags == 0) throw DomainError("lag_embed: need at least one lag");
    if (values.size() <= n_lags) throw DomainError("lag_embed: series shorter than lag window plus one");
    if (start_month < 1 || start_month > 12) throw DomainError("lag_embed: start month must be 1-12");
    const std::size_t rows = values.size() - n_lags;
    LagDataset d;
    d.n_lags = n_lags;
    d.X = Matrix(rows, n_lags);
    d.y.resize(rows);
    d.month.resize(rows);
    d.target_position.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < n_lags; ++k) d.X(i, k) = values[i + k];
        const std::size_t t = i + n_lags;
        d.y[i] = values[t];
        d.target_position[i] = t;
        d.month[i] = static_cast<int>((static_cast<std::size_t>(start_month - 1) + t) % 12) + 1;
    }
    d.train = {0, rows};
    return d;
}

std::pair<Range, Range> chrono_split(LagDataset& data, std::size_t train_years) {
    if (train_years == 0) throw DomainError("chrono_split: training period is empty");
    const std::size_t series_length = data.n_lags + data.rows();
    const std::size_t boundary = train_years * 12;
    if (boundary >= series_length)
        throw DomainError("chrono_split: " + std::to_string(train_years) + " training years leave no test data");
    std::size_t first_test = 0;
    while (first_test < data.rows() && data.target_position[first_test] < boundary) ++first_test;
    if (first_test == 0) throw DomainError("chrono_split: lag window consumes the whole training period");
    data.train = {0, first_test};
    data.test = {first_test, data.rows()};
    return {data.train, data.test};
}

double rmse(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size()) throw StructuralError("rmse: length mismatch");
    if (predicted.empty()) throw DomainError("rmse: empty input");
    double ss = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted[i] - actual[i];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(predicted.size()));
}

std::array<double, 12> climatology(const LagDataset& data) {
    std::array<double, 12> sum{}, count{};
    for (std::size_t i = data.train.begin; i < data.train.end; ++i) {
        const auto m = static_cast<std::size_t>(data.month[i] - 1);
        sum[m] += data.y[i];
        count[m] += 1.0;
    }
    for (std::size_t m = 0; m < 12; ++m) {
        if (count[m] == 0.0) throw DomainError("climatology: training rows miss a calendar month");
        sum[m] /= count[m];
    }
    return sum;
}

std::vector<double> climatology_predict(const std::array<double, 12>& means, std::span<const int> months) {
    std::vector<double> out;
    out.reserve(months.size());
    for (int m : months) out.push_back(means[static_cast<std::size_t>(m - 1)]);
    return out;
}

const std::array<double, 12>& monsoon_template() {
    // Dry winter, pre-monsoon build-up, June-July peak, secondary October peak.
    static const std::array<double, 12> kTemplate = {12.0,  18.0,  35.0,  110.0, 240.0, 680.0,
                                                     590.0, 380.0, 240.0, 300.0, 170.0, 45.0};
    return kTemplate;
}

double monsoon_modulation(std::size_t t) {
    const double years = static_cast<double>(t) / 12.0;
    return 1.0 + 0.25 * std::sin(2.0 * std::numbers::pi * years / 9.0) +
           0.1 * std::sin(2.0 * std::numbers::pi * years / 3.7 + 1.0);
}

MonthlySeries synth_monsoon(std::size_t years, std::uint64_t seed, double noise_sigma, int start_year) {
    if (years == 0) throw DomainError("synth_monsoon: need at least one year");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw DomainError("synth_monsoon: bad noise sigma");
    MonthlySeries s;
    s.start_year = start_year;
    s.values.resize(years * 12);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto& tmpl = monsoon_template();
    const double innovation = std::sqrt(1.0 - kNoisePersistence * kNoisePersistence);
    double anomaly = 0.0;  // AR(1) with unit marginal variance
    for (std::size_t t = 0; t < s.values.size(); ++t) {
        const double z = gauss(rng);
        anomaly = t == 0 ? z : kNoisePersistence * anomaly + innovation * z;
        const double noise = noise_sigma > 0.0 ? std::exp(noise_sigma * anomaly - 0.5 * noise_sigma * noise_sigma)
                                               : 1.0;
        s.values[t] = tmpl[t % 12] * monsoon_modulation(t) * noise;
    }
    return s;
}

}  // namespace marsnet::timeseries
