#include "snodri/timeseries.hpp"

#include "snodri/errors.hpp"
#include "snodri/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

namespace snodri {

namespace {

bool parse_int(std::string_view text, int& out) {
    if (text.empty()) return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

MonthStamp MonthStamp::from_index(long long idx) {
    long long y = idx >= 0 ? idx / 12 : -((-idx + 11) / 12);
    int m = static_cast<int>(idx - y * 12);
    return {static_cast<int>(y), m + 1};
}

std::string MonthStamp::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

std::optional<MonthStamp> MonthStamp::parse(std::string_view text) {
    if (text.size() != 7 || text[4] != '-') return std::nullopt;
    int y = 0, m = 0;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m)) return std::nullopt;
    if (m < 1 || m > 12) return std::nullopt;
    return MonthStamp{y, m};
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

std::optional<Date> Date::parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
        !parse_int(text.substr(8, 2), d))
        return std::nullopt;
    Date date{y, m, d};
    if (!is_valid_date(date)) return std::nullopt;
    return date;
}

int days_in_month(int year, int month) {
    static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month < 1 || month > 12) return 0;
    if (month == 2) {
        bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return kDays[month - 1];
}

bool is_valid_date(const Date& d) {
    return d.month >= 1 && d.month <= 12 && d.day >= 1 && d.day <= days_in_month(d.year, d.month);
}

std::optional<std::size_t> MonthlySeries::offset_of(MonthStamp s) const {
    long long off = s.index() - start.index();
    if (off < 0 || off >= static_cast<long long>(values.size())) return std::nullopt;
    return static_cast<std::size_t>(off);
}

bool MonthlySeries::has_missing() const {
    return std::any_of(values.begin(), values.end(), [](double v) { return std::isnan(v); });
}

void BasinTable::add(MonthlySeries series) {
    if (series.variable_id.empty()) throw DataError("series without a variable id");
    if (contains(series.variable_id))
        throw DataError("duplicate variable '" + series.variable_id + "' in basin table");
    series_.push_back(std::move(series));
}

bool BasinTable::contains(std::string_view variable_id) const {
    return std::any_of(series_.begin(), series_.end(),
                       [&](const MonthlySeries& s) { return s.variable_id == variable_id; });
}

const MonthlySeries& BasinTable::at(std::string_view variable_id) const {
    for (const auto& s : series_)
        if (s.variable_id == variable_id) return s;
    throw MissingVariable("variable '" + std::string(variable_id) + "' not present in basin table");
}

std::vector<std::string> BasinTable::variable_ids() const {
    std::vector<std::string> ids;
    ids.reserve(series_.size());
    for (const auto& s : series_) ids.push_back(s.variable_id);
    return ids;
}

MonthlySeries aggregate_daily_to_monthly(const DatedSeries& daily, AggregateMethod method,
                                         MissingPolicy policy) {
    if (daily.dates.size() != daily.values.size())
        throw DataError("daily series has mismatched date and value counts");
    if (daily.dates.empty()) throw DataError("daily series is empty");
    for (std::size_t i = 1; i < daily.dates.size(); ++i)
        if (!(daily.dates[i - 1] < daily.dates[i]))
            throw DataError("daily series dates are not strictly increasing at row " +
                            std::to_string(i + 1));

    MonthStamp first = daily.dates.front().month_stamp();
    MonthStamp last = daily.dates.back().month_stamp();
    std::size_t n_months = static_cast<std::size_t>(last.index() - first.index()) + 1;

    std::vector<double> sums(n_months, 0.0);
    std::vector<int> counts(n_months, 0);
    for (std::size_t i = 0; i < daily.values.size(); ++i) {
        std::size_t m = static_cast<std::size_t>(daily.dates[i].month_stamp().index() - first.index());
        sums[m] += daily.values[i];
        counts[m] += 1;
    }

    MonthlySeries out;
    out.variable_id = daily.variable_id;
    out.unit = daily.unit;
    out.start = first;
    out.values.resize(n_months);
    for (std::size_t m = 0; m < n_months; ++m) {
        MonthStamp stamp = first.plus_months(static_cast<long long>(m));
        int expected = days_in_month(stamp.year, stamp.month);
        if (counts[m] < expected && policy == MissingPolicy::reject)
            throw IncompleteMonth("month " + stamp.to_string() + " of '" + daily.variable_id +
                                  "' has " + std::to_string(counts[m]) + " of " +
                                  std::to_string(expected) + " days");
        if (counts[m] == 0) {
            out.values[m] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        out.values[m] =
            method == AggregateMethod::sum ? sums[m] : sums[m] / static_cast<double>(counts[m]);
    }
    return out;
}

std::pair<MonthlySeries, ZScoreParams> standardize(const MonthlySeries& series,
                                                   std::optional<ZScoreParams> params) {
    if (series.empty()) throw DataError("cannot standardize empty series '" + series.variable_id + "'");
    if (series.has_missing())
        throw DataError("cannot standardize series '" + series.variable_id +
                        "' with missing values");

    ZScoreParams p;
    if (params) {
        p = *params;
        if (!(p.std > 0.0))
            throw NumericError("stored standardization std for '" + series.variable_id +
                               "' is not positive");
    } else {
        p.mean = stats::mean(series.values);
        p.std = stats::population_std(series.values);
        if (!(p.std > 0.0))
            throw ZeroVariance("series '" + series.variable_id + "' is constant; cannot standardize");
    }

    MonthlySeries out = series;
    out.unit = "z-score";
    for (double& v : out.values) v = (v - p.mean) / p.std;
    return {std::move(out), p};
}

MonthlySeries destandardize(const MonthlySeries& series, const ZScoreParams& params) {
    MonthlySeries out = series;
    for (double& v : out.values) v = v * params.std + params.mean;
    return out;
}

MonthlySeries monthly_climatology_anomaly(const MonthlySeries& series) {
    if (series.empty()) throw DataError("cannot take anomalies of empty series");
    if (series.has_missing())
        throw DataError("cannot take anomalies of series '" + series.variable_id +
                        "' with missing values");

    double sums[12] = {};
    int counts[12] = {};
    for (std::size_t i = 0; i < series.size(); ++i) {
        int m = series.stamp(i).month - 1;
        sums[m] += series.values[i];
        counts[m] += 1;
    }
    MonthlySeries out = series;
    for (std::size_t i = 0; i < out.size(); ++i) {
        int m = out.stamp(i).month - 1;
        out.values[i] -= sums[m] / counts[m];
    }
    return out;
}

namespace {

/// Trim leading and trailing NaN; the trimmed range must be gap-free.
struct TrimRange {
    MonthStamp first{};
    MonthStamp last{};
};

TrimRange trimmed_range(const MonthlySeries& s) {
    std::size_t lo = 0;
    while (lo < s.size() && std::isnan(s.values[lo])) ++lo;
    if (lo == s.size()) throw DataError("series '" + s.variable_id + "' is entirely missing");
    std::size_t hi = s.size() - 1;
    while (std::isnan(s.values[hi])) --hi;
    return {s.stamp(lo), s.stamp(hi)};
}

}  // namespace

DesignMatrix align(const BasinTable& table, const std::vector<std::string>& variables,
                   const std::optional<std::vector<ZScoreParams>>& stored_params) {
    if (variables.empty()) throw DataError("align requested with no variables");
    if (stored_params && stored_params->size() != variables.size())
        throw DataError("stored standardization parameter count does not match variable count");

    long long lo = std::numeric_limits<long long>::min();
    long long hi = std::numeric_limits<long long>::max();
    for (const auto& id : variables) {
        TrimRange r = trimmed_range(table.at(id));
        lo = std::max(lo, r.first.index());
        hi = std::min(hi, r.last.index());
    }
    if (lo > hi) throw DataError("requested variables have no common months");

    std::size_t n = static_cast<std::size_t>(hi - lo) + 1;
    DesignMatrix dm;
    dm.start = MonthStamp::from_index(lo);
    dm.column_ids = variables;
    dm.values = Matrix(n, variables.size());
    dm.params.resize(variables.size());

    for (std::size_t j = 0; j < variables.size(); ++j) {
        const MonthlySeries& s = table.at(variables[j]);
        MonthlySeries window;
        window.variable_id = s.variable_id;
        window.unit = s.unit;
        window.start = dm.start;
        window.values.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto off = s.offset_of(dm.start.plus_months(static_cast<long long>(i)));
            double v = off ? s.values[*off] : std::numeric_limits<double>::quiet_NaN();
            if (std::isnan(v))
                throw DataError("series '" + s.variable_id + "' has a missing value at " +
                                dm.start.plus_months(static_cast<long long>(i)).to_string() +
                                " inside the common range");
            window.values[i] = v;
        }
        auto [z, p] = standardize(window, stored_params
                                              ? std::optional<ZScoreParams>((*stored_params)[j])
                                              : std::nullopt);
        dm.params[j] = p;
        for (std::size_t i = 0; i < n; ++i) dm.values(i, j) = z.values[i];
    }
    return dm;
}

MonthlySeries restrict_series(const MonthlySeries& series, MonthStamp first, MonthStamp last) {
    if (series.empty()) throw DataError("cannot restrict empty series");
    long long lo = std::max(first.index(), series.start.index());
    long long hi = std::min(last.index(), series.last_stamp().index());
    if (lo > hi)
        throw DataError("series '" + series.variable_id + "' has no months in [" +
                        first.to_string() + ", " + last.to_string() + "]");
    MonthlySeries out;
    out.variable_id = series.variable_id;
    out.unit = series.unit;
    out.start = MonthStamp::from_index(lo);
    out.values.assign(series.values.begin() + (lo - series.start.index()),
                      series.values.begin() + (hi - series.start.index()) + 1);
    return out;
}

BasinTable restrict_table(const BasinTable& table, MonthStamp first, MonthStamp last) {
    BasinTable out(table.basin_id());
    for (const auto& s : table.series()) out.add(restrict_series(s, first, last));
    return out;
}

std::string default_unit(std::string_view variable_id) {
    static const std::map<std::string, std::string, std::less<>> kUnits = {
        {"APCP", "mm"},      {"TMP", "K"},         {"DSWRF", "W m-2"}, {"DLWRF", "W m-2"},
        {"SPFH", "kg kg-1"}, {"PRES", "Pa"},       {"UGRD", "m s-1"},  {"VGRD", "m s-1"},
        {"SWE", "mm"},       {"Q", "m3 s-1"},      {"SNOWFRAC", "1"},  {"snodri", "z-score"},
    };
    auto it = kUnits.find(variable_id);
    return it == kUnits.end() ? std::string() : it->second;
}

}  // namespace snodri
