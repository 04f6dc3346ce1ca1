#pragma once

#include "snodri/matrix.hpp"

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace snodri {

/// A calendar month. Order and month arithmetic are total and closed.
struct MonthStamp {
    int year = 0;
    int month = 1;  // 1..12

    auto operator<=>(const MonthStamp&) const = default;

    /// Months since year 0 January; the working index for arithmetic.
    long long index() const { return static_cast<long long>(year) * 12 + (month - 1); }

    static MonthStamp from_index(long long idx);
    MonthStamp plus_months(long long k) const { return from_index(index() + k); }

    std::string to_string() const;  // "YYYY-MM"
    static std::optional<MonthStamp> parse(std::string_view text);
};

/// A calendar day, used for sub-monthly input series.
struct Date {
    int year = 0;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;
    MonthStamp month_stamp() const { return {year, month}; }
    std::string to_string() const;  // "YYYY-MM-DD"
    static std::optional<Date> parse(std::string_view text);
};

int days_in_month(int year, int month);
bool is_valid_date(const Date& d);

/**
 * One variable's contiguous monthly record. Stamps are implied by `start`
 * plus the value index, which makes gaps unrepresentable. NaN marks a
 * missing value where the ingest policy allows one.
 */
struct MonthlySeries {
    std::string variable_id;
    std::string unit;
    MonthStamp start{};
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
    MonthStamp stamp(std::size_t i) const { return start.plus_months(static_cast<long long>(i)); }
    MonthStamp last_stamp() const { return stamp(values.size() - 1); }

    /// Index of the given stamp, or nullopt when outside the record.
    std::optional<std::size_t> offset_of(MonthStamp s) const;

    bool has_missing() const;
};

/// Sub-monthly (daily) record; dates must be strictly increasing.
struct DatedSeries {
    std::string variable_id;
    std::string unit;
    std::vector<Date> dates;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

/// All series for one basin, keyed by variable_id, insertion-ordered.
class BasinTable {
public:
    BasinTable() = default;
    explicit BasinTable(std::string basin_id) : basin_id_(std::move(basin_id)) {}

    const std::string& basin_id() const { return basin_id_; }
    void set_basin_id(std::string id) { basin_id_ = std::move(id); }

    /// Rejects duplicate variable ids.
    void add(MonthlySeries series);

    bool contains(std::string_view variable_id) const;
    const MonthlySeries& at(std::string_view variable_id) const;
    const std::vector<MonthlySeries>& series() const { return series_; }
    std::vector<std::string> variable_ids() const;

private:
    std::string basin_id_;
    std::vector<MonthlySeries> series_;
};

/// Standardization parameters; std is the population standard deviation.
struct ZScoreParams {
    double mean = 0.0;
    double std = 1.0;

    bool operator==(const ZScoreParams&) const = default;
};

/**
 * Aligned months-by-variables block of standardized values. When produced
 * in training mode each column has mean 0 and population std 1; in
 * evaluation mode the stored training parameters are applied instead.
 */
struct DesignMatrix {
    MonthStamp start{};
    std::vector<std::string> column_ids;
    Matrix values;
    std::vector<ZScoreParams> params;

    std::size_t rows() const { return values.rows(); }
    std::size_t cols() const { return values.cols(); }
    MonthStamp stamp(std::size_t row) const {
        return start.plus_months(static_cast<long long>(row));
    }
};

enum class AggregateMethod { sum, mean };
enum class MissingPolicy { reject, skip };

/**
 * Collapse a daily record to one value per calendar month. `sum` suits
 * fluxes (precipitation totals), `mean` suits states (temperature, SWE);
 * the caller declares which. Under the reject policy any month missing a
 * day throws IncompleteMonth; under skip, present days are aggregated.
 */
MonthlySeries aggregate_daily_to_monthly(const DatedSeries& daily, AggregateMethod method,
                                         MissingPolicy policy);

/**
 * Z-score a series. Without params the mean and population std are
 * computed from the series itself (training mode); with params they are
 * applied as stored (evaluation mode). Returns the transformed series and
 * the parameters that were used.
 */
std::pair<MonthlySeries, ZScoreParams> standardize(const MonthlySeries& series,
                                                   std::optional<ZScoreParams> params = {});

/// Inverse of `standardize` for the same parameters.
MonthlySeries destandardize(const MonthlySeries& series, const ZScoreParams& params);

/// Value minus the long-term mean of its calendar month over the record.
MonthlySeries monthly_climatology_anomaly(const MonthlySeries& series);

/**
 * Align the requested variables onto the intersection of their stamp
 * ranges and standardize each column (training mode), or apply
 * `stored_params` positionally (evaluation mode). Ranges are trimmed of
 * leading/trailing missing values first; a missing value interior to the
 * intersection is an error. No imputation is ever performed: a silent
 * gap fill would contaminate every statistic computed downstream.
 */
DesignMatrix align(const BasinTable& table, const std::vector<std::string>& variables,
                   const std::optional<std::vector<ZScoreParams>>& stored_params = {});

/// Restrict a series to the intersection with [first, last]; error when empty.
MonthlySeries restrict_series(const MonthlySeries& series, MonthStamp first, MonthStamp last);

/// Restrict every series of the table to [first, last].
BasinTable restrict_table(const BasinTable& table, MonthStamp first, MonthStamp last);

/// Unit for the conventional variable ids this tool ships with ("" if unknown).
std::string default_unit(std::string_view variable_id);

}  // namespace snodri
