#pragma once

#include "snodri/mi.hpp"
#include "snodri/timeseries.hpp"

#include <optional>
#include <string>
#include <vector>

namespace snodri {

struct IndexSeries {
    MonthlySeries snodri;            // standardized; negative = drier than normal
    MonthlySeries raw_weighted_sum;  // pre-standardization weighted sum
    ZScoreParams params;             // standardization applied to the raw sum
};

/**
 * Weighted sum of the standardized input columns, then z-scored. Without
 * stored params the mean/std come from the given rows (training mode);
 * with them, they are applied unchanged, which is what keeps evaluation
 * months out of the index calibration.
 */
IndexSeries compose_index(const DesignMatrix& z, const WeightVector& w,
                          std::optional<ZScoreParams> stored_params = {});

struct EventWindow {
    MonthStamp first{};
    MonthStamp last{};
};

struct EventRow {
    EventWindow window;
    double mean_index = 0.0;
    int n_months = 0;
};

struct EvaluationReport {
    double pearson_corr_swe_anomaly = 0.0;
    double pearson_corr_discharge = 0.0;
    double sign_coincidence = 0.0;  // months with |anomaly| <= 0.1 std excluded
    int overlap_months = 0;
    int sign_months_counted = 0;
    std::vector<EventRow> events;
};

/**
 * Correlate the index against the SWE anomaly and discharge over their
 * stamp overlap (>= 12 months required), count sign agreement with the
 * anomaly outside a 0.1-std dead band, and average the index over each
 * flagged event window.
 */
EvaluationReport evaluate_index(const IndexSeries& idx, const MonthlySeries& swe_anomaly,
                                const MonthlySeries& discharge,
                                const std::vector<EventWindow>& event_windows);

}  // namespace snodri
