#include "snodri/index.hpp"

#include "snodri/errors.hpp"
#include "snodri/stats.hpp"

#include <algorithm>
#include <cmath>

namespace snodri {

IndexSeries compose_index(const DesignMatrix& z, const WeightVector& w,
                          std::optional<ZScoreParams> stored_params) {
    if (z.column_ids != w.variable_ids)
        throw DataError("weight vector columns do not match design matrix columns");
    bool any_positive = false;
    for (double wi : w.weights) {
        if (wi < 0.0 || !std::isfinite(wi)) throw DataError("weights must be finite and >= 0");
        if (wi > 0.0) any_positive = true;
    }
    if (!any_positive) throw NumericError("all index weights are zero");
    if (z.rows() == 0) throw DataError("empty design matrix");

    IndexSeries out;
    out.raw_weighted_sum.variable_id = "raw_weighted_sum";
    out.raw_weighted_sum.unit = "1";
    out.raw_weighted_sum.start = z.start;
    out.raw_weighted_sum.values.resize(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < z.cols(); ++j) acc += w.weights[j] * z.values(i, j);
        out.raw_weighted_sum.values[i] = acc;
    }

    auto [snodri, params] = standardize(out.raw_weighted_sum, stored_params);
    out.snodri = std::move(snodri);
    out.snodri.variable_id = "snodri";
    out.params = params;
    return out;
}

namespace {

struct Overlap {
    long long lo;
    long long hi;
};

Overlap overlap_of(const MonthlySeries& a, const MonthlySeries& b) {
    return {std::max(a.start.index(), b.start.index()),
            std::min(a.last_stamp().index(), b.last_stamp().index())};
}

}  // namespace

EvaluationReport evaluate_index(const IndexSeries& idx, const MonthlySeries& swe_anomaly,
                                const MonthlySeries& discharge,
                                const std::vector<EventWindow>& event_windows) {
    const MonthlySeries& s = idx.snodri;
    if (s.empty()) throw DataError("empty index series");

    Overlap o = overlap_of(s, swe_anomaly);
    o.lo = std::max(o.lo, discharge.start.index());
    o.hi = std::min(o.hi, discharge.last_stamp().index());
    long long n = o.hi - o.lo + 1;
    if (n < 12)
        throw DataError("index and indicators overlap on " +
                        std::to_string(std::max<long long>(n, 0)) + " months; need at least 12");

    std::vector<double> vi, vs, vq;
    vi.reserve(static_cast<std::size_t>(n));
    for (long long t = o.lo; t <= o.hi; ++t) {
        MonthStamp stamp = MonthStamp::from_index(t);
        vi.push_back(s.values[*s.offset_of(stamp)]);
        vs.push_back(swe_anomaly.values[*swe_anomaly.offset_of(stamp)]);
        vq.push_back(discharge.values[*discharge.offset_of(stamp)]);
    }
    for (std::size_t i = 0; i < vi.size(); ++i)
        if (std::isnan(vi[i]) || std::isnan(vs[i]) || std::isnan(vq[i]))
            throw DataError("missing values inside the evaluation overlap");

    EvaluationReport report;
    report.overlap_months = static_cast<int>(n);
    report.pearson_corr_swe_anomaly = stats::pearson(vi, vs);
    report.pearson_corr_discharge = stats::pearson(vi, vq);

    // Near-zero anomaly months carry no sign information; skip them.
    double dead_band = 0.1 * stats::population_std(vs);
    int counted = 0;
    int agree = 0;
    for (std::size_t i = 0; i < vi.size(); ++i) {
        if (std::abs(vs[i]) <= dead_band) continue;
        ++counted;
        if ((vi[i] > 0.0) == (vs[i] > 0.0)) ++agree;
    }
    report.sign_months_counted = counted;
    report.sign_coincidence =
        counted > 0 ? static_cast<double>(agree) / static_cast<double>(counted) : 0.0;

    for (const EventWindow& w : event_windows) {
        if (w.last < w.first)
            throw ConfigError("event window " + w.first.to_string() + ".." + w.last.to_string() +
                              " is reversed");
        EventRow row;
        row.window = w;
        double sum = 0.0;
        for (long long t = w.first.index(); t <= w.last.index(); ++t) {
            auto off = s.offset_of(MonthStamp::from_index(t));
            if (!off || std::isnan(s.values[*off])) continue;
            sum += s.values[*off];
            ++row.n_months;
        }
        row.mean_index = row.n_months > 0 ? sum / row.n_months : 0.0;
        report.events.push_back(row);
    }
    return report;
}

}  // namespace snodri
