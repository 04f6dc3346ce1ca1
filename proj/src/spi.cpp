#include "snodri/spi.hpp"

#include "snodri/errors.hpp"
#include "snodri/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace snodri {

namespace {

constexpr double kProbFloor = 1e-6;  // keeps the quantile map finite

/// Thom's closed-form shape estimate from A = ln(mean) - mean(ln x).
double thom_shape(double a_stat) {
    return (1.0 + std::sqrt(1.0 + 4.0 * a_stat / 3.0)) / (4.0 * a_stat);
}

}  // namespace

double gamma_mixed_cdf(const GammaMixedFit& fit, double x) {
    if (x < 0.0) throw DataError("gamma_mixed_cdf expects x >= 0");
    if (x == 0.0) return fit.zero_prob / 2.0;
    return fit.zero_prob + (1.0 - fit.zero_prob) * stats::reg_lower_gamma(fit.shape, x / fit.scale);
}

GammaMixedFit fit_gamma_mixed(std::span<const double> sample) {
    if (sample.size() < 10)
        throw DataError("gamma fit needs at least 10 samples, got " +
                        std::to_string(sample.size()));

    std::size_t zeros = 0;
    double sum = 0.0;
    double log_sum = 0.0;
    std::size_t positives = 0;
    for (double v : sample) {
        if (!std::isfinite(v) || v < 0.0)
            throw DataError("gamma fit requires finite nonnegative samples");
        if (v == 0.0) {
            ++zeros;
        } else {
            ++positives;
            sum += v;
            log_sum += std::log(v);
        }
    }
    if (positives == 0) throw AllZero("gamma fit: every sample is zero");

    GammaMixedFit fit;
    fit.zero_prob = static_cast<double>(zeros) / static_cast<double>(sample.size());

    double mean = sum / static_cast<double>(positives);
    double a_stat = std::log(mean) - log_sum / static_cast<double>(positives);
    // a_stat >= 0 by Jensen; 0 only for a constant sample, where the MLE
    // shape diverges. Flooring keeps the fit finite and extremely sharp.
    a_stat = std::max(a_stat, 1e-12);

    double shape0 = thom_shape(a_stat);
    double shape = shape0;
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
        double f = std::log(shape) - stats::digamma(shape) - a_stat;
        double fp = 1.0 / shape - stats::trigamma(shape);
        double next = shape - f / fp;
        if (!(next > 0.0)) next = shape / 2.0;
        double delta = std::abs(next - shape);
        shape = next;
        if (delta <= 1e-10 * std::max(1.0, shape)) {
            converged = true;
            break;
        }
    }
    if (!converged) shape = shape0;

    fit.shape = shape;
    fit.scale = mean / shape;
    fit.converged = converged;
    return fit;
}

MonthlySeries accumulate(const MonthlySeries& precip, int k) {
    if (k < 1) throw DataError("accumulation window must be >= 1");
    if (static_cast<std::size_t>(k) > precip.size())
        throw DataError("accumulation window " + std::to_string(k) + " exceeds series length " +
                        std::to_string(precip.size()));
    if (precip.has_missing())
        throw DataError("cannot accumulate series '" + precip.variable_id +
                        "' with missing values");

    MonthlySeries out;
    out.variable_id = precip.variable_id;
    out.unit = precip.unit;
    out.start = precip.start.plus_months(k - 1);
    out.values.resize(precip.size() - static_cast<std::size_t>(k) + 1);
    for (std::size_t t = 0; t < out.values.size(); ++t) {
        double s = 0.0;
        for (int j = 0; j < k; ++j) s += precip.values[t + static_cast<std::size_t>(j)];
        out.values[t] = s;
    }
    return out;
}

SpiSeries compute_spi(const MonthlySeries& precip, int k, std::optional<MonthStamp> fit_end,
                      Exec exec) {
    MonthlySeries acc = accumulate(precip, k);
    for (double v : acc.values)
        if (v < 0.0)
            throw DataError("negative accumulated precipitation in '" + precip.variable_id + "'");

    long long fit_end_idx =
        fit_end ? fit_end->index() : std::numeric_limits<long long>::max();

    std::array<std::vector<double>, 12> month_samples;
    for (std::size_t t = 0; t < acc.size(); ++t) {
        if (acc.stamp(t).index() > fit_end_idx) continue;
        month_samples[acc.stamp(t).month - 1].push_back(acc.values[t]);
    }
    for (int m = 0; m < 12; ++m)
        if (month_samples[m].size() < 10)
            throw DataError("calendar month " + std::to_string(m + 1) + " has only " +
                            std::to_string(month_samples[m].size()) +
                            " accumulation samples in the fit window; need at least 10");

    SpiSeries out;
    out.timescale_k = k;

    // Month fits are independent; each slot is written exactly once.
    std::exception_ptr fit_error;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
#endif
    for (int m = 0; m < 12; ++m) {
        try {
            out.month_fits[static_cast<std::size_t>(m)] = fit_gamma_mixed(month_samples[m]);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!fit_error) fit_error = std::current_exception();
        }
    }
    if (fit_error) std::rethrow_exception(fit_error);

    out.series.variable_id = "SPI" + std::to_string(k);
    out.series.unit = "z-score";
    out.series.start = acc.start;
    out.series.values.resize(acc.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
#endif
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(acc.size()); ++t) {
        const GammaMixedFit& fit =
            out.month_fits[static_cast<std::size_t>(acc.stamp(static_cast<std::size_t>(t)).month - 1)];
        double p = gamma_mixed_cdf(fit, acc.values[static_cast<std::size_t>(t)]);
        p = std::clamp(p, kProbFloor, 1.0 - kProbFloor);
        out.series.values[static_cast<std::size_t>(t)] = stats::normal_quantile(p);
    }
    return out;
}

}  // namespace snodri
