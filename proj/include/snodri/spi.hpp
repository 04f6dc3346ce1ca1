#pragma once

#include "snodri/matrix.hpp"
#include "snodri/timeseries.hpp"

#include <array>
#include <optional>

namespace snodri {

/**
 * Mixed gamma distribution for one calendar month of accumulated
 * precipitation: probability mass `zero_prob` at zero, a Gamma(shape,
 * scale) body above it. `converged` records whether the Newton refinement
 * of the maximum-likelihood shape reached tolerance; when it did not the
 * moment-style initial estimate is carried instead.
 */
struct GammaMixedFit {
    double zero_prob = 0.0;
    double shape = 1.0;
    double scale = 1.0;
    bool converged = true;

    bool operator==(const GammaMixedFit&) const = default;
};

/// CDF of the mixed distribution at x >= 0 (x == 0 maps to zero_prob/2).
double gamma_mixed_cdf(const GammaMixedFit& fit, double x);

/**
 * Fit the mixed gamma to one month's accumulation sample. Values must be
 * nonnegative; throws AllZero if no positive value exists. The positive
 * part is fitted by maximum likelihood: an initial shape from the
 * log-mean statistic, then Newton iterations on the profile likelihood
 * (tolerance 1e-10, at most 100 steps).
 */
GammaMixedFit fit_gamma_mixed(std::span<const double> sample);

/// Sum of the k months ending at each stamp; starts k-1 months after input.
MonthlySeries accumulate(const MonthlySeries& precip, int k);

/// Standardized precipitation index series with its fitted distributions.
struct SpiSeries {
    int timescale_k = 1;
    MonthlySeries series;
    std::array<GammaMixedFit, 12> month_fits{};
};

/**
 * SPI at timescale k: accumulate, fit a mixed gamma per calendar month,
 * map each value through its month's CDF and the standard normal
 * quantile. Probabilities are clamped to [1e-6, 1 - 1e-6] before the
 * quantile so extreme months stay finite. When `fit_end` is given, the
 * distributions are fitted only on accumulations ending at or before it
 * and then applied to the whole record.
 */
SpiSeries compute_spi(const MonthlySeries& precip, int k,
                      std::optional<MonthStamp> fit_end = {}, Exec exec = Exec::parallel);

}  // namespace snodri
