#pragma once

#include "snodri/timeseries.hpp"

namespace snodri {

/// Rain-snow sigmoid parameters on wet-bulb temperature.
struct SigmoidParams {
    double midpoint_tw = 273.65;  // K, wet-bulb of 50% snow
    double steepness = 1.2;       // 1/K

    bool operator==(const SigmoidParams&) const = default;
};

/**
 * Saturation vapor pressure over water, Pa. Magnus form with the
 * Alduchov–Eskridge constants:
 *   e_s(T) = 610.94 * exp(17.625 * (T - 273.15) / ((T - 273.15) + 243.04))
 */
double saturation_vapor_pressure(double t_kelvin);

/// Vapor pressure (Pa) from specific humidity (kg/kg) and pressure (Pa).
double vapor_pressure(double q, double p);

/**
 * Wet-bulb temperature (K) from air temperature (K), specific humidity
 * (kg/kg), and pressure (Pa). Solves the psychrometric balance
 *   e_s(Tw) - e = gamma * p * (T - Tw),   gamma = 6.6e-4 1/K
 * by bisection on [t_air - 60, t_air] to 1e-4 K. Supersaturated input
 * returns t_air (evaporative cooling cannot exceed saturation).
 */
double wet_bulb_temperature(double t_air, double q, double p);

/// Snow fraction of precipitation: 1 / (1 + exp(steepness * (tw - midpoint))).
double snow_fraction(double tw, const SigmoidParams& params);

struct MonthlySnowFraction {
    MonthlySeries series;          // variable_id "SNOWFRAC", values in [0,1]
    std::vector<bool> zero_precip; // per month: total precipitation was zero
};

/**
 * Aggregate per-step snow fractions to monthly values weighted by
 * precipitation. A month with zero total precipitation gets the
 * unweighted mean fraction and is flagged.
 */
MonthlySnowFraction monthly_snow_fraction(const DatedSeries& precip, const DatedSeries& tw,
                                          const SigmoidParams& params);

/**
 * Snow fraction series for already-monthly inputs: per month, wet bulb
 * from (t_air, q, p) then the sigmoid. All three series must cover
 * identical stamps.
 */
MonthlySeries snow_fraction_series(const MonthlySeries& t_air, const MonthlySeries& q,
                                   const MonthlySeries& p, const SigmoidParams& params);

}  // namespace snodri
