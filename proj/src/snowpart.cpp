#include "snodri/snowpart.hpp"

#include "snodri/errors.hpp"

#include <cassert>
#include <cmath>
#include <string>

namespace snodri {

namespace {

constexpr double kPsychrometricGamma = 6.6e-4;  // 1/K

void check_sigmoid(const SigmoidParams& params) {
    if (!(params.steepness > 0.0)) throw ConfigError("sigmoid steepness must be positive");
    if (!std::isfinite(params.midpoint_tw)) throw ConfigError("sigmoid midpoint must be finite");
}

}  // namespace

double saturation_vapor_pressure(double t_kelvin) {
    double tc = t_kelvin - 273.15;
    return 610.94 * std::exp(17.625 * tc / (tc + 243.04));
}

double vapor_pressure(double q, double p) {
    return q * p / (0.622 + 0.378 * q);
}

double wet_bulb_temperature(double t_air, double q, double p) {
    if (!(t_air > 180.0 && t_air < 340.0))
        throw DataError("air temperature " + std::to_string(t_air) + " K outside (180, 340)");
    if (!(q >= 0.0 && q < 0.05))
        throw DataError("specific humidity " + std::to_string(q) + " outside [0, 0.05)");
    if (!(p > 1e4 && p < 1.1e5))
        throw DataError("pressure " + std::to_string(p) + " Pa outside (10000, 110000)");

    double e = vapor_pressure(q, p);
    if (e >= saturation_vapor_pressure(t_air)) return t_air;

    // Residual of the psychrometric balance; strictly increasing in tw.
    auto residual = [&](double tw) {
        return saturation_vapor_pressure(tw) - e - kPsychrometricGamma * p * (t_air - tw);
    };

    double lo = t_air - 60.0;
    double hi = t_air;
    assert(residual(lo) < 0.0 && residual(hi) > 0.0);
    while (hi - lo > 1e-4) {
        double mid = 0.5 * (lo + hi);
        (residual(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double snow_fraction(double tw, const SigmoidParams& params) {
    check_sigmoid(params);
    if (!std::isfinite(tw)) throw DataError("snow_fraction requires finite wet-bulb temperature");
    return 1.0 / (1.0 + std::exp(params.steepness * (tw - params.midpoint_tw)));
}

MonthlySnowFraction monthly_snow_fraction(const DatedSeries& precip, const DatedSeries& tw,
                                          const SigmoidParams& params) {
    check_sigmoid(params);
    if (precip.dates != tw.dates)
        throw DataError("precipitation and wet-bulb series must share timestamps");
    if (precip.dates.empty()) throw DataError("empty input to monthly_snow_fraction");

    MonthStamp first = precip.dates.front().month_stamp();
    MonthStamp last = precip.dates.back().month_stamp();
    std::size_t n_months = static_cast<std::size_t>(last.index() - first.index()) + 1;

    std::vector<double> weighted(n_months, 0.0);
    std::vector<double> precip_total(n_months, 0.0);
    std::vector<double> plain(n_months, 0.0);
    std::vector<int> counts(n_months, 0);
    for (std::size_t i = 0; i < precip.dates.size(); ++i) {
        if (precip.values[i] < 0.0)
            throw DataError("negative precipitation at " + precip.dates[i].to_string());
        std::size_t m =
            static_cast<std::size_t>(precip.dates[i].month_stamp().index() - first.index());
        double f = snow_fraction(tw.values[i], params);
        weighted[m] += f * precip.values[i];
        precip_total[m] += precip.values[i];
        plain[m] += f;
        counts[m] += 1;
    }

    MonthlySnowFraction out;
    out.series.variable_id = "SNOWFRAC";
    out.series.unit = "1";
    out.series.start = first;
    out.series.values.resize(n_months);
    out.zero_precip.resize(n_months, false);
    for (std::size_t m = 0; m < n_months; ++m) {
        if (counts[m] == 0)
            throw DataError("month " + first.plus_months(static_cast<long long>(m)).to_string() +
                            " has no timesteps");
        if (precip_total[m] > 0.0) {
            out.series.values[m] = weighted[m] / precip_total[m];
        } else {
            out.series.values[m] = plain[m] / counts[m];
            out.zero_precip[m] = true;
        }
    }
    return out;
}

MonthlySeries snow_fraction_series(const MonthlySeries& t_air, const MonthlySeries& q,
                                   const MonthlySeries& p, const SigmoidParams& params) {
    check_sigmoid(params);
    if (t_air.start != q.start || t_air.start != p.start || t_air.size() != q.size() ||
        t_air.size() != p.size())
        throw DataError("temperature, humidity, and pressure series must cover identical stamps");

    MonthlySeries out;
    out.variable_id = "SNOWFRAC";
    out.unit = "1";
    out.start = t_air.start;
    out.values.resize(t_air.size());
    for (std::size_t i = 0; i < t_air.size(); ++i) {
        double tw = wet_bulb_temperature(t_air.values[i], q.values[i], p.values[i]);
        out.values[i] = snow_fraction(tw, params);
    }
    return out;
}

}  // namespace snodri
