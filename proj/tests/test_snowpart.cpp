#include "snodri/errors.hpp"
#include "snodri/snowpart.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace snodri;

namespace {

// Oracle constants restated independently of the implementation; the
// saturation curve is part of the module contract.
double oracle_es(double t) {
    double tc = t - 273.15;
    return 610.94 * std::exp(17.625 * tc / (tc + 243.04));
}

double oracle_wet_bulb(double t_air, double e, double p) {
    auto g = [&](double tw) { return oracle_es(tw) - e - 6.6e-4 * p * (t_air - tw); };
    double lo = t_air - 80.0, hi = t_air;
    for (int i = 0; i < 300; ++i) {
        double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double q_from_relative_humidity(double t_air, double rh, double p) {
    double e = rh * oracle_es(t_air);
    return 0.622 * e / (p - 0.378 * e);
}

}  // namespace

TEST_SUITE("snowpart") {

TEST_CASE("wet bulb matches the independent bisection oracle") {
    struct Case {
        double t, rh, p;
    };
    for (Case c : std::vector<Case>{{293.15, 0.5, 101325.0},
                                    {273.15, 0.8, 90000.0},
                                    {263.15, 0.3, 85000.0},
                                    {303.15, 0.2, 101325.0},
                                    {278.0, 0.95, 70000.0}}) {
        double q = q_from_relative_humidity(c.t, c.rh, c.p);
        double e = q * c.p / (0.622 + 0.378 * q);
        double want = oracle_wet_bulb(c.t, e, c.p);
        double got = wet_bulb_temperature(c.t, q, c.p);
        CHECK(std::abs(got - want) < 2e-4);
    }
}

TEST_CASE("reference point: 20 C, half saturation, sea level") {
    double q = q_from_relative_humidity(293.15, 0.5, 101325.0);
    double tw = wet_bulb_temperature(293.15, q, 101325.0);
    CHECK(tw > 286.0);
    CHECK(tw < 288.0);
}

TEST_CASE("saturated air keeps its temperature") {
    for (double t : {260.0, 273.15, 293.15}) {
        double q = q_from_relative_humidity(t, 1.0, 95000.0);
        CHECK(std::abs(wet_bulb_temperature(t, q, 95000.0) - t) < 0.01);
    }
}

TEST_CASE("unsaturated air cools strictly") {
    for (double rh : {0.1, 0.5, 0.9}) {
        double q = q_from_relative_humidity(285.0, rh, 98000.0);
        CHECK(wet_bulb_temperature(285.0, q, 98000.0) < 285.0);
    }
}

TEST_CASE("wet bulb input ranges are enforced") {
    CHECK_THROWS_AS(wet_bulb_temperature(170.0, 0.001, 90000.0), DataError);
    CHECK_THROWS_AS(wet_bulb_temperature(280.0, 0.08, 90000.0), DataError);
    CHECK_THROWS_AS(wet_bulb_temperature(280.0, 0.001, 5000.0), DataError);
}

TEST_CASE("sigmoid midpoint and asymptotes") {
    SigmoidParams params;  // defaults: midpoint 273.65 K, steepness 1.2
    CHECK(snow_fraction(params.midpoint_tw, params) == 0.5);
    SigmoidParams unit{273.65, 1.0};
    CHECK(snow_fraction(unit.midpoint_tw - 20.0, unit) > 0.999);
    CHECK(snow_fraction(unit.midpoint_tw + 20.0, unit) < 0.001);
}

TEST_CASE("sigmoid is strictly decreasing and inside (0,1)") {
    SigmoidParams params;
    double prev = 1.0;
    for (double tw = 250.0; tw <= 295.0; tw += 0.5) {
        double f = snow_fraction(tw, params);
        CHECK(f > 0.0);
        CHECK(f < 1.0);
        CHECK(f < prev);
        prev = f;
    }
}

TEST_CASE("sigmoid rejects bad parameters") {
    CHECK_THROWS_AS(snow_fraction(270.0, SigmoidParams{273.65, 0.0}), ConfigError);
    CHECK_THROWS_AS(snow_fraction(270.0, SigmoidParams{273.65, -1.0}), ConfigError);
}

TEST_CASE("monthly aggregation weights by precipitation") {
    SigmoidParams params{273.65, 1.2};
    // Wet-bulb values whose fractions are exactly 0.2 and 0.8.
    double tw_02 = params.midpoint_tw + std::log(4.0) / params.steepness;
    double tw_08 = params.midpoint_tw - std::log(4.0) / params.steepness;

    DatedSeries precip, tw;
    precip.dates = tw.dates = {{2000, 1, 1}, {2000, 1, 2}};
    precip.values = {5.0, 5.0};
    tw.values = {tw_02, tw_08};
    MonthlySnowFraction f = monthly_snow_fraction(precip, tw, params);
    CHECK(f.series.values[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(!f.zero_precip[0]);

    precip.values = {10.0, 0.0};  // all precipitation in the first step
    f = monthly_snow_fraction(precip, tw, params);
    CHECK(f.series.values[0] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("cold month with positive precipitation is nearly all snow") {
    SigmoidParams params{273.65, 1.0};
    DatedSeries precip, tw;
    for (int d = 1; d <= 31; ++d) {
        precip.dates.push_back({2000, 1, d});
        precip.values.push_back(3.0);
        tw.values.push_back(params.midpoint_tw - 25.0);
    }
    tw.dates = precip.dates;
    MonthlySnowFraction f = monthly_snow_fraction(precip, tw, params);
    CHECK(f.series.values[0] > 0.999);
}

TEST_CASE("zero-precipitation month falls back to the plain mean and is flagged") {
    SigmoidParams params;
    DatedSeries precip, tw;
    precip.dates = tw.dates = {{2000, 1, 1}, {2000, 1, 2}};
    precip.values = {0.0, 0.0};
    tw.values = {params.midpoint_tw, params.midpoint_tw};
    MonthlySnowFraction f = monthly_snow_fraction(precip, tw, params);
    CHECK(f.series.values[0] == doctest::Approx(0.5));
    CHECK(f.zero_precip[0]);
}

TEST_CASE("timestamp mismatch is rejected") {
    SigmoidParams params;
    DatedSeries precip, tw;
    precip.dates = {{2000, 1, 1}};
    precip.values = {1.0};
    tw.dates = {{2000, 1, 2}};
    tw.values = {270.0};
    CHECK_THROWS_AS(monthly_snow_fraction(precip, tw, params), DataError);
}

TEST_CASE("monthly-resolution series pipeline") {
    SigmoidParams params;
    MonthlySeries t, q, p;
    t.variable_id = "TMP";
    t.start = q.start = p.start = {2000, 1};
    t.values = {268.0, 272.0, 280.0};
    q.variable_id = "SPFH";
    q.values = {0.002, 0.003, 0.006};
    p.variable_id = "PRES";
    p.values = {90000.0, 90000.0, 90000.0};
    MonthlySeries f = snow_fraction_series(t, q, p, params);
    CHECK(f.size() == 3);
    CHECK(f.values[0] > f.values[1]);
    CHECK(f.values[1] > f.values[2]);
    for (double v : f.values) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

}  // TEST_SUITE
