#include "snodri/errors.hpp"
#include "snodri/rng.hpp"
#include "snodri/spi.hpp"
#include "snodri/stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

using namespace snodri;

namespace {

MonthlySeries gamma_record(std::size_t months, double shape, double scale, std::uint64_t seed) {
    Rng rng(seed);
    MonthlySeries s;
    s.variable_id = "APCP";
    s.unit = "mm";
    s.start = {1950, 1};
    s.values.resize(months);
    for (double& v : s.values) v = rng.gamma(shape, scale);
    return s;
}

/// Oracle: invert the fitted mixed CDF at probability p by bisection.
double invert_fit(const GammaMixedFit& fit, double p) {
    double lo = 0.0, hi = 1.0;
    while (gamma_mixed_cdf(fit, hi) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (gamma_mixed_cdf(fit, mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("spi") {

TEST_CASE("accumulate hand examples") {
    MonthlySeries s;
    s.variable_id = "APCP";
    s.start = {2000, 1};
    s.values = {1, 2, 3, 4};

    MonthlySeries k1 = accumulate(s, 1);
    CHECK(k1.start == s.start);
    CHECK(k1.values == s.values);

    MonthlySeries k3 = accumulate(s, 3);
    CHECK(k3.start == MonthStamp{2000, 3});
    CHECK(k3.values == std::vector<double>{6, 9});

    CHECK_THROWS_AS(accumulate(s, 0), DataError);
    MonthlySeries year = gamma_record(12, 2, 3, 1);
    CHECK_THROWS_AS(accumulate(year, 13), DataError);
}

TEST_CASE("gamma fit recovers Monte Carlo parameters") {
    MonthlySeries draws = gamma_record(10000, 2.0, 3.0, 20240117);
    GammaMixedFit fit = fit_gamma_mixed(draws.values);
    CHECK(fit.zero_prob == 0.0);
    CHECK(fit.converged);
    CHECK(fit.shape == doctest::Approx(2.0).epsilon(0.10));
    CHECK(fit.scale == doctest::Approx(3.0).epsilon(0.10));
}

TEST_CASE("gamma fit counts zeros exactly") {
    std::vector<double> sample(100, 0.0);
    Rng rng(5);
    for (int i = 40; i < 100; ++i) sample[i] = rng.gamma(2.0, 1.0);
    GammaMixedFit fit = fit_gamma_mixed(sample);
    CHECK(fit.zero_prob == 0.4);
}

TEST_CASE("gamma fit degenerate inputs") {
    std::vector<double> zeros(50, 0.0);
    CHECK_THROWS_AS(fit_gamma_mixed(zeros), AllZero);
    std::vector<double> few{1, 2, 3};
    CHECK_THROWS_AS(fit_gamma_mixed(few), DataError);
    std::vector<double> bad(20, 1.0);
    bad[3] = -0.5;
    CHECK_THROWS_AS(fit_gamma_mixed(bad), DataError);
}

TEST_CASE("mixed CDF zero-mass convention") {
    GammaMixedFit fit{0.4, 2.0, 3.0, true};
    CHECK(gamma_mixed_cdf(fit, 0.0) == 0.2);
    CHECK(gamma_mixed_cdf(fit, 1e9) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("SPI of a long gamma record is calibrated") {
    MonthlySeries precip = gamma_record(1000, 2.0, 30.0, 77);
    SpiSeries spi = compute_spi(precip, 3);
    CHECK(spi.series.start == MonthStamp{1950, 3});
    CHECK(spi.series.size() == 998);
    for (const GammaMixedFit& f : spi.month_fits) CHECK(f.converged);
    double m = stats::mean(spi.series.values);
    double sd = stats::population_std(spi.series.values);
    CHECK(std::abs(m) < 0.05);
    CHECK(sd > 0.9);
    CHECK(sd < 1.1);
    for (double v : spi.series.values) CHECK(std::isfinite(v));
}

TEST_CASE("zero-precipitation month maps to the quantile of half the zero mass") {
    // Januaries: 8 zeros among 20 -> q0 = 0.4; k = 1 keeps months separate.
    Rng rng(9);
    MonthlySeries precip;
    precip.variable_id = "APCP";
    precip.start = {1980, 1};
    for (int y = 0; y < 20; ++y)
        for (int m = 0; m < 12; ++m) {
            double v = rng.gamma(2.0, 20.0);
            if (m == 0 && y < 8) v = 0.0;
            precip.values.push_back(v);
        }
    SpiSeries spi = compute_spi(precip, 1);
    CHECK(spi.month_fits[0].zero_prob == 0.4);
    double want = stats::normal_quantile(0.2);
    for (std::size_t t = 0; t < spi.series.size(); ++t)
        if (spi.series.stamp(t).month == 1 && precip.values[t] == 0.0)
            CHECK(std::abs(spi.series.values[t] - want) < 1e-6);
}

TEST_CASE("a month at its fitted median maps near zero") {
    MonthlySeries precip = gamma_record(480, 2.0, 30.0, 31);
    SpiSeries reference = compute_spi(precip, 1);
    double median_jan = invert_fit(reference.month_fits[0], 0.5);

    // Extend past the fit window; the stored fits apply to the new months.
    MonthStamp fit_end = precip.last_stamp();
    MonthlySeries extended = precip;
    for (int m = 0; m < 12; ++m) extended.values.push_back(m == 0 ? median_jan : 50.0);
    SpiSeries spi = compute_spi(extended, 1, fit_end);
    double at_median = spi.series.values[spi.series.size() - 12];
    CHECK(spi.series.stamp(spi.series.size() - 12).month == 1);
    CHECK(std::abs(at_median) < 0.1);
}

TEST_CASE("fit window excludes later months") {
    MonthlySeries precip = gamma_record(480, 2.0, 30.0, 32);
    MonthStamp fit_end = precip.start.plus_months(359);
    MonthlySeries poisoned = precip;
    for (std::size_t t = 360; t < 480; ++t) poisoned.values[t] = 123456.0;
    SpiSeries a = compute_spi(precip, 3, fit_end);
    SpiSeries b = compute_spi(poisoned, 3, fit_end);
    CHECK(a.month_fits == b.month_fits);
    for (std::size_t t = 0; t + 120 < a.series.size(); ++t)
        CHECK(a.series.values[t] == b.series.values[t]);
}

TEST_CASE("SPI is monotone in accumulation within a calendar month") {
    MonthlySeries precip = gamma_record(600, 1.5, 25.0, 33);
    int k = 4;
    SpiSeries spi = compute_spi(precip, k);
    MonthlySeries acc = accumulate(precip, k);
    std::map<int, std::vector<std::pair<double, double>>> by_month;
    for (std::size_t t = 0; t < acc.size(); ++t)
        by_month[acc.stamp(t).month].emplace_back(acc.values[t], spi.series.values[t]);
    for (auto& [month, pairs] : by_month) {
        std::sort(pairs.begin(), pairs.end());
        for (std::size_t i = 1; i < pairs.size(); ++i)
            CHECK(pairs[i].second >= pairs[i - 1].second);
    }
}

TEST_CASE("SPI is invariant to positive rescaling of precipitation") {
    MonthlySeries precip = gamma_record(480, 2.0, 30.0, 34);
    MonthlySeries scaled = precip;
    for (double& v : scaled.values) v *= 3.7;
    SpiSeries a = compute_spi(precip, 6);
    SpiSeries b = compute_spi(scaled, 6);
    for (std::size_t t = 0; t < a.series.size(); ++t)
        CHECK(std::abs(a.series.values[t] - b.series.values[t]) < 1e-6);
}

TEST_CASE("probability clamp keeps extremes finite") {
    MonthlySeries precip = gamma_record(480, 2.0, 30.0, 35);
    MonthStamp fit_end = precip.last_stamp();
    MonthlySeries extended = precip;
    extended.values.push_back(1e9);  // far beyond anything in the fit window
    SpiSeries spi = compute_spi(extended, 1, fit_end);
    double v = spi.series.values.back();
    CHECK(std::isfinite(v));
    CHECK(v <= stats::normal_quantile(1.0 - 1e-6));
}

TEST_CASE("too few samples per calendar month is an error") {
    MonthlySeries precip = gamma_record(60, 2.0, 30.0, 36);  // five years
    CHECK_THROWS_AS(compute_spi(precip, 3), DataError);
}

TEST_CASE("serial and parallel SPI agree bitwise") {
    MonthlySeries precip = gamma_record(480, 2.0, 30.0, 37);
    SpiSeries a = compute_spi(precip, 3, {}, Exec::serial);
    SpiSeries b = compute_spi(precip, 3, {}, Exec::parallel);
    CHECK(a.series.values == b.series.values);
    CHECK(a.month_fits == b.month_fits);
}

}  // TEST_SUITE
