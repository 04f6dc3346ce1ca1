#include "snodri/errors.hpp"
#include "snodri/index.hpp"
#include "snodri/rng.hpp"
#include "snodri/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace snodri;

namespace {

DesignMatrix random_design(std::size_t n, std::vector<std::string> ids, std::uint64_t seed) {
    DesignMatrix dm;
    dm.start = {1985, 1};
    dm.column_ids = std::move(ids);
    dm.values = Matrix(n, dm.column_ids.size());
    Rng rng(seed);
    for (double& v : dm.values.data()) v = rng.normal();
    return dm;
}

MonthlySeries series_from(std::vector<double> v, MonthStamp start, std::string id) {
    MonthlySeries s;
    s.variable_id = std::move(id);
    s.start = start;
    s.values = std::move(v);
    return s;
}

}  // namespace

TEST_SUITE("index") {

TEST_CASE("a single nonzero weight reproduces that standardized column") {
    DesignMatrix dm = random_design(120, {"a", "b", "c"}, 401);
    WeightVector w;
    w.variable_ids = dm.column_ids;
    w.weights = {0.0, 0.7, 0.0};
    IndexSeries idx = compose_index(dm, w);

    std::vector<double> col;
    dm.values.column_copy_into(1, col);
    MonthlySeries col_series = series_from(col, dm.start, "b");
    auto [z, params] = standardize(col_series);
    for (std::size_t i = 0; i < z.values.size(); ++i)
        CHECK(idx.snodri.values[i] == doctest::Approx(z.values[i]).epsilon(1e-9));
}

TEST_CASE("scaling every weight by a constant leaves the index unchanged") {
    DesignMatrix dm = random_design(150, {"a", "b", "c", "d"}, 402);
    WeightVector w;
    w.variable_ids = dm.column_ids;
    w.weights = {0.4, 0.1, 0.9, 0.2};
    WeightVector ws = w;
    for (double& v : ws.weights) v *= 3.7;
    IndexSeries a = compose_index(dm, w);
    IndexSeries b = compose_index(dm, ws);
    for (std::size_t i = 0; i < a.snodri.values.size(); ++i)
        CHECK(a.snodri.values[i] == doctest::Approx(b.snodri.values[i]).epsilon(1e-12));
}

TEST_CASE("training mode yields mean zero and unit std") {
    DesignMatrix dm = random_design(200, {"a", "b"}, 403);
    WeightVector w;
    w.variable_ids = dm.column_ids;
    w.weights = {1.0, 0.5};
    IndexSeries idx = compose_index(dm, w);
    CHECK(std::abs(stats::mean(idx.snodri.values)) < 1e-9);
    CHECK(stats::population_std(idx.snodri.values) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(idx.snodri.unit == "z-score");
    CHECK(idx.snodri.start == dm.start);
}

TEST_CASE("permuting columns together with their weights changes nothing") {
    DesignMatrix dm = random_design(100, {"a", "b", "c"}, 404);
    WeightVector w;
    w.variable_ids = dm.column_ids;
    w.weights = {0.2, 0.5, 0.3};

    DesignMatrix dmp;
    dmp.start = dm.start;
    dmp.column_ids = {"c", "a", "b"};
    dmp.values = Matrix(dm.rows(), 3);
    for (std::size_t i = 0; i < dm.rows(); ++i) {
        dmp.values(i, 0) = dm.values(i, 2);
        dmp.values(i, 1) = dm.values(i, 0);
        dmp.values(i, 2) = dm.values(i, 1);
    }
    WeightVector wp;
    wp.variable_ids = dmp.column_ids;
    wp.weights = {0.3, 0.2, 0.5};

    IndexSeries a = compose_index(dm, w);
    IndexSeries b = compose_index(dmp, wp);
    for (std::size_t i = 0; i < a.snodri.values.size(); ++i)
        CHECK(a.snodri.values[i] == doctest::Approx(b.snodri.values[i]).epsilon(1e-12));
}

TEST_CASE("stored params are applied unchanged in evaluation mode") {
    DesignMatrix train = random_design(120, {"a", "b"}, 405);
    WeightVector w;
    w.variable_ids = train.column_ids;
    w.weights = {0.6, 0.4};
    IndexSeries trained = compose_index(train, w);

    DesignMatrix eval = random_design(60, {"a", "b"}, 406);
    eval.start = {1995, 1};
    IndexSeries applied = compose_index(eval, w, trained.params);
    CHECK(applied.params.mean == trained.params.mean);
    CHECK(applied.params.std == trained.params.std);
    for (std::size_t i = 0; i < applied.snodri.values.size(); ++i) {
        double expect =
            (applied.raw_weighted_sum.values[i] - trained.params.mean) / trained.params.std;
        CHECK(applied.snodri.values[i] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("compose rejects bad weights") {
    DesignMatrix dm = random_design(50, {"a", "b"}, 407);
    WeightVector w;
    w.variable_ids = dm.column_ids;

    w.weights = {0.0, 0.0};
    CHECK_THROWS_AS(compose_index(dm, w), NumericError);

    w.weights = {-0.1, 0.5};
    CHECK_THROWS_AS(compose_index(dm, w), DataError);

    w.variable_ids = {"a", "wrong"};
    w.weights = {0.5, 0.5};
    CHECK_THROWS_AS(compose_index(dm, w), DataError);
}

TEST_CASE("an index equal to the anomaly evaluates perfectly") {
    Rng rng(408);
    std::size_t n = 48;
    std::vector<double> anomaly(n);
    for (double& v : anomaly) v = rng.normal();
    MonthlySeries swe = series_from(anomaly, {2000, 1}, "SWE_ANOM");

    IndexSeries idx;
    idx.snodri = series_from(anomaly, {2000, 1}, "snodri");
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = 5.0 + 2.0 * anomaly[i];
    MonthlySeries discharge = series_from(q, {2000, 1}, "Q");

    EvaluationReport r = evaluate_index(idx, swe, discharge, {});
    CHECK(r.pearson_corr_swe_anomaly == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.pearson_corr_discharge == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.sign_coincidence == doctest::Approx(1.0));
    CHECK(r.overlap_months == 48);

    // Negating the index flips both correlations and zeroes the coincidence.
    for (double& v : idx.snodri.values) v = -v;
    EvaluationReport rn = evaluate_index(idx, swe, discharge, {});
    CHECK(rn.pearson_corr_swe_anomaly == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(rn.sign_coincidence == doctest::Approx(0.0));
}

TEST_CASE("evaluation uses only the stamp overlap") {
    Rng rng(409);
    std::vector<double> base(60);
    for (double& v : base) v = rng.normal();
    IndexSeries idx;
    idx.snodri = series_from(base, {2000, 1}, "snodri");

    // SWE covers 2001-01 on, discharge ends 2003-12: overlap is 36 months.
    std::vector<double> swe_v(base.begin() + 12, base.end());
    MonthlySeries swe = series_from(swe_v, {2001, 1}, "SWE_ANOM");
    std::vector<double> q_v(base.begin(), base.begin() + 48);
    MonthlySeries q = series_from(q_v, {2000, 1}, "Q");

    EvaluationReport r = evaluate_index(idx, swe, q, {});
    CHECK(r.overlap_months == 36);
    CHECK(r.pearson_corr_swe_anomaly == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("short overlap is rejected") {
    std::vector<double> v(11, 0.5);
    IndexSeries idx;
    idx.snodri = series_from(v, {2000, 1}, "snodri");
    MonthlySeries swe = series_from(v, {2000, 1}, "SWE_ANOM");
    MonthlySeries q = series_from(v, {2000, 1}, "Q");
    CHECK_THROWS_AS(evaluate_index(idx, swe, q, {}), DataError);
}

TEST_CASE("dead band months are excluded from sign counting") {
    // Anomaly alternates between +/-1 and a tiny value well inside 0.1 std.
    std::size_t n = 24;
    std::vector<double> anomaly(n), index_v(n), q(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i % 3 == 2) {
            anomaly[i] = 1e-4;  // dead band
            index_v[i] = -5.0;  // would disagree if counted
        } else {
            anomaly[i] = (i % 2 == 0) ? 1.0 : -1.0;
            index_v[i] = anomaly[i];
        }
        q[i] = static_cast<double>(i);
    }
    IndexSeries idx;
    idx.snodri = series_from(index_v, {2000, 1}, "snodri");
    MonthlySeries swe = series_from(anomaly, {2000, 1}, "SWE_ANOM");
    MonthlySeries discharge = series_from(q, {2000, 1}, "Q");

    EvaluationReport r = evaluate_index(idx, swe, discharge, {});
    CHECK(r.sign_months_counted == 16);
    CHECK(r.sign_coincidence == doctest::Approx(1.0));
}

TEST_CASE("event windows average the index over present months") {
    std::vector<double> v(24);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    IndexSeries idx;
    idx.snodri = series_from(v, {2000, 1}, "snodri");
    MonthlySeries swe = series_from(v, {2000, 1}, "SWE_ANOM");
    MonthlySeries q = series_from(v, {2000, 1}, "Q");

    std::vector<EventWindow> windows;
    windows.push_back({{2000, 3}, {2000, 5}});    // offsets 2,3,4 -> mean 3
    windows.push_back({{2001, 11}, {2002, 2}});   // offsets 22,23 inside -> mean 22.5
    EvaluationReport r = evaluate_index(idx, swe, q, windows);
    REQUIRE(r.events.size() == 2);
    CHECK(r.events[0].n_months == 3);
    CHECK(r.events[0].mean_index == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r.events[1].n_months == 2);
    CHECK(r.events[1].mean_index == doctest::Approx(22.5).epsilon(1e-12));

    std::vector<EventWindow> reversed;
    reversed.push_back({{2001, 5}, {2001, 2}});
    CHECK_THROWS_AS(evaluate_index(idx, swe, q, reversed), ConfigError);
}

}  // TEST_SUITE
