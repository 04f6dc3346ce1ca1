#include "snodri/encoder.hpp"
#include "snodri/featsel.hpp"
#include "snodri/mi.hpp"
#include "snodri/spi.hpp"
#include "snodri/synth.hpp"
#include "snodri/timeseries.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace {

using namespace snodri;

template <typename F>
double best_ms(int reps, F&& f) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        f();
        auto t1 = std::chrono::steady_clock::now();
        double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        if (ms < best) best = ms;
    }
    return best;
}

struct Row {
    std::string name;
    double serial_ms = 0.0;
    double parallel_ms = 0.0;
    bool match = false;
};

void print_rows(const std::vector<Row>& rows) {
    std::printf("%-14s %12s %12s %9s %8s\n", "kernel", "serial ms", "parallel ms", "speedup",
                "match");
    for (const Row& r : rows)
        std::printf("%-14s %12.2f %12.2f %8.2fx %8s\n", r.name.c_str(), r.serial_ms,
                    r.parallel_ms, r.serial_ms / r.parallel_ms, r.match ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs OpenMP timings for the heavy kernels"};
    int years = 150;
    int reps = 3;
    int trees = 200;
    int epochs = 400;
    app.add_option("--years", years, "synthetic record length in years")->check(CLI::Range(10, 2000));
    app.add_option("--reps", reps, "repetitions per kernel, best kept")->check(CLI::Range(1, 20));
    app.add_option("--trees", trees, "forest size")->check(CLI::Range(1, 2000));
    app.add_option("--epochs", epochs, "autoencoder epochs")->check(CLI::Range(1, 20000));
    CLI11_PARSE(app, argc, argv);

    SynthConfig scfg;
    scfg.n_years = years;
    scfg.seed = 42;
    scfg.drought_winters = {{scfg.start_year + 5, 0.8}, {scfg.start_year + years / 2, 0.5}};
    SynthResult synth = generate_synthetic_basin(scfg);
    const BasinTable& table = synth.table;

    const std::vector<std::string> candidates = {"APCP", "TMP",  "DSWRF", "SPFH",
                                                 "PRES", "UGRD", "VGRD"};
    const std::vector<std::string> all_vars = {"APCP", "TMP",  "DSWRF", "SPFH", "PRES",
                                               "UGRD", "VGRD", "SWE",   "Q"};
    DesignMatrix xc = align(table, candidates);
    DesignMatrix xa = align(table, all_vars);
    std::vector<double> y = table.at("SWE").values;

    std::printf("rows %zu, candidate columns %zu, roster columns %zu, reps %d\n\n", xc.rows(),
                xc.cols(), xa.cols(), reps);

    std::vector<Row> rows;

    {
        Row r{"spi", 0, 0, false};
        const MonthlySeries& precip = table.at("APCP");
        SpiSeries a, b;
        r.serial_ms = best_ms(reps, [&] { a = compute_spi(precip, 12, {}, Exec::serial); });
        r.parallel_ms = best_ms(reps, [&] { b = compute_spi(precip, 12, {}, Exec::parallel); });
        r.match = a.series.values == b.series.values;
        rows.push_back(r);
    }

    {
        Row r{"forest", 0, 0, false};
        ForestHyperparams hp;
        hp.n_trees = trees;
        hp.seed = 42;
        Forest a, b;
        r.serial_ms =
            best_ms(reps, [&] { a = train_forest(xc.values, y, candidates, hp, Exec::serial); });
        r.parallel_ms =
            best_ms(reps, [&] { b = train_forest(xc.values, y, candidates, hp, Exec::parallel); });
        r.match = forest_importance(a).importances == forest_importance(b).importances;
        rows.push_back(r);
    }

    TrainConfig tc;
    tc.epochs = epochs;
    tc.seed = 42;
    TrainedEncoder trained;

    {
        Row r{"train", 0, 0, false};
        TrainedEncoder a, b;
        r.serial_ms = best_ms(reps, [&] { a = train_autoencoder(xa, tc, Exec::serial); });
        r.parallel_ms = best_ms(reps, [&] { b = train_autoencoder(xa, tc, Exec::parallel); });
        r.match = encoder_to_json(a) == encoder_to_json(b);
        trained = std::move(b);
        rows.push_back(r);
    }

    {
        Row r{"gradients", 0, 0, false};
        LossAndGradients a, b;
        r.serial_ms = best_ms(reps, [&] {
            a = compute_loss_and_gradients(trained.spec, trained.weights, xa.values,
                                           tc.huber_delta, Exec::serial);
        });
        r.parallel_ms = best_ms(reps, [&] {
            b = compute_loss_and_gradients(trained.spec, trained.weights, xa.values,
                                           tc.huber_delta, Exec::parallel);
        });
        r.match = a.loss == b.loss && a.gradients == b.gradients;
        rows.push_back(r);
    }

    MonthlySeries bottleneck;
    {
        Row r{"encode", 0, 0, false};
        MonthlySeries a, b;
        r.serial_ms = best_ms(reps, [&] { a = encode(trained, xa, Exec::serial); });
        r.parallel_ms = best_ms(reps, [&] { b = encode(trained, xa, Exec::parallel); });
        r.match = a.values == b.values;
        bottleneck = std::move(b);
        rows.push_back(r);
    }

    {
        Row r{"mi", 0, 0, false};
        WeightVector a, b;
        r.serial_ms = best_ms(reps, [&] { a = compute_weights(xa, bottleneck, 0, Exec::serial); });
        r.parallel_ms =
            best_ms(reps, [&] { b = compute_weights(xa, bottleneck, 0, Exec::parallel); });
        r.match = a.weights == b.weights;
        rows.push_back(r);
    }

    print_rows(rows);

    for (const Row& r : rows)
        if (!r.match) {
            std::fprintf(stderr, "serial and parallel outputs differ for %s\n", r.name.c_str());
            return 1;
        }
    return 0;
}
