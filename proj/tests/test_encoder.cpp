#include "snodri/encoder.hpp"
#include "snodri/errors.hpp"
#include "snodri/rng.hpp"
#include "snodri/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

using namespace snodri;

namespace {

NetworkSpec small_spec(std::size_t d) {
    NetworkSpec spec;
    spec.input_dim = d;
    return spec;
}

Matrix random_batch(std::size_t rows, std::size_t d, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    Matrix m(rows, d);
    for (double& v : m.data()) v = scale * rng.normal();
    return m;
}

/// Latent signal replicated across columns with distinct gains, then
/// standardized, giving an exactly rank-1 design matrix.
DesignMatrix rank_one_design(std::size_t rows, std::size_t cols, std::uint64_t seed,
                             std::vector<double>& latent_out) {
    Rng rng(seed);
    latent_out.resize(rows);
    double state = 0.0;
    for (std::size_t t = 0; t < rows; ++t) {
        state = 0.6 * state + 0.8 * rng.normal();
        latent_out[t] = state;
    }
    DesignMatrix dm;
    dm.start = {1990, 1};
    dm.values = Matrix(rows, cols);
    for (std::size_t j = 0; j < cols; ++j) {
        dm.column_ids.push_back("v" + std::to_string(j));
        double gain = (j % 2 == 0 ? 1.0 : -1.0) * (0.5 + 0.25 * static_cast<double>(j));
        std::vector<double> col(rows);
        for (std::size_t t = 0; t < rows; ++t) col[t] = gain * latent_out[t];
        double mu = stats::mean(col);
        double sd = stats::population_std(col);
        dm.params.push_back({mu, sd});
        for (std::size_t t = 0; t < rows; ++t) dm.values(t, j) = (col[t] - mu) / sd;
    }
    return dm;
}

double central_difference(const NetworkSpec& spec, NetworkWeights& weights, const Matrix& batch,
                          double delta, double* param) {
    const double h = 1e-5;
    double saved = *param;
    *param = saved + h;
    double up = compute_loss_and_gradients(spec, weights, batch, delta, Exec::serial).loss;
    *param = saved - h;
    double down = compute_loss_and_gradients(spec, weights, batch, delta, Exec::serial).loss;
    *param = saved;
    return (up - down) / (2.0 * h);
}

}  // namespace

TEST_SUITE("encoder") {

TEST_CASE("huber loss branch values") {
    CHECK(huber_loss(0.0, 1.0) == 0.0);
    CHECK(huber_loss(0.5, 1.0) == 0.125);
    CHECK(huber_loss(3.0, 1.0) == 2.5);
    CHECK(huber_loss(-3.0, 1.0) == 2.5);
    CHECK(huber_loss(1.0, 1.0) == 0.5);  // boundary belongs to the quadratic branch
    CHECK_THROWS_AS(huber_loss(1.0, 0.0), ConfigError);
}

TEST_CASE("zero weights map everything to zero") {
    NetworkSpec spec = small_spec(4);
    NetworkWeights w;
    auto sizes = spec.layer_sizes();
    for (std::size_t l = 0; l < 4; ++l) {
        w.w.push_back(Matrix(sizes[l], sizes[l + 1], 0.0));
        w.b.push_back(std::vector<double>(sizes[l + 1], 0.0));
    }
    Matrix batch = random_batch(6, 4, 1);
    ForwardResult out = forward(spec, w, batch);
    for (double v : out.bottleneck.data()) CHECK(v == 0.0);
    for (double v : out.reconstruction.data()) CHECK(v == 0.0);
}

TEST_CASE("bottleneck values stay strictly inside (-1, 1)") {
    NetworkSpec spec = small_spec(5);
    NetworkWeights w = init_weights(spec, 42);
    Matrix batch = random_batch(30, 5, 2, 10.0);  // large inputs push tanh hard
    ForwardResult out = forward(spec, w, batch);
    for (double v : out.bottleneck.data()) {
        CHECK(v > -1.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("forward rejects wrong widths") {
    NetworkSpec spec = small_spec(4);
    NetworkWeights w = init_weights(spec, 1);
    Matrix wide = random_batch(3, 5, 3);
    CHECK_THROWS_AS(forward(spec, w, wide), DataError);
}

TEST_CASE("initial weights respect the fan-in bound") {
    NetworkSpec spec = small_spec(7);
    NetworkWeights w = init_weights(spec, 3);
    auto sizes = spec.layer_sizes();
    for (std::size_t l = 0; l < 4; ++l) {
        double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
        for (double v : w.w[l].data()) {
            CHECK(v >= -bound);
            CHECK(v <= bound);
        }
        for (double v : w.b[l]) {
            CHECK(v >= -bound);
            CHECK(v <= bound);
        }
    }
}

TEST_CASE("analytic gradients match central finite differences") {
    // delta = 0.5 with 2x-scaled data exercises both Huber branches.
    NetworkSpec spec = small_spec(3);
    const double delta = 0.5;
    double worst = 0.0;
    for (std::uint64_t draw = 0; draw < 3; ++draw) {
        NetworkWeights weights = init_weights(spec, 100 + draw);
        Matrix batch = random_batch(10, 3, 200 + draw, 2.0);

        ForwardResult fr = forward(spec, weights, batch, Exec::serial);
        int quad = 0, lin = 0;
        for (std::size_t i = 0; i < batch.rows(); ++i)
            for (std::size_t j = 0; j < batch.cols(); ++j)
                (std::abs(fr.reconstruction(i, j) - batch(i, j)) <= delta ? quad : lin) += 1;
        CHECK(quad > 0);
        CHECK(lin > 0);

        LossAndGradients lg =
            compute_loss_and_gradients(spec, weights, batch, delta, Exec::serial);
        for (std::size_t l = 0; l < 4; ++l) {
            for (std::size_t idx = 0; idx < weights.w[l].size(); ++idx) {
                double analytic = lg.gradients.w[l].data()[idx];
                double numeric = central_difference(spec, weights, batch, delta,
                                                    &weights.w[l].data()[idx]);
                double rel = std::abs(analytic - numeric) /
                             std::max(std::abs(analytic) + std::abs(numeric), 1e-5);
                worst = std::max(worst, rel);
            }
            for (std::size_t idx = 0; idx < weights.b[l].size(); ++idx) {
                double analytic = lg.gradients.b[l][idx];
                double numeric =
                    central_difference(spec, weights, batch, delta, &weights.b[l][idx]);
                double rel = std::abs(analytic - numeric) /
                             std::max(std::abs(analytic) + std::abs(numeric), 1e-5);
                worst = std::max(worst, rel);
            }
        }
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("loss is invariant to row permutation") {
    NetworkSpec spec = small_spec(4);
    NetworkWeights w = init_weights(spec, 8);
    Matrix batch = random_batch(24, 4, 9);
    Matrix reversed(24, 4);
    for (std::size_t i = 0; i < 24; ++i)
        for (std::size_t j = 0; j < 4; ++j) reversed(i, j) = batch(23 - i, j);
    double a = compute_loss_and_gradients(spec, w, batch, 1.0).loss;
    double b = compute_loss_and_gradients(spec, w, reversed, 1.0).loss;
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("training compresses rank-1 data into the bottleneck") {
    std::vector<double> latent;
    DesignMatrix dm = rank_one_design(240, 12, 12345, latent);
    TrainConfig cfg;
    cfg.seed = 7;
    TrainedEncoder model = train_autoencoder(dm, cfg);

    CHECK(model.loss_history.size() == 3000);
    CHECK(model.loss_history.back() < model.loss_history.front());

    MonthlySeries bneck = encode(model, dm);
    double corr = stats::pearson(bneck.values, latent);
    CHECK(std::abs(corr) > 0.99);
}

TEST_CASE("training is deterministic per seed") {
    std::vector<double> latent;
    DesignMatrix dm = rank_one_design(60, 5, 22, latent);
    TrainConfig cfg;
    cfg.epochs = 80;
    cfg.seed = 42;
    TrainedEncoder a = train_autoencoder(dm, cfg);
    TrainedEncoder b = train_autoencoder(dm, cfg);
    CHECK(a.weights == b.weights);
    CHECK(a.loss_history == b.loss_history);
}

TEST_CASE("serial and parallel training agree bitwise") {
    std::vector<double> latent;
    DesignMatrix dm = rank_one_design(200, 8, 23, latent);
    TrainConfig cfg;
    cfg.epochs = 40;
    cfg.seed = 43;
    TrainedEncoder a = train_autoencoder(dm, cfg, Exec::serial);
    TrainedEncoder b = train_autoencoder(dm, cfg, Exec::parallel);
    CHECK(a.weights == b.weights);
    CHECK(a.loss_history == b.loss_history);
}

TEST_CASE("encode matches the bottleneck of forward") {
    std::vector<double> latent;
    DesignMatrix dm = rank_one_design(48, 6, 24, latent);
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.seed = 44;
    TrainedEncoder model = train_autoencoder(dm, cfg);
    MonthlySeries enc = encode(model, dm);
    ForwardResult fr = forward(model.spec, model.weights, dm.values);
    for (std::size_t i = 0; i < enc.size(); ++i) {
        CHECK(enc.values[i] == fr.bottleneck(i, 0));
        CHECK(enc.values[i] > -1.0);
        CHECK(enc.values[i] < 1.0);
    }
    CHECK(enc.start == dm.start);
}

TEST_CASE("too few rows is rejected") {
    std::vector<double> latent;
    DesignMatrix dm = rank_one_design(20, 4, 25, latent);
    TrainConfig cfg;
    CHECK_THROWS_AS(train_autoencoder(dm, cfg), DataError);
}

TEST_CASE("model persistence round-trips bit-exactly") {
    std::vector<double> latent;
    DesignMatrix dm = rank_one_design(48, 5, 26, latent);
    TrainConfig cfg;
    cfg.epochs = 25;
    cfg.seed = 77;
    TrainedEncoder model = train_autoencoder(dm, cfg);

    std::filesystem::path path =
        std::filesystem::temp_directory_path() / "snodri_model_roundtrip.json";
    save_encoder(model, path);
    TrainedEncoder loaded = load_encoder(path);
    CHECK(loaded.weights == model.weights);
    CHECK(loaded.column_ids == model.column_ids);
    CHECK(loaded.loss_history == model.loss_history);
    CHECK(loaded.config == model.config);

    CHECK(encoder_to_json(loaded) == encoder_to_json(model));
    std::remove(path.c_str());
}

TEST_CASE("malformed model documents are rejected") {
    CHECK_THROWS_AS(encoder_from_json("not json"), DataError);
    CHECK_THROWS_AS(encoder_from_json("{}"), DataError);
    CHECK_THROWS_AS(encoder_from_json(R"({"format_version": 2})"), DataError);
}

}  // TEST_SUITE
