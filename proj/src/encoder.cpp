#include "snodri/encoder.hpp"

#include "snodri/errors.hpp"
#include "snodri/logging.hpp"
#include "snodri/rng.hpp"
#include "snodri/stats.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace snodri {

namespace {

void check_spec(const NetworkSpec& spec) {
    if (spec.input_dim < 1) throw ConfigError("encoder input dimension must be >= 1");
    if (spec.hidden_width < 1 || spec.bottleneck_width < 1)
        throw ConfigError("encoder layer widths must be >= 1");
}

void check_shapes(const NetworkSpec& spec, const NetworkWeights& weights) {
    auto sizes = spec.layer_sizes();
    if (weights.w.size() != 4 || weights.b.size() != 4)
        throw DataError("encoder needs exactly 4 weight matrices and bias vectors");
    for (std::size_t l = 0; l < 4; ++l) {
        if (weights.w[l].rows() != sizes[l] || weights.w[l].cols() != sizes[l + 1])
            throw DataError("weight matrix " + std::to_string(l) + " has wrong shape");
        if (weights.b[l].size() != sizes[l + 1])
            throw DataError("bias vector " + std::to_string(l) + " has wrong length");
    }
}

struct Activations {
    Matrix h1;    // rows x hidden
    Matrix bneck; // rows x 1
    Matrix h2;    // rows x hidden
    Matrix recon; // rows x d
};

Activations run_forward(const NetworkWeights& w, const Matrix& batch, Exec exec) {
    Activations act;
    act.h1 = matmul(batch, w.w[0], exec);
    add_row_vector(act.h1, w.b[0], exec);
    apply_tanh(act.h1, exec);

    act.bneck = matmul(act.h1, w.w[1], exec);
    add_row_vector(act.bneck, w.b[1], exec);
    apply_tanh(act.bneck, exec);

    act.h2 = matmul(act.bneck, w.w[2], exec);
    add_row_vector(act.h2, w.b[2], exec);
    apply_tanh(act.h2, exec);

    act.recon = matmul(act.h2, w.w[3], exec);
    add_row_vector(act.recon, w.b[3], exec);
    return act;
}

double huber_grad(double r, double delta) {
    if (r > delta) return delta;
    if (r < -delta) return -delta;
    return r;
}

/// g <- g elementwise* (1 - h^2), the tanh derivative at activation h.
void tanh_backward(Matrix& g, const Matrix& h) {
    std::span<double> gd = g.data();
    std::span<const double> hd = h.data();
    for (std::size_t i = 0; i < gd.size(); ++i) gd[i] *= 1.0 - hd[i] * hd[i];
}

}  // namespace

double huber_loss(double residual, double delta) {
    if (!(delta > 0.0)) throw ConfigError("huber delta must be positive");
    double a = std::abs(residual);
    if (a <= delta) return 0.5 * residual * residual;
    return delta * (a - 0.5 * delta);
}

ForwardResult forward(const NetworkSpec& spec, const NetworkWeights& weights, const Matrix& batch,
                      Exec exec) {
    check_spec(spec);
    check_shapes(spec, weights);
    if (batch.cols() != spec.input_dim)
        throw DataError("batch width " + std::to_string(batch.cols()) +
                        " does not match encoder input dimension " +
                        std::to_string(spec.input_dim));
    Activations act = run_forward(weights, batch, exec);
    return {std::move(act.recon), std::move(act.bneck)};
}

LossAndGradients compute_loss_and_gradients(const NetworkSpec& spec,
                                            const NetworkWeights& weights, const Matrix& batch,
                                            double huber_delta, Exec exec) {
    check_spec(spec);
    check_shapes(spec, weights);
    if (batch.cols() != spec.input_dim) throw DataError("batch width mismatch");
    if (batch.rows() == 0) throw DataError("empty batch");
    if (!(huber_delta > 0.0)) throw ConfigError("huber delta must be positive");

    std::size_t n = batch.rows();
    std::size_t d = batch.cols();
    double inv_count = 1.0 / (static_cast<double>(n) * static_cast<double>(d));

    Activations act = run_forward(weights, batch, exec);

    // Residuals, loss partials per row (summed in fixed order), and the
    // output-layer gradient share one pass.
    Matrix g4(n, d);
    std::vector<double> row_loss(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double r = act.recon(i, j) - batch(i, j);
            acc += huber_loss(r, huber_delta);
            g4(i, j) = huber_grad(r, huber_delta) * inv_count;
        }
        row_loss[i] = acc;
    }
    double total = 0.0;
    for (double v : row_loss) total += v;

    LossAndGradients out;
    out.loss = total * inv_count;
    if (!std::isfinite(out.loss)) throw NumericError("encoder loss became non-finite");

    out.gradients.w.resize(4);
    out.gradients.b.assign(4, {});
    for (std::size_t l = 0; l < 4; ++l)
        out.gradients.b[l].resize(weights.b[l].size());

    matmul_at_b(act.h2, g4, out.gradients.w[3], exec);
    column_sums(g4, out.gradients.b[3], exec);

    Matrix g3 = matmul_a_bt(g4, weights.w[3], exec);
    tanh_backward(g3, act.h2);
    matmul_at_b(act.bneck, g3, out.gradients.w[2], exec);
    column_sums(g3, out.gradients.b[2], exec);

    Matrix g2 = matmul_a_bt(g3, weights.w[2], exec);
    tanh_backward(g2, act.bneck);
    matmul_at_b(act.h1, g2, out.gradients.w[1], exec);
    column_sums(g2, out.gradients.b[1], exec);

    Matrix g1 = matmul_a_bt(g2, weights.w[1], exec);
    tanh_backward(g1, act.h1);
    matmul_at_b(batch, g1, out.gradients.w[0], exec);
    column_sums(g1, out.gradients.b[0], exec);

    return out;
}

NetworkWeights init_weights(const NetworkSpec& spec, std::uint64_t seed) {
    check_spec(spec);
    Rng rng(seed);
    auto sizes = spec.layer_sizes();
    NetworkWeights weights;
    weights.w.reserve(4);
    weights.b.reserve(4);
    for (std::size_t l = 0; l < 4; ++l) {
        double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
        Matrix w(sizes[l], sizes[l + 1]);
        for (double& v : w.data()) v = rng.uniform(-bound, bound);
        std::vector<double> b(sizes[l + 1]);
        for (double& v : b) v = rng.uniform(-bound, bound);
        weights.w.push_back(std::move(w));
        weights.b.push_back(std::move(b));
    }
    return weights;
}

TrainedEncoder train_autoencoder(const DesignMatrix& data, const TrainConfig& cfg, Exec exec) {
    if (data.rows() < 24)
        throw DataError("autoencoder training needs at least 24 rows, got " +
                        std::to_string(data.rows()));
    if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    for (double v : data.values.data())
        if (!std::isfinite(v)) throw DataError("design matrix contains non-finite values");

    NetworkSpec spec;
    spec.input_dim = data.cols();

    TrainedEncoder model;
    model.spec = spec;
    model.weights = init_weights(spec, cfg.seed);
    model.column_ids = data.column_ids;
    model.column_params = data.params;
    model.config = cfg;
    model.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));

    // Adam moments mirror the parameter shapes.
    NetworkWeights m, v;
    m.w.resize(4);
    v.w.resize(4);
    m.b.assign(4, {});
    v.b.assign(4, {});
    for (std::size_t l = 0; l < 4; ++l) {
        m.w[l] = Matrix(model.weights.w[l].rows(), model.weights.w[l].cols());
        v.w[l] = Matrix(model.weights.w[l].rows(), model.weights.w[l].cols());
        m.b[l].assign(model.weights.b[l].size(), 0.0);
        v.b[l].assign(model.weights.b[l].size(), 0.0);
    }

    auto adam_update = [&](std::span<double> theta, std::span<const double> grad,
                           std::span<double> m1, std::span<double> m2, double bc1, double bc2) {
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m1[i] = cfg.beta1 * m1[i] + (1.0 - cfg.beta1) * grad[i];
            m2[i] = cfg.beta2 * m2[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            double mhat = m1[i] / bc1;
            double vhat = m2[i] / bc2;
            theta[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
        }
    };

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        LossAndGradients lg =
            compute_loss_and_gradients(spec, model.weights, data.values, cfg.huber_delta, exec);
        model.loss_history.push_back(lg.loss);

        double t = static_cast<double>(epoch + 1);
        double bc1 = 1.0 - std::pow(cfg.beta1, t);
        double bc2 = 1.0 - std::pow(cfg.beta2, t);
        for (std::size_t l = 0; l < 4; ++l) {
            adam_update(model.weights.w[l].data(), lg.gradients.w[l].data(), m.w[l].data(),
                        v.w[l].data(), bc1, bc2);
            adam_update(model.weights.b[l], lg.gradients.b[l], m.b[l], v.b[l], bc1, bc2);
        }
    }
    return model;
}

MonthlySeries encode(const TrainedEncoder& model, const DesignMatrix& data, Exec exec) {
    check_spec(model.spec);
    check_shapes(model.spec, model.weights);
    if (data.cols() != model.spec.input_dim)
        throw DataError("design matrix width " + std::to_string(data.cols()) +
                        " does not match encoder input dimension " +
                        std::to_string(model.spec.input_dim));

    if (data.rows() >= 12) {
        std::vector<double> col;
        for (std::size_t j = 0; j < data.cols(); ++j) {
            data.values.column_copy_into(j, col);
            double mu = stats::mean(col);
            double sd = stats::population_std(col);
            if (std::abs(mu) > 0.5 || sd < 0.3 || sd > 3.0)
                log::warn("column '" + data.column_ids[j] +
                          "' looks unstandardized (mean " + std::to_string(mu) + ", std " +
                          std::to_string(sd) + "); encode expects z-scored inputs");
        }
    }

    Matrix h1 = matmul(data.values, model.weights.w[0], exec);
    add_row_vector(h1, model.weights.b[0], exec);
    apply_tanh(h1, exec);
    Matrix bneck = matmul(h1, model.weights.w[1], exec);
    add_row_vector(bneck, model.weights.b[1], exec);
    apply_tanh(bneck, exec);

    MonthlySeries out;
    out.variable_id = "BOTTLENECK";
    out.unit = "1";
    out.start = data.start;
    out.values.resize(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) out.values[i] = bneck(i, 0);
    return out;
}

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["data"] = std::vector<double>(m.data().begin(), m.data().end());
    return j;
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != m.size()) throw DataError("model weight array length mismatch");
    std::copy(data.begin(), data.end(), m.data().begin());
    return m;
}

}  // namespace

std::string encoder_to_json(const TrainedEncoder& model) {
    json j;
    j["format_version"] = 1;
    j["spec"] = {{"input_dim", model.spec.input_dim},
                 {"hidden_width", model.spec.hidden_width},
                 {"bottleneck_width", model.spec.bottleneck_width},
                 {"activation", "tanh"},
                 {"output_activation", "identity"}};
    j["column_ids"] = model.column_ids;
    json params = json::array();
    for (const auto& p : model.column_params)
        params.push_back({{"mean", p.mean}, {"std", p.std}});
    j["column_params"] = params;
    json weights = json::array();
    for (const auto& w : model.weights.w) weights.push_back(matrix_to_json(w));
    j["weights"] = weights;
    j["biases"] = model.weights.b;
    j["train_config"] = {{"epochs", model.config.epochs},
                         {"learning_rate", model.config.learning_rate},
                         {"beta1", model.config.beta1},
                         {"beta2", model.config.beta2},
                         {"epsilon", model.config.epsilon},
                         {"huber_delta", model.config.huber_delta},
                         {"seed", model.config.seed}};
    j["loss_history"] = model.loss_history;
    return j.dump(2) + "\n";
}

void save_encoder(const TrainedEncoder& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    out << encoder_to_json(model);
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

TrainedEncoder encoder_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != 1)
            throw DataError("unsupported model format version");
        TrainedEncoder model;
        const json& spec = j.at("spec");
        model.spec.input_dim = spec.at("input_dim").get<std::size_t>();
        model.spec.hidden_width = spec.at("hidden_width").get<std::size_t>();
        model.spec.bottleneck_width = spec.at("bottleneck_width").get<std::size_t>();
        model.column_ids = j.at("column_ids").get<std::vector<std::string>>();
        for (const json& p : j.at("column_params"))
            model.column_params.push_back(
                {p.at("mean").get<double>(), p.at("std").get<double>()});
        for (const json& w : j.at("weights")) model.weights.w.push_back(matrix_from_json(w));
        model.weights.b = j.at("biases").get<std::vector<std::vector<double>>>();
        const json& tc = j.at("train_config");
        model.config.epochs = tc.at("epochs").get<int>();
        model.config.learning_rate = tc.at("learning_rate").get<double>();
        model.config.beta1 = tc.at("beta1").get<double>();
        model.config.beta2 = tc.at("beta2").get<double>();
        model.config.epsilon = tc.at("epsilon").get<double>();
        model.config.huber_delta = tc.at("huber_delta").get<double>();
        model.config.seed = tc.at("seed").get<std::uint64_t>();
        model.loss_history = j.at("loss_history").get<std::vector<double>>();
        check_shapes(model.spec, model.weights);
        if (model.column_ids.size() != model.spec.input_dim ||
            model.column_params.size() != model.spec.input_dim)
            throw DataError("model column metadata does not match input dimension");
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("model file is missing or mistypes a field: ") + e.what());
    }
}

TrainedEncoder load_encoder(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return encoder_from_json(buf.str());
}

}  // namespace snodri
