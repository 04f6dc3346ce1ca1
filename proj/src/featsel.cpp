#include "snodri/featsel.hpp"

#include "snodri/errors.hpp"
#include "snodri/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace snodri {

namespace {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

struct TreeBuilder {
    const Matrix& x;
    std::span<const double> y;
    int max_depth;
    int min_leaf;
    int features_per_split;
    Rng& rng;
    Tree& tree;
    std::vector<int> feature_pool;        // scratch for per-node feature draws
    std::vector<std::pair<double, int>> order;  // scratch for per-feature sorts

    /// SSE gain of splitting sorted samples after position i (prefix sums of y).
    SplitChoice best_split(const std::vector<int>& samples) {
        int d = static_cast<int>(x.cols());
        int m = std::min(features_per_split, d);

        // Partial Fisher-Yates draw of m distinct features, then ascending
        // order so equal gains resolve to the lowest feature index.
        for (int j = 0; j < m; ++j) {
            std::size_t pick = j + rng.uniform_index(static_cast<std::size_t>(d - j));
            std::swap(feature_pool[static_cast<std::size_t>(j)], feature_pool[pick]);
        }
        std::sort(feature_pool.begin(), feature_pool.begin() + m);

        std::size_t n = samples.size();
        double total = 0.0;
        for (int i : samples) total += y[static_cast<std::size_t>(i)];
        double parent_score = total * total / static_cast<double>(n);

        SplitChoice best;
        for (int jj = 0; jj < m; ++jj) {
            int f = feature_pool[static_cast<std::size_t>(jj)];
            order.clear();
            for (int i : samples)
                order.emplace_back(x(static_cast<std::size_t>(i), static_cast<std::size_t>(f)), i);
            std::sort(order.begin(), order.end());

            double left_sum = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_sum += y[static_cast<std::size_t>(order[i].second)];
                if (order[i].first == order[i + 1].first) continue;
                std::size_t n_left = i + 1;
                std::size_t n_right = n - n_left;
                if (n_left < static_cast<std::size_t>(min_leaf) ||
                    n_right < static_cast<std::size_t>(min_leaf))
                    continue;
                double right_sum = total - left_sum;
                double gain = left_sum * left_sum / static_cast<double>(n_left) +
                              right_sum * right_sum / static_cast<double>(n_right) - parent_score;
                // Strict > keeps the first (lowest feature, lowest
                // threshold) candidate on equal gains.
                if (gain > best.gain) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = 0.5 * (order[i].first + order[i + 1].first);
                    best.gain = gain;
                }
            }
        }
        return best;
    }

    int grow(std::vector<int> samples, int depth) {
        double y_min = y[static_cast<std::size_t>(samples.front())];
        double y_max = y_min;
        double sum = 0.0;
        for (int i : samples) {
            double v = y[static_cast<std::size_t>(i)];
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
            sum += v;
        }

        int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[static_cast<std::size_t>(node_id)].value =
            sum / static_cast<double>(samples.size());

        bool splittable = depth < max_depth &&
                          samples.size() >= 2 * static_cast<std::size_t>(min_leaf) &&
                          y_min < y_max;
        if (!splittable) return node_id;

        SplitChoice split = best_split(samples);
        if (!split.found) return node_id;

        std::vector<int> left, right;
        left.reserve(samples.size());
        right.reserve(samples.size());
        for (int i : samples) {
            double v = x(static_cast<std::size_t>(i), static_cast<std::size_t>(split.feature));
            (v <= split.threshold ? left : right).push_back(i);
        }
        samples.clear();
        samples.shrink_to_fit();

        tree.sse_decrease[static_cast<std::size_t>(split.feature)] += split.gain;
        int left_id = grow(std::move(left), depth + 1);
        int right_id = grow(std::move(right), depth + 1);
        TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = left_id;
        node.right = right_id;
        return node_id;
    }
};

Tree grow_tree(const Matrix& x, std::span<const double> y, const ForestHyperparams& hp,
               int features_per_split, std::uint64_t tree_seed) {
    Rng rng(tree_seed);
    std::size_t n = x.rows();
    std::vector<int> samples(n);
    if (hp.bootstrap) {
        for (std::size_t i = 0; i < n; ++i)
            samples[i] = static_cast<int>(rng.uniform_index(n));
    } else {
        std::iota(samples.begin(), samples.end(), 0);
    }

    Tree tree;
    tree.sse_decrease.assign(x.cols(), 0.0);
    TreeBuilder builder{x, y, hp.max_depth, hp.min_samples_leaf, features_per_split,
                        rng, tree, {}, {}};
    builder.feature_pool.resize(x.cols());
    std::iota(builder.feature_pool.begin(), builder.feature_pool.end(), 0);
    builder.grow(std::move(samples), 0);
    return tree;
}

}  // namespace

Forest train_forest(const Matrix& x, std::span<const double> y,
                    const std::vector<std::string>& feature_ids, const ForestHyperparams& hp,
                    Exec exec) {
    if (x.rows() != y.size()) throw DataError("feature matrix rows do not match target length");
    if (x.cols() == 0) throw DataError("feature matrix has no columns");
    if (feature_ids.size() != x.cols())
        throw DataError("feature id count does not match matrix width");
    if (hp.n_trees < 1 || hp.max_depth < 1 || hp.min_samples_leaf < 1)
        throw ConfigError("forest hyperparameters must be positive");
    if (hp.features_per_split < 0 || hp.features_per_split > static_cast<int>(x.cols()))
        throw ConfigError("features_per_split outside [0, d]");
    if (x.rows() < 2 * static_cast<std::size_t>(hp.min_samples_leaf))
        throw DataError("need at least 2*min_samples_leaf training rows");
    for (double v : y)
        if (!std::isfinite(v)) throw DataError("target contains non-finite values");

    int features_per_split = hp.features_per_split;
    if (features_per_split == 0)
        features_per_split = static_cast<int>((x.cols() + 2) / 3);

    Forest forest;
    forest.hp = hp;
    forest.feature_ids = feature_ids;
    forest.trees.resize(static_cast<std::size_t>(hp.n_trees));

    // Each tree owns a derived seed and its own slot; growth order is free.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
#endif
    for (int t = 0; t < hp.n_trees; ++t)
        forest.trees[static_cast<std::size_t>(t)] =
            grow_tree(x, y, hp, features_per_split,
                      seeds::derive(hp.seed, static_cast<std::uint64_t>(t)));
    return forest;
}

double predict_row(const Forest& forest, std::span<const double> row) {
    if (forest.trees.empty()) throw DataError("cannot predict with an empty forest");
    if (row.size() != forest.feature_ids.size())
        throw DataError("query row width does not match forest features");
    double sum = 0.0;
    for (const Tree& tree : forest.trees) {
        int node = 0;
        while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
            const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
            node = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        sum += tree.nodes[static_cast<std::size_t>(node)].value;
    }
    return sum / static_cast<double>(forest.trees.size());
}

std::vector<double> predict(const Forest& forest, const Matrix& x) {
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict_row(forest, x.row(i));
    return out;
}

ImportanceVector forest_importance(const Forest& forest) {
    if (forest.trees.empty()) throw DataError("cannot compute importance of an empty forest");
    std::size_t d = forest.feature_ids.size();
    std::vector<double> mean(d, 0.0);
    for (const Tree& tree : forest.trees)
        for (std::size_t f = 0; f < d; ++f) mean[f] += tree.sse_decrease[f];
    for (double& v : mean) v /= static_cast<double>(forest.trees.size());

    double total = std::accumulate(mean.begin(), mean.end(), 0.0);
    if (total > 0.0)
        for (double& v : mean) v /= total;
    return {forest.feature_ids, std::move(mean)};
}

ImportanceVector average_importance(const std::vector<ImportanceVector>& per_basin) {
    if (per_basin.empty()) throw DataError("cannot average an empty importance list");
    const auto& ids = per_basin.front().feature_ids;
    std::vector<double> mean(ids.size(), 0.0);
    for (const auto& iv : per_basin) {
        if (iv.feature_ids != ids)
            throw DataError("importance vectors disagree on feature ids or ordering");
        for (std::size_t f = 0; f < ids.size(); ++f) mean[f] += iv.importances[f];
    }
    for (double& v : mean) v /= static_cast<double>(per_basin.size());
    double total = std::accumulate(mean.begin(), mean.end(), 0.0);
    if (total > 0.0)
        for (double& v : mean) v /= total;
    return {ids, std::move(mean)};
}

namespace {

std::vector<std::size_t> top_k_order(const ImportanceVector& iv, int k) {
    std::vector<std::size_t> order(iv.feature_ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (iv.importances[a] != iv.importances[b]) return iv.importances[a] > iv.importances[b];
        return iv.feature_ids[a] < iv.feature_ids[b];
    });
    order.resize(static_cast<std::size_t>(k));
    return order;
}

}  // namespace

std::vector<std::string> select_features(const ImportanceVector& imp_swe,
                                         const ImportanceVector& imp_q, int k) {
    if (imp_swe.feature_ids != imp_q.feature_ids)
        throw DataError("importance vectors disagree on feature ids or ordering");
    if (k < 1 || k > static_cast<int>(imp_swe.feature_ids.size()))
        throw ConfigError("top-k outside [1, d]");

    std::vector<std::size_t> chosen;
    for (std::size_t i : top_k_order(imp_swe, k)) chosen.push_back(i);
    for (std::size_t i : top_k_order(imp_q, k))
        if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) chosen.push_back(i);

    std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
        double ma = std::max(imp_swe.importances[a], imp_q.importances[a]);
        double mb = std::max(imp_swe.importances[b], imp_q.importances[b]);
        if (ma != mb) return ma > mb;
        return imp_swe.feature_ids[a] < imp_swe.feature_ids[b];
    });

    std::vector<std::string> out;
    out.reserve(chosen.size());
    for (std::size_t i : chosen) out.push_back(imp_swe.feature_ids[i]);
    return out;
}

}  // namespace snodri
