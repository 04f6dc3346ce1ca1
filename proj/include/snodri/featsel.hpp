#pragma once

#include "snodri/matrix.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace snodri {

struct ForestHyperparams {
    int n_trees = 200;
    int max_depth = 12;
    int min_samples_leaf = 5;
    int features_per_split = 0;  // 0 = ceil(d/3)
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

/// Binary regression tree stored as an index-linked node array; node 0 is the root.
struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // mean of the node's training targets
};

struct Tree {
    std::vector<TreeNode> nodes;
    std::vector<double> sse_decrease;  // per feature, summed over this tree's splits
};

struct Forest {
    ForestHyperparams hp;
    std::vector<std::string> feature_ids;
    std::vector<Tree> trees;
};

struct ImportanceVector {
    std::vector<std::string> feature_ids;
    std::vector<double> importances;  // nonnegative; sum 1 unless all zero
};

/**
 * Grow a regression forest on bootstrap resamples. Splits maximize the
 * sum-of-squared-error reduction over candidate features drawn per node;
 * thresholds are midpoints of consecutive distinct sorted values, both
 * children must keep min_samples_leaf rows. Ties in gain resolve to the
 * lowest feature index, then the lowest threshold, so a seed fixes the
 * forest bit for bit.
 */
Forest train_forest(const Matrix& x, std::span<const double> y,
                    const std::vector<std::string>& feature_ids, const ForestHyperparams& hp,
                    Exec exec = Exec::parallel);

double predict_row(const Forest& forest, std::span<const double> row);
std::vector<double> predict(const Forest& forest, const Matrix& x);

/// Mean per-feature SSE decrease across trees, normalized to sum 1 (or all zeros).
ImportanceVector forest_importance(const Forest& forest);

/// Element-wise mean of per-basin importances, re-normalized.
ImportanceVector average_importance(const std::vector<ImportanceVector>& per_basin);

/**
 * Union of the top-k features of both rankings, ordered by the larger of
 * the two importances descending; ties by feature id.
 */
std::vector<std::string> select_features(const ImportanceVector& imp_swe,
                                         const ImportanceVector& imp_q, int k);

}  // namespace snodri
