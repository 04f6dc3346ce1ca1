#pragma once

#include "snodri/matrix.hpp"
#include "snodri/timeseries.hpp"

#include <span>
#include <string>
#include <vector>

namespace snodri {

/// Equal-width 2-D histogram used as the joint probability estimate.
struct JointHistogram {
    int bins_x = 0;
    int bins_y = 0;
    std::vector<double> edges_x;  // bins_x + 1 ascending
    std::vector<double> edges_y;
    std::vector<long long> counts;  // bins_x * bins_y, row-major in x
    long long n = 0;
    bool degenerate_x = false;  // constant input collapsed to one bin
    bool degenerate_y = false;

    long long count(int ix, int iy) const {
        return counts[static_cast<std::size_t>(ix) * static_cast<std::size_t>(bins_y) +
                      static_cast<std::size_t>(iy)];
    }
};

/// Raw MI weights (nats) between each design-matrix column and the bottleneck.
struct WeightVector {
    std::vector<std::string> variable_ids;
    std::vector<double> weights;
};

/// Default bin count: ceil(sqrt(n/5)) clamped to [4, 32].
int default_bin_count(std::size_t n);

/**
 * Tally x,y pairs into equal-width bins spanning [min, max] per axis; the
 * top edge is inflated by a 1e-9 relative margin so the maximum falls in
 * the last bin. A constant axis degenerates to a single bin and is
 * flagged.
 */
JointHistogram joint_histogram(std::span<const double> x, std::span<const double> y, int bins);

/// I(X;Y) in nats: sum over positive-count cells of p_xy * ln(p_xy / (p_x p_y)).
double mutual_information(const JointHistogram& h);

/// Per-column MI against the bottleneck series, order preserved, weights raw.
WeightVector compute_weights(const DesignMatrix& inputs, const MonthlySeries& bottleneck,
                             int bins, Exec exec = Exec::parallel);

}  // namespace snodri
