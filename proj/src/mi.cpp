#include "snodri/mi.hpp"

#include "snodri/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace snodri {

namespace {

struct Axis {
    int bins = 0;
    std::vector<double> edges;
    double lo = 0.0;
    double width = 0.0;
    bool degenerate = false;
};

Axis build_axis(std::span<const double> v, int bins) {
    double lo = v[0];
    double hi = v[0];
    for (double x : v) {
        if (!std::isfinite(x)) throw DataError("histogram input contains non-finite values");
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }

    Axis axis;
    if (lo == hi) {
        axis.bins = 1;
        axis.degenerate = true;
        axis.lo = lo;
        axis.width = 1.0;
        axis.edges = {lo, lo + 1.0};
        return axis;
    }
    // Span-relative margin keeps edges exact affine images of the data,
    // so I is invariant under x -> ax + b; the clamp in bin_of catches
    // the rounding case where the margin underflows.
    double span = hi - lo;
    double top = hi + 1e-9 * span;
    axis.bins = bins;
    axis.lo = lo;
    axis.width = (top - lo) / bins;
    axis.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) axis.edges[static_cast<std::size_t>(b)] = lo + axis.width * b;
    return axis;
}

int bin_of(const Axis& axis, double x) {
    if (axis.degenerate) return 0;
    int b = static_cast<int>((x - axis.lo) / axis.width);
    return std::clamp(b, 0, axis.bins - 1);
}

}  // namespace

int default_bin_count(std::size_t n) {
    int bins = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n) / 5.0)));
    return std::clamp(bins, 4, 32);
}

JointHistogram joint_histogram(std::span<const double> x, std::span<const double> y, int bins) {
    if (x.size() != y.size())
        throw DataError("histogram inputs have lengths " + std::to_string(x.size()) + " and " +
                        std::to_string(y.size()));
    if (bins < 2) throw ConfigError("histogram needs at least 2 bins");
    if (x.size() < 4 * static_cast<std::size_t>(bins))
        throw DataError("need at least 4 samples per bin: " + std::to_string(x.size()) +
                        " samples for " + std::to_string(bins) + " bins");

    Axis ax = build_axis(x, bins);
    Axis ay = build_axis(y, bins);

    JointHistogram h;
    h.bins_x = ax.bins;
    h.bins_y = ay.bins;
    h.edges_x = ax.edges;
    h.edges_y = ay.edges;
    h.degenerate_x = ax.degenerate;
    h.degenerate_y = ay.degenerate;
    h.n = static_cast<long long>(x.size());
    h.counts.assign(static_cast<std::size_t>(ax.bins) * static_cast<std::size_t>(ay.bins), 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::size_t ix = static_cast<std::size_t>(bin_of(ax, x[i]));
        std::size_t iy = static_cast<std::size_t>(bin_of(ay, y[i]));
        h.counts[ix * static_cast<std::size_t>(ay.bins) + iy] += 1;
    }
    return h;
}

double mutual_information(const JointHistogram& h) {
    if (h.n <= 0) throw DataError("mutual information of an empty histogram");

    std::vector<double> px(static_cast<std::size_t>(h.bins_x), 0.0);
    std::vector<double> py(static_cast<std::size_t>(h.bins_y), 0.0);
    double inv_n = 1.0 / static_cast<double>(h.n);
    for (int ix = 0; ix < h.bins_x; ++ix)
        for (int iy = 0; iy < h.bins_y; ++iy) {
            double p = static_cast<double>(h.count(ix, iy)) * inv_n;
            px[static_cast<std::size_t>(ix)] += p;
            py[static_cast<std::size_t>(iy)] += p;
        }

    double mi = 0.0;
    for (int ix = 0; ix < h.bins_x; ++ix)
        for (int iy = 0; iy < h.bins_y; ++iy) {
            long long c = h.count(ix, iy);
            if (c == 0) continue;
            double pxy = static_cast<double>(c) * inv_n;
            mi += pxy * std::log(pxy / (px[static_cast<std::size_t>(ix)] *
                                        py[static_cast<std::size_t>(iy)]));
        }
    return mi;
}

WeightVector compute_weights(const DesignMatrix& inputs, const MonthlySeries& bottleneck,
                             int bins, Exec exec) {
    if (bottleneck.size() != inputs.rows())
        throw DataError("bottleneck length " + std::to_string(bottleneck.size()) +
                        " does not match design matrix rows " + std::to_string(inputs.rows()));
    if (bins == 0) bins = default_bin_count(inputs.rows());

    WeightVector out;
    out.variable_ids = inputs.column_ids;
    out.weights.assign(inputs.cols(), 0.0);

    // Columns are independent; each writes its own weight slot.
    std::exception_ptr error;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
#endif
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(inputs.cols()); ++j) {
        try {
            std::vector<double> col;
            inputs.values.column_copy_into(static_cast<std::size_t>(j), col);
            JointHistogram h = joint_histogram(col, bottleneck.values, bins);
            out.weights[static_cast<std::size_t>(j)] = mutual_information(h);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace snodri
