#pragma once

#include "snodri/index.hpp"
#include "snodri/timeseries.hpp"

#include <string>
#include <vector>

namespace snodri {

/**
 * Render the index and indicator series as stacked line panels (index on
 * top, with a dashed zero line) into a self-contained SVG document. All
 * panels share the x range, the intersection of the series' stamp
 * ranges; an empty intersection is an error. `provenance` is embedded as
 * a comment for artifact traceability.
 */
std::string render_plot(const IndexSeries& idx, const std::vector<MonthlySeries>& indicators,
                        const std::string& provenance = "");

/// render_plot written to a file.
void plot_emit(const IndexSeries& idx, const std::vector<MonthlySeries>& indicators,
               const std::string& path, const std::string& provenance = "");

}  // namespace snodri
