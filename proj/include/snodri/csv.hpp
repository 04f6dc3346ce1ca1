#pragma once

#include "snodri/timeseries.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace snodri::csv {

/// One parsed basin file before monthly aggregation.
struct RawTable {
    bool daily = false;  // true when dates carry a day component
    std::vector<MonthlySeries> monthly;  // filled when !daily
    std::vector<DatedSeries> dated;      // filled when daily
};

/**
 * Parse a basin CSV: header `date,<var>,...`, one row per timestamp,
 * dates either all "YYYY-MM" or all "YYYY-MM-DD", empty cells meaning
 * missing. Monthly rows must be consecutive. Units come from the builtin
 * table keyed on variable id.
 */
RawTable read_table(std::istream& in, const std::string& source_name);
RawTable read_table_file(const std::filesystem::path& path);

/// Write a basin table as a monthly CSV with the same layout read_table accepts.
void write_table(std::ostream& out, const BasinTable& table,
                 const std::vector<std::string>& header_comments = {});
void write_table_file(const std::filesystem::path& path, const BasinTable& table,
                      const std::vector<std::string>& header_comments = {});

/// Generic writer: `date` column plus one column per named series, aligned by stamp.
void write_columns(std::ostream& out, const std::vector<MonthlySeries>& columns,
                   const std::vector<std::string>& header_comments = {});

std::string format_cell(double v);  // shortest round-trip, empty for NaN

}  // namespace snodri::csv
