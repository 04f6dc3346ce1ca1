#include "snodri/csv.hpp"

#include "snodri/errors.hpp"
#include "snodri/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace snodri::csv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

double parse_value(const std::string& cell, const std::string& where) {
    std::string t = trim(cell);
    if (t.empty()) return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw DataError("unparseable numeric cell '" + t + "' at " + where);
    return v;
}

}  // namespace

RawTable read_table(std::istream& in, const std::string& source_name) {
    std::string line;
    std::size_t line_no = 0;

    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            return true;
        }
        return false;
    };

    if (!next_line()) throw DataError(source_name + ": no header row");
    std::vector<std::string> header = split_line(line);
    for (auto& h : header) h = trim(h);
    if (header.size() < 2 || header[0] != "date")
        throw DataError(source_name + ": header must be 'date,<variable>,...'");
    std::vector<std::string> vars(header.begin() + 1, header.end());
    for (std::size_t j = 0; j < vars.size(); ++j) {
        if (vars[j].empty()) throw DataError(source_name + ": empty variable name in header");
        for (std::size_t k = 0; k < j; ++k)
            if (vars[k] == vars[j])
                throw DataError(source_name + ": duplicate column '" + vars[j] + "'");
    }

    std::vector<Date> dates;
    std::vector<MonthStamp> stamps;
    std::vector<std::vector<double>> columns(vars.size());
    int resolution = 0;  // 0 unknown, 1 monthly, 2 daily

    while (next_line()) {
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw DataError(source_name + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " cells, found " +
                            std::to_string(cells.size()));
        std::string date_text = trim(cells[0]);
        if (auto ms = MonthStamp::parse(date_text)) {
            if (resolution == 2)
                throw DataError(source_name + ":" + std::to_string(line_no) +
                                ": monthly date in a daily file");
            resolution = 1;
            stamps.push_back(*ms);
        } else if (auto d = Date::parse(date_text)) {
            if (resolution == 1)
                throw DataError(source_name + ":" + std::to_string(line_no) +
                                ": daily date in a monthly file");
            resolution = 2;
            dates.push_back(*d);
        } else {
            throw DataError(source_name + ":" + std::to_string(line_no) + ": unparseable date '" +
                            date_text + "'");
        }
        for (std::size_t j = 0; j < vars.size(); ++j)
            columns[j].push_back(parse_value(
                cells[j + 1], source_name + ":" + std::to_string(line_no) + " column '" + vars[j] + "'"));
    }
    if (resolution == 0) throw DataError(source_name + ": no data rows");

    RawTable out;
    if (resolution == 1) {
        for (std::size_t i = 1; i < stamps.size(); ++i)
            if (stamps[i].index() != stamps[i - 1].index() + 1)
                throw DataError(source_name + ": monthly rows must be consecutive; gap or " +
                                "disorder after " + stamps[i - 1].to_string());
        for (std::size_t j = 0; j < vars.size(); ++j) {
            MonthlySeries s;
            s.variable_id = vars[j];
            s.unit = default_unit(vars[j]);
            s.start = stamps.front();
            s.values = std::move(columns[j]);
            out.monthly.push_back(std::move(s));
        }
    } else {
        out.daily = true;
        for (std::size_t i = 1; i < dates.size(); ++i)
            if (!(dates[i - 1] < dates[i]))
                throw DataError(source_name + ": daily rows must be strictly increasing; " +
                                "disorder after " + dates[i - 1].to_string());
        for (std::size_t j = 0; j < vars.size(); ++j) {
            DatedSeries s;
            s.variable_id = vars[j];
            s.unit = default_unit(vars[j]);
            // Empty cells are dropped so aggregation sees only present days.
            for (std::size_t i = 0; i < dates.size(); ++i) {
                if (std::isnan(columns[j][i])) continue;
                s.dates.push_back(dates[i]);
                s.values.push_back(columns[j][i]);
            }
            if (s.values.empty())
                throw DataError(source_name + ": column '" + vars[j] + "' has no values");
            out.dated.push_back(std::move(s));
        }
    }
    return out;
}

RawTable read_table_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
    return read_table(in, path.filename().string());
}

std::string format_cell(double v) {
    if (std::isnan(v)) return "";
    return stats::format_double(v);
}

void write_columns(std::ostream& out, const std::vector<MonthlySeries>& columns,
                   const std::vector<std::string>& header_comments) {
    if (columns.empty()) throw DataError("nothing to write");
    for (const auto& c : header_comments) out << "# " << c << "\n";

    long long lo = std::numeric_limits<long long>::max();
    long long hi = std::numeric_limits<long long>::min();
    for (const auto& s : columns) {
        if (s.empty()) throw DataError("cannot write empty series '" + s.variable_id + "'");
        lo = std::min(lo, s.start.index());
        hi = std::max(hi, s.last_stamp().index());
    }

    out << "date";
    for (const auto& s : columns) out << "," << s.variable_id;
    out << "\n";
    for (long long idx = lo; idx <= hi; ++idx) {
        MonthStamp stamp = MonthStamp::from_index(idx);
        out << stamp.to_string();
        for (const auto& s : columns) {
            auto off = s.offset_of(stamp);
            out << "," << (off ? format_cell(s.values[*off]) : "");
        }
        out << "\n";
    }
}

void write_table(std::ostream& out, const BasinTable& table,
                 const std::vector<std::string>& header_comments) {
    write_columns(out, table.series(), header_comments);
}

void write_table_file(const std::filesystem::path& path, const BasinTable& table,
                      const std::vector<std::string>& header_comments) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    write_table(out, table, header_comments);
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

}  // namespace snodri::csv
