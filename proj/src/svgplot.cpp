#include "snodri/svgplot.hpp"

#include "snodri/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace snodri {

namespace {

constexpr double kWidth = 960.0;
constexpr double kPanelHeight = 150.0;
constexpr double kPanelGap = 34.0;
constexpr double kMarginLeft = 74.0;
constexpr double kMarginRight = 18.0;
constexpr double kMarginTop = 34.0;
constexpr double kMarginBottom = 40.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct PanelSpec {
    const MonthlySeries* series;
    bool zero_line;
    std::string color;
};

void render_panel(std::string& svg, const PanelSpec& panel, double top, long long lo,
                  long long hi, bool bottom_panel) {
    const MonthlySeries& s = *panel.series;
    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const long long n = hi - lo + 1;

    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -ymin;
    for (long long t = lo; t <= hi; ++t) {
        double v = s.values[*s.offset_of(MonthStamp::from_index(t))];
        if (std::isnan(v)) continue;
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
    }
    if (!(ymin <= ymax)) {  // every value missing
        ymin = -1.0;
        ymax = 1.0;
    }
    if (panel.zero_line) {
        ymin = std::min(ymin, 0.0);
        ymax = std::max(ymax, 0.0);
    }
    double pad = 0.05 * (ymax - ymin);
    if (pad == 0.0) pad = std::max(1.0, std::abs(ymin)) * 0.05;
    ymin -= pad;
    ymax += pad;

    auto x_of = [&](long long t) {
        return kMarginLeft + plot_w * (n > 1 ? static_cast<double>(t - lo) / (n - 1) : 0.5);
    };
    auto y_of = [&](double v) {
        return top + kPanelHeight * (1.0 - (v - ymin) / (ymax - ymin));
    };

    svg += "<g class=\"panel\">\n";
    svg += "<rect x=\"" + num(kMarginLeft) + "\" y=\"" + num(top) + "\" width=\"" +
           num(plot_w) + "\" height=\"" + num(kPanelHeight) +
           "\" fill=\"#ffffff\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

    // y ticks: bottom, middle, top of the data range
    for (double frac : {0.0, 0.5, 1.0}) {
        double v = ymin + frac * (ymax - ymin);
        double y = y_of(v);
        svg += "<line x1=\"" + num(kMarginLeft - 4) + "\" y1=\"" + num(y) + "\" x2=\"" +
               num(kMarginLeft) + "\" y2=\"" + num(y) +
               "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + num(kMarginLeft - 7) + "\" y=\"" + num(y + 3.5) +
               "\" text-anchor=\"end\" font-size=\"10\" fill=\"#333333\">" +
               escape_xml(tick_label(v)) + "</text>\n";
    }

    // x ticks on January stamps, thinned to at most ~12 labels
    int first_year = MonthStamp::from_index(lo).year;
    int last_year = MonthStamp::from_index(hi).year;
    int year_step = std::max(1, (last_year - first_year + 1 + 11) / 12);
    for (int year = first_year; year <= last_year; year += year_step) {
        MonthStamp jan{year, 1};
        if (jan.index() < lo || jan.index() > hi) continue;
        double x = x_of(jan.index());
        svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(top + kPanelHeight) + "\" x2=\"" +
               num(x) + "\" y2=\"" + num(top + kPanelHeight + 4) +
               "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        if (bottom_panel)
            svg += "<text x=\"" + num(x) + "\" y=\"" + num(top + kPanelHeight + 16) +
                   "\" text-anchor=\"middle\" font-size=\"10\" fill=\"#333333\">" +
                   std::to_string(year) + "</text>\n";
    }

    if (panel.zero_line) {
        double y0 = y_of(0.0);
        svg += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(y0) + "\" x2=\"" +
               num(kMarginLeft + plot_w) + "\" y2=\"" + num(y0) +
               "\" stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"5,4\"/>\n";
    }

    // data polyline, broken at missing values
    std::string points;
    auto flush = [&] {
        if (points.empty()) return;
        svg += "<polyline fill=\"none\" stroke=\"" + panel.color +
               "\" stroke-width=\"1.3\" points=\"" + points + "\"/>\n";
        points.clear();
    };
    for (long long t = lo; t <= hi; ++t) {
        double v = s.values[*s.offset_of(MonthStamp::from_index(t))];
        if (std::isnan(v)) {
            flush();
            continue;
        }
        points += num(x_of(t)) + "," + num(y_of(v)) + " ";
    }
    flush();

    // panel label: variable (unit), rotated on the left edge
    std::string label = s.variable_id;
    if (!s.unit.empty()) label += " (" + s.unit + ")";
    double label_y = top + kPanelHeight / 2;
    svg += "<text x=\"" + num(16.0) + "\" y=\"" + num(label_y) +
           "\" text-anchor=\"middle\" font-size=\"11\" fill=\"#111111\" transform=\"rotate(-90 " +
           num(16.0) + " " + num(label_y) + ")\">" + escape_xml(label) + "</text>\n";
    svg += "</g>\n";
}

}  // namespace

std::string render_plot(const IndexSeries& idx, const std::vector<MonthlySeries>& indicators,
                        const std::string& provenance) {
    if (idx.snodri.empty()) throw DataError("plot: empty index series");
    long long lo = idx.snodri.start.index();
    long long hi = idx.snodri.last_stamp().index();
    for (const MonthlySeries& s : indicators) {
        if (s.empty()) throw DataError("plot: empty indicator series '" + s.variable_id + "'");
        lo = std::max(lo, s.start.index());
        hi = std::min(hi, s.last_stamp().index());
    }
    if (lo > hi) throw DataError("plot: series have no overlapping months");

    std::vector<PanelSpec> panels;
    panels.push_back({&idx.snodri, true, "#1a6dba"});
    const char* indicator_colors[] = {"#b5541c", "#2d7a3a", "#7a2d6e", "#4a4a4a"};
    for (std::size_t i = 0; i < indicators.size(); ++i)
        panels.push_back({&indicators[i], false,
                          indicator_colors[i % (sizeof indicator_colors / sizeof *indicator_colors)]});

    double height = kMarginTop + panels.size() * kPanelHeight +
                    (panels.size() - 1) * kPanelGap + kMarginBottom;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
           num(height) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(height) +
           "\" font-family=\"sans-serif\">\n";
    if (!provenance.empty()) svg += "<!-- " + escape_xml(provenance) + " -->\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(height) +
           "\" fill=\"#ffffff\"/>\n";
    svg += "<text x=\"" + num(kMarginLeft) + "\" y=\"22\" font-size=\"14\" fill=\"#111111\">" +
           escape_xml(idx.snodri.variable_id) + " " +
           MonthStamp::from_index(lo).to_string() + " to " +
           MonthStamp::from_index(hi).to_string() + "</text>\n";

    for (std::size_t p = 0; p < panels.size(); ++p) {
        double top = kMarginTop + p * (kPanelHeight + kPanelGap);
        render_panel(svg, panels[p], top, lo, hi, p + 1 == panels.size());
    }
    svg += "</svg>\n";
    return svg;
}

void plot_emit(const IndexSeries& idx, const std::vector<MonthlySeries>& indicators,
               const std::string& path, const std::string& provenance) {
    std::string svg = render_plot(idx, indicators, provenance);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path);
    out << svg;
    if (!out) throw DataError("failed writing plot: " + path);
}

}  // namespace snodri
