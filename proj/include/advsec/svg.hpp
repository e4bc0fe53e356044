#pragma once

// Self-contained deterministic SVG line/bar charts. No plotting dependency:
// charts are assembled as plain XML text with fixed-precision coordinates so
// identical inputs produce byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "advsec/error.hpp"

namespace advsec {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

struct AxisRange {
    double lo = 0.0, hi = 1.0;
    double scale(double v, double px_lo, double px_hi) const {
        if (hi <= lo) return 0.5 * (px_lo + px_hi);  // degenerate span: center
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

inline AxisRange axis_range(double lo, double hi) {
    if (!(std::isfinite(lo) && std::isfinite(hi)))
        throw InvalidValueError("chart data must be finite");
    if (hi <= lo) return {lo, hi};
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

inline const char* series_color(std::size_t i) {
    static const char* palette[] = {"#1f6fb2", "#d1495b", "#3d8f5f", "#8f6fc2",
                                    "#c98a2b", "#4fa3a5", "#7a7a7a"};
    return palette[i % (sizeof(palette) / sizeof(palette[0]))];
}

}  // namespace detail

/// Renders labeled series as an SVG line chart. Each series becomes one
/// <polyline> wrapped in a <g> whose data-label attribute carries the series
/// name; the legend repeats the names as visible text.
inline std::string render_line_chart(const std::string& title, const std::string& x_label,
                                     const std::string& y_label,
                                     const std::vector<Series>& series) {
    if (series.empty()) throw InvalidArgumentError("line chart needs at least one series");
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    bool first = true;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size())
            throw ShapeError("series '" + s.label + "' has mismatched x/y lengths");
        if (s.x.empty()) throw InvalidArgumentError("series '" + s.label + "' is empty");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(std::isfinite(s.x[i]) && std::isfinite(s.y[i])))
                throw InvalidValueError("chart data must be finite");
            if (first) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                first = false;
            } else {
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, s.y[i]);
                ymax = std::max(ymax, s.y[i]);
            }
        }
    }
    const detail::AxisRange xr = detail::axis_range(xmin, xmax);
    const detail::AxisRange yr = detail::axis_range(ymin, ymax);

    const double W = 640, H = 420;
    const double L = 70, R = W - 20, T = 50, B = H - 50;  // plot box
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
           "viewBox=\"0 0 640 420\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"420\" fill=\"#ffffff\"/>\n";
    out += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" +
           detail::xml_escape(title) + "</text>\n";
    // axes
    out += "<line x1=\"" + detail::svg_num(L) + "\" y1=\"" + detail::svg_num(B) + "\" x2=\"" +
           detail::svg_num(R) + "\" y2=\"" + detail::svg_num(B) +
           "\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
    out += "<line x1=\"" + detail::svg_num(L) + "\" y1=\"" + detail::svg_num(T) + "\" x2=\"" +
           detail::svg_num(L) + "\" y2=\"" + detail::svg_num(B) +
           "\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + detail::svg_num(0.5 * (L + R)) + "\" y=\"" + detail::svg_num(H - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
           detail::xml_escape(x_label) + "</text>\n";
    out += "<text x=\"18\" y=\"" + detail::svg_num(0.5 * (T + B)) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 18 " +
           detail::svg_num(0.5 * (T + B)) + ")\">" + detail::xml_escape(y_label) + "</text>\n";
    // axis extreme ticks
    out += "<text x=\"" + detail::svg_num(L) + "\" y=\"" + detail::svg_num(B + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
           detail::svg_num(xr.lo) + "</text>\n";
    out += "<text x=\"" + detail::svg_num(R) + "\" y=\"" + detail::svg_num(B + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
           detail::svg_num(xr.hi) + "</text>\n";
    out += "<text x=\"" + detail::svg_num(L - 6) + "\" y=\"" + detail::svg_num(B) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
           detail::svg_num(yr.lo) + "</text>\n";
    out += "<text x=\"" + detail::svg_num(L - 6) + "\" y=\"" + detail::svg_num(T + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
           detail::svg_num(yr.hi) + "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        out += "<g data-label=\"" + detail::xml_escape(s.label) + "\">\n";
        out += "<polyline fill=\"none\" stroke=\"";
        out += detail::series_color(si);
        out += "\" stroke-width=\"1.8\"";
        if (s.dashed) out += " stroke-dasharray=\"6 4\"";
        out += " points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (i > 0) out += " ";
            out += detail::svg_num(xr.scale(s.x[i], L, R)) + "," +
                   detail::svg_num(yr.scale(s.y[i], B, T));
        }
        out += "\"/>\n</g>\n";
        // legend row
        const double ly = T + 16.0 * static_cast<double>(si);
        out += "<line x1=\"" + detail::svg_num(R - 150) + "\" y1=\"" + detail::svg_num(ly) +
               "\" x2=\"" + detail::svg_num(R - 126) + "\" y2=\"" + detail::svg_num(ly) +
               "\" stroke=\"";
        out += detail::series_color(si);
        out += "\" stroke-width=\"1.8\"";
        if (s.dashed) out += " stroke-dasharray=\"6 4\"";
        out += "/>\n";
        out += "<text x=\"" + detail::svg_num(R - 120) + "\" y=\"" + detail::svg_num(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + detail::xml_escape(s.label) +
               "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

/// Renders one value per category as an SVG bar chart (bars above and below
/// zero supported). The single series is labeled via data-label.
inline std::string render_bar_chart(const std::string& title, const std::string& x_label,
                                    const std::string& y_label, const std::string& series_label,
                                    const std::vector<double>& values) {
    if (values.empty()) throw InvalidArgumentError("bar chart needs at least one value");
    double ymin = 0.0, ymax = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) throw InvalidValueError("chart data must be finite");
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
    }
    if (ymax == ymin) ymax = ymin + 1.0;
    const detail::AxisRange yr = detail::axis_range(ymin, ymax);

    const double W = 640, H = 420;
    const double L = 70, R = W - 20, T = 50, B = H - 50;
    const double n = static_cast<double>(values.size());
    const double slot = (R - L) / n;
    const double bar = 0.7 * slot;

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
           "viewBox=\"0 0 640 420\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"420\" fill=\"#ffffff\"/>\n";
    out += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" +
           detail::xml_escape(title) + "</text>\n";
    out += "<line x1=\"" + detail::svg_num(L) + "\" y1=\"" + detail::svg_num(T) + "\" x2=\"" +
           detail::svg_num(L) + "\" y2=\"" + detail::svg_num(B) +
           "\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
    const double zero_y = yr.scale(0.0, B, T);
    out += "<line x1=\"" + detail::svg_num(L) + "\" y1=\"" + detail::svg_num(zero_y) +
           "\" x2=\"" + detail::svg_num(R) + "\" y2=\"" + detail::svg_num(zero_y) +
           "\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + detail::svg_num(0.5 * (L + R)) + "\" y=\"" + detail::svg_num(H - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
           detail::xml_escape(x_label) + "</text>\n";
    out += "<text x=\"18\" y=\"" + detail::svg_num(0.5 * (T + B)) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 18 " +
           detail::svg_num(0.5 * (T + B)) + ")\">" + detail::xml_escape(y_label) + "</text>\n";
    out += "<text x=\"" + detail::svg_num(L - 6) + "\" y=\"" + detail::svg_num(B) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
           detail::svg_num(yr.lo) + "</text>\n";
    out += "<text x=\"" + detail::svg_num(L - 6) + "\" y=\"" + detail::svg_num(T + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
           detail::svg_num(yr.hi) + "</text>\n";

    out += "<g data-label=\"" + detail::xml_escape(series_label) + "\">\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double cx = L + slot * (static_cast<double>(i) + 0.5);
        const double vy = yr.scale(values[i], B, T);
        const double top = std::min(vy, zero_y);
        const double height = std::max(std::abs(vy - zero_y), 0.5);
        out += "<rect x=\"" + detail::svg_num(cx - 0.5 * bar) + "\" y=\"" +
               detail::svg_num(top) + "\" width=\"" + detail::svg_num(bar) + "\" height=\"" +
               detail::svg_num(height) + "\" fill=\"";
        out += values[i] >= 0.0 ? "#1f6fb2" : "#d1495b";
        out += "\"/>\n";
    }
    out += "</g>\n";
    out += "<text x=\"" + detail::svg_num(R - 120) + "\" y=\"" + detail::svg_num(T + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + detail::xml_escape(series_label) +
           "</text>\n";
    out += "</svg>\n";
    return out;
}

}  // namespace advsec
