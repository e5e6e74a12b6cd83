#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fgp/engine.hpp"
#include "fgp/error.hpp"

namespace fgp {

namespace detail {

struct PlotLine {
    std::string_view name;
    std::string_view color;
    const std::vector<double> DecompositionSeries::*column;
    bool has_policy_variant;
};

inline constexpr PlotLine plot_lines[] = {
    {"log G", "green", &DecompositionSeries::log_g, false},
    {"EG", "blue", &DecompositionSeries::eg, false},
    {"C_TM", "gold", &DecompositionSeries::c_tm, false},
    {"C_G", "orange", &DecompositionSeries::c_g, false},
    {"DLRET", "red", &DecompositionSeries::dlret, true},
    {"log V", "black", &DecompositionSeries::log_v, true},
    {"log U", "purple", &DecompositionSeries::log_u, true},
};

inline std::string svg_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

} // namespace detail

/// Stacked-decomposition chart: one line per term, log V in black. When a
/// second series is given (the optimistic delisting policy) its DLRET, log V
/// and log U lines are drawn dashed over the solid conservative ones.
inline void write_svg_plot(std::ostream& out, std::string_view title, const DecompositionSeries& solid,
                           const DecompositionSeries* dashed = nullptr) {
    constexpr double W = 960, H = 540, left = 70, right = 170, top = 40, bottom = 50;
    const double pw = W - left - right, ph = H - top - bottom;
    const std::size_t n = solid.size();

    double lo = 0.0, hi = 0.0;
    auto widen = [&](const DecompositionSeries& s) {
        for (const auto& line : detail::plot_lines)
            for (double v : s.*line.column)
                if (std::isfinite(v)) {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
    };
    widen(solid);
    if (dashed) widen(*dashed);
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    auto x_of = [&](std::size_t t) { return left + (n > 1 ? pw * static_cast<double>(t) / static_cast<double>(n - 1) : 0.0); };
    auto y_of = [&](double v) { return top + ph * (hi - v) / (hi - lo); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << left << "\" y=\"24\" font-size=\"15\">" << detail::svg_escape(title) << "</text>\n";

    // axes and grid
    out << "<g stroke=\"#ccc\" stroke-width=\"1\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double v = lo + (hi - lo) * i / 5.0;
        const double y = y_of(v);
        out << "<line x1=\"" << left << "\" y1=\"" << detail::num(y) << "\" x2=\"" << left + pw << "\" y2=\""
            << detail::num(y) << "\"/>\n";
    }
    out << "</g>\n<g fill=\"#333\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double v = lo + (hi - lo) * i / 5.0;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", v);
        out << "<text x=\"" << left - 6 << "\" y=\"" << detail::num(y_of(v) + 4) << "\" text-anchor=\"end\">" << buf
            << "</text>\n";
    }
    for (int i = 0; i <= 5 && n > 1; ++i) {
        const std::size_t t = (n - 1) * static_cast<std::size_t>(i) / 5;
        out << "<text x=\"" << detail::num(x_of(t)) << "\" y=\"" << H - bottom + 18 << "\" text-anchor=\"middle\">" << t
            << "</text>\n";
    }
    out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">day</text>\n";
    out << "</g>\n";
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#333\"/>\n";

    auto polyline = [&](const std::vector<double>& col, std::string_view color, bool dash) {
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.4\"";
        if (dash) out << " stroke-dasharray=\"6 4\"";
        out << " points=\"";
        for (std::size_t t = 0; t < col.size(); ++t) {
            if (t) out << ' ';
            out << detail::num(x_of(t)) << ',' << detail::num(y_of(col[t]));
        }
        out << "\"/>\n";
    };
    for (const auto& line : detail::plot_lines) polyline(solid.*line.column, line.color, false);
    if (dashed)
        for (const auto& line : detail::plot_lines)
            if (line.has_policy_variant) polyline(dashed->*line.column, line.color, true);

    // legend
    double ly = top + 10;
    const double lx = left + pw + 16;
    for (const auto& line : detail::plot_lines) {
        out << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly << "\" stroke=\""
            << line.color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 4 << "\">" << line.name << "</text>\n";
        ly += 20;
    }
    if (dashed) {
        ly += 6;
        out << "<text x=\"" << lx << "\" y=\"" << ly << "\">solid: conservative</text>\n";
        out << "<text x=\"" << lx << "\" y=\"" << ly + 16 << "\">dashed: optimistic</text>\n";
    }
    out << "</svg>\n";
}

inline void write_svg_plot(const std::string& file, std::string_view title, const DecompositionSeries& solid,
                           const DecompositionSeries* dashed = nullptr) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + file + "'");
    write_svg_plot(out, title, solid, dashed);
    if (!out) throw Error(ErrorKind::Io, "write failed for '" + file + "'");
}

} // namespace fgp
