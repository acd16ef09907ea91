#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "annsim/io.hpp"

namespace annsim::svg {

// Fixed palette; series beyond its length cycle.
inline const std::vector<std::string>& palette() {
    static const std::vector<std::string> colors{"#1f77b4", "#ff7f0e", "#2ca02c",
                                                 "#d62728", "#9467bd", "#8c564b"};
    return colors;
}

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = false;  // draw a dot at every sample
};

// Star markers, e.g. detected peaks.
struct PointSet {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#d62728";
};

struct VLine {
    double x = 0.0;
    std::string color = "#555555";
};

// Shaded x-interval, e.g. a ground-truth event.
struct Band {
    double x0 = 0.0;
    double x1 = 0.0;
    std::string color = "#2ca02c";
};

struct Panel {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    std::vector<Series> series;
    std::vector<PointSet> points;
    std::vector<VLine> vlines;
    std::vector<Band> bands;
    std::optional<std::pair<double, double>> y_range;  // fixed scale when set
};

namespace detail {

inline std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string fmt_tick(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
    void include(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
};

// Maps data coordinates into one panel's plot box.
struct Box {
    double x0, y0, w, h;  // plot area in pixels (y grows downward)
    double xlo, xhi, ylo, yhi;

    double px(double x) const {
        const double span = xhi - xlo;
        return x0 + (span > 0 ? (x - xlo) / span : 0.5) * w;
    }
    double py(double y) const {
        const double span = yhi - ylo;
        return y0 + h - (span > 0 ? (y - ylo) / span : 0.5) * h;
    }
};

inline void data_extent(const Panel& p, Range& rx, Range& ry) {
    bool any = false;
    auto touch = [&](double x, double y) {
        if (!any) {
            rx.lo = rx.hi = x;
            ry.lo = ry.hi = y;
            any = true;
        } else {
            rx.include(x);
            ry.include(y);
        }
    };
    for (const auto& s : p.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) touch(s.x[i], s.y[i]);
    for (const auto& s : p.points)
        for (std::size_t i = 0; i < s.x.size(); ++i) touch(s.x[i], s.y[i]);
    for (const auto& v : p.vlines) rx.include(v.x);
    for (const auto& b : p.bands) {
        rx.include(b.x0);
        rx.include(b.x1);
    }
    if (!any) {
        rx = {0.0, 1.0};
        ry = {0.0, 1.0};
    }
    if (p.y_range) {
        ry.lo = p.y_range->first;
        ry.hi = p.y_range->second;
    }
    if (rx.hi - rx.lo < 1e-12) rx.hi = rx.lo + 1.0;
    if (ry.hi - ry.lo < 1e-12) ry.hi = ry.lo + 1.0;
}

inline void emit_panel(std::ostream& out, const Panel& p, double top, double width,
                       double height) {
    const double ml = 64, mr = 16, mt = 28, mb = 44;
    Range rx, ry;
    data_extent(p, rx, ry);
    const double ypad = p.y_range ? 0.0 : 0.05 * (ry.hi - ry.lo);
    Box box{ml, top + mt, width - ml - mr, height - mt - mb,
            rx.lo, rx.hi, ry.lo - ypad, ry.hi + ypad};

    for (const auto& b : p.bands)
        out << "  <rect x=\"" << fmt(box.px(b.x0)) << "\" y=\"" << fmt(box.y0) << "\" width=\""
            << fmt(std::max(0.5, box.px(b.x1) - box.px(b.x0))) << "\" height=\"" << fmt(box.h)
            << "\" fill=\"" << b.color << "\" fill-opacity=\"0.15\"/>\n";

    out << "  <rect x=\"" << fmt(box.x0) << "\" y=\"" << fmt(box.y0) << "\" width=\""
        << fmt(box.w) << "\" height=\"" << fmt(box.h)
        << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";

    const int n_ticks = 5;
    for (int i = 0; i <= n_ticks; ++i) {
        const double fx = static_cast<double>(i) / n_ticks;
        const double xv = box.xlo + fx * (box.xhi - box.xlo);
        const double xp = box.px(xv);
        out << "  <line x1=\"" << fmt(xp) << "\" y1=\"" << fmt(box.y0 + box.h) << "\" x2=\""
            << fmt(xp) << "\" y2=\"" << fmt(box.y0 + box.h + 4) << "\" stroke=\"#333\"/>\n";
        out << "  <text x=\"" << fmt(xp) << "\" y=\"" << fmt(box.y0 + box.h + 18)
            << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt_tick(xv) << "</text>\n";
        const double yv = box.ylo + fx * (box.yhi - box.ylo);
        const double yp = box.py(yv);
        out << "  <line x1=\"" << fmt(box.x0 - 4) << "\" y1=\"" << fmt(yp) << "\" x2=\""
            << fmt(box.x0) << "\" y2=\"" << fmt(yp) << "\" stroke=\"#333\"/>\n";
        out << "  <text x=\"" << fmt(box.x0 - 8) << "\" y=\"" << fmt(yp + 4)
            << "\" font-size=\"11\" text-anchor=\"end\">" << fmt_tick(yv) << "</text>\n";
    }

    for (const auto& v : p.vlines)
        out << "  <line x1=\"" << fmt(box.px(v.x)) << "\" y1=\"" << fmt(box.y0) << "\" x2=\""
            << fmt(box.px(v.x)) << "\" y2=\"" << fmt(box.y0 + box.h) << "\" stroke=\"" << v.color
            << "\" stroke-dasharray=\"4 3\"/>\n";

    for (std::size_t si = 0; si < p.series.size(); ++si) {
        const auto& s = p.series[si];
        const auto& color = palette()[si % palette().size()];
        if (s.x.size() >= 2) {
            out << "  <polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                out << fmt(box.px(s.x[i])) << ',' << fmt(box.py(s.y[i])) << ' ';
            out << "\"/>\n";
        }
        if (s.markers || s.x.size() < 2)
            for (std::size_t i = 0; i < s.x.size(); ++i)
                out << "  <circle cx=\"" << fmt(box.px(s.x[i])) << "\" cy=\""
                    << fmt(box.py(s.y[i])) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }

    for (const auto& ps : p.points)
        for (std::size_t i = 0; i < ps.x.size(); ++i) {
            const double x = box.px(ps.x[i]), y = box.py(ps.y[i]);
            out << "  <path d=\"M " << fmt(x - 4) << ' ' << fmt(y) << " L " << fmt(x + 4) << ' '
                << fmt(y) << " M " << fmt(x) << ' ' << fmt(y - 4) << " L " << fmt(x) << ' '
                << fmt(y + 4) << "\" stroke=\"" << ps.color << "\" stroke-width=\"1.5\"/>\n";
        }

    out << "  <text x=\"" << fmt(box.x0 + box.w / 2) << "\" y=\"" << fmt(top + 16)
        << "\" font-size=\"13\" font-weight=\"bold\" text-anchor=\"middle\">" << escape(p.title)
        << "</text>\n";
    out << "  <text x=\"" << fmt(box.x0 + box.w / 2) << "\" y=\""
        << fmt(box.y0 + box.h + 34) << "\" font-size=\"12\" text-anchor=\"middle\">"
        << escape(p.xlabel) << "</text>\n";
    out << "  <text x=\"14\" y=\"" << fmt(box.y0 + box.h / 2)
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << fmt(box.y0 + box.h / 2) << ")\">" << escape(p.ylabel) << "</text>\n";

    // Legend, top-right inside the plot box.
    double ly = box.y0 + 14;
    for (std::size_t si = 0; si < p.series.size(); ++si) {
        if (p.series[si].label.empty()) continue;
        const auto& color = palette()[si % palette().size()];
        out << "  <line x1=\"" << fmt(box.x0 + box.w - 110) << "\" y1=\"" << fmt(ly - 4)
            << "\" x2=\"" << fmt(box.x0 + box.w - 92) << "\" y2=\"" << fmt(ly - 4)
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "  <text x=\"" << fmt(box.x0 + box.w - 86) << "\" y=\"" << fmt(ly)
            << "\" font-size=\"11\">" << escape(p.series[si].label) << "</text>\n";
        ly += 16;
    }
    for (const auto& ps : p.points) {
        if (ps.label.empty()) continue;
        out << "  <text x=\"" << fmt(box.x0 + box.w - 110) << "\" y=\"" << fmt(ly)
            << "\" font-size=\"11\" fill=\"" << ps.color << "\">+ " << escape(ps.label)
            << "</text>\n";
        ly += 16;
    }
}

}  // namespace detail

// Panels stack vertically and share the document width.
inline void write_chart(std::ostream& out, const std::vector<Panel>& panels, double width = 720,
                        double panel_height = 240) {
    const double height = panel_height * static_cast<double>(panels.size());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < panels.size(); ++i)
        detail::emit_panel(out, panels[i], static_cast<double>(i) * panel_height, width,
                           panel_height);
    out << "</svg>\n";
}

inline void write_chart(const std::filesystem::path& path, const std::vector<Panel>& panels,
                        double width = 720, double panel_height = 240) {
    auto out = io::detail::open_out(path);
    write_chart(out, panels, width, panel_height);
}

}  // namespace annsim::svg
