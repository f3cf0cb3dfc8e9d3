#include "eikorec/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "eikorec/errors.hpp"

namespace eikorec {

namespace {

constexpr double kW = 640.0, kH = 480.0;
constexpr double kPadL = 70.0, kPadR = 20.0, kPadT = 40.0, kPadB = 50.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Axis {
    double lo = 0.0, hi = 1.0;
    double to_px(double v, double px_lo, double px_hi) const {
        double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
        return px_lo + t * (px_hi - px_lo);
    }
};

double nice_step(double span) {
    double raw = span / 6.0;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag) return m * mag;
    return 10.0 * mag;
}

} // namespace

void write_line_chart_svg(const std::string& path, const std::vector<SvgSeries>& series,
                          bool log_y, const std::string& x_label, const std::string& y_label,
                          const std::string& title) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IOError("cannot open " + path + " for writing");

    Axis ax, ay;
    ax.lo = std::numeric_limits<double>::infinity();
    ax.hi = -ax.lo;
    ay.lo = ax.lo;
    ay.hi = ax.hi;
    for (const SvgSeries& s : series) {
        for (double v : s.x) {
            ax.lo = std::min(ax.lo, v);
            ax.hi = std::max(ax.hi, v);
        }
        for (double v : s.y) {
            double w = log_y ? (v > 0.0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN()) : v;
            if (std::isnan(w)) continue;
            ay.lo = std::min(ay.lo, w);
            ay.hi = std::max(ay.hi, w);
        }
    }
    if (!std::isfinite(ax.lo)) { ax.lo = 0.0; ax.hi = 1.0; }
    if (!std::isfinite(ay.lo)) { ay.lo = 0.0; ay.hi = 1.0; }
    if (ax.hi == ax.lo) ax.hi = ax.lo + 1.0;
    if (ay.hi == ay.lo) ay.hi = ay.lo + 1.0;

    std::fprintf(f, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                    "viewBox=\"0 0 %g %g\" font-family=\"sans-serif\" font-size=\"12\">\n",
                 kW, kH, kW, kH);
    std::fprintf(f, "<rect width=\"%g\" height=\"%g\" fill=\"white\"/>\n", kW, kH);
    std::fprintf(f, "<text x=\"%g\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">%s</text>\n",
                 kW / 2, title.c_str());

    const double px0 = kPadL, px1 = kW - kPadR, py0 = kH - kPadB, py1 = kPadT;
    std::fprintf(f, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"#333\"/>\n",
                 px0, py1, px1 - px0, py0 - py1);

    // x ticks
    double step = nice_step(ax.hi - ax.lo);
    for (double v = std::ceil(ax.lo / step) * step; v <= ax.hi + 1e-12; v += step) {
        double px = ax.to_px(v, px0, px1);
        std::fprintf(f, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#ccc\"/>\n", px, py0, px, py1);
        std::fprintf(f, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%g</text>\n", px, py0 + 16, v);
    }
    // y ticks
    if (log_y) {
        for (double e = std::floor(ay.lo); e <= std::ceil(ay.hi); e += 1.0) {
            if (e < ay.lo - 1e-9 || e > ay.hi + 1e-9) continue;
            double py = ay.to_px(e, py0, py1);
            std::fprintf(f, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#ccc\"/>\n", px0, py, px1, py);
            std::fprintf(f, "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">1e%g</text>\n", px0 - 6, py + 4, e);
        }
    } else {
        double ystep = nice_step(ay.hi - ay.lo);
        for (double v = std::ceil(ay.lo / ystep) * ystep; v <= ay.hi + 1e-12; v += ystep) {
            double py = ay.to_px(v, py0, py1);
            std::fprintf(f, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#ccc\"/>\n", px0, py, px1, py);
            std::fprintf(f, "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%g</text>\n", px0 - 6, py + 4, v);
        }
    }
    std::fprintf(f, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%s</text>\n", (px0 + px1) / 2,
                 kH - 12.0, x_label.c_str());
    std::fprintf(f, "<text x=\"16\" y=\"%g\" text-anchor=\"middle\" transform=\"rotate(-90 16 %g)\">%s</text>\n",
                 (py0 + py1) / 2, (py0 + py1) / 2, y_label.c_str());

    int color = 0;
    for (const SvgSeries& s : series) {
        std::fprintf(f, "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"1.5\" points=\"",
                     kColors[color % 6]);
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            double yv = log_y ? (s.y[k] > 0.0 ? std::log10(s.y[k]) : ay.lo) : s.y[k];
            std::fprintf(f, "%.2f,%.2f ", ax.to_px(s.x[k], px0, px1), ay.to_px(yv, py0, py1));
        }
        std::fprintf(f, "\"/>\n");
        std::fprintf(f, "<text x=\"%g\" y=\"%g\" fill=\"%s\">%s</text>\n", px1 - 150.0,
                     py1 + 16.0 + 16.0 * color, kColors[color % 6], s.label.c_str());
        ++color;
    }
    std::fprintf(f, "</svg>\n");
    if (std::fclose(f) != 0) throw IOError("write to " + path + " failed");
}

void write_midpoint_paths_svg(const std::string& path, const std::vector<std::vector<Vec2>>& paths,
                              const std::vector<Vec2>& start, const std::vector<Vec2>& reference) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IOError("cannot open " + path + " for writing");
    const double size = 480.0, pad = 40.0;
    auto px = [&](double v) { return pad + v * (size - 2 * pad); };
    auto py = [&](double v) { return size - pad - v * (size - 2 * pad); };

    std::fprintf(f, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                    "viewBox=\"0 0 %g %g\" font-family=\"sans-serif\" font-size=\"12\">\n",
                 size, size, size, size);
    std::fprintf(f, "<rect width=\"%g\" height=\"%g\" fill=\"white\"/>\n", size, size);
    std::fprintf(f, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"#333\"/>\n",
                 px(0.0), py(1.0), px(1.0) - px(0.0), py(0.0) - py(1.0));

    int color = 0;
    for (const auto& p : paths) {
        std::fprintf(f, "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"1.5\" points=\"",
                     kColors[color % 6]);
        for (Vec2 v : p) std::fprintf(f, "%.2f,%.2f ", px(v.x), py(v.y));
        std::fprintf(f, "\"/>\n");
        ++color;
    }
    for (Vec2 v : start)
        std::fprintf(f, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"5\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n",
                     px(v.x), py(v.y));
    for (Vec2 v : reference) {
        double cx = px(v.x), cy = py(v.y);
        for (int k = 0; k < 3; ++k) {
            double a = M_PI * k / 3.0;
            std::fprintf(f, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n",
                         cx - 6 * std::cos(a), cy - 6 * std::sin(a), cx + 6 * std::cos(a), cy + 6 * std::sin(a));
        }
    }
    std::fprintf(f, "<text x=\"%g\" y=\"%g\">start</text>\n", px(0.02), py(0.02));
    std::fprintf(f, "</svg>\n");
    if (std::fclose(f) != 0) throw IOError("write to " + path + " failed");
}

} // namespace eikorec
