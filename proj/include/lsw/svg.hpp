#ifndef LSW_SVG_HPP
#define LSW_SVG_HPP

// Minimal SVG figures: acf-style localized autocovariance plot and the grid
// of sampling densities.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lsw/harness.hpp"
#include "lsw/io.hpp"
#include "lsw/kde.hpp"
#include "lsw/lacv.hpp"

namespace lsw::svg {

struct Box {
    double x = 0, y = 0, w = 0, h = 0;
};

/// Linear map from data ranges into a pixel box (y grows downwards).
struct Frame {
    Box box;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

    double px(double x) const { return box.x + (x - x0) / (x1 - x0) * box.w; }
    double py(double y) const { return box.y + box.h - (y - y0) / (y1 - y0) * box.h; }
};

inline std::string num(double v) { return format_sig(v, 6); }

inline void header(std::ostream& os, int width, int height) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline void line(std::ostream& os, double x1, double y1, double x2, double y2, const std::string& style = "stroke=\"black\"") {
    os << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2) << "\" "
       << style << "/>\n";
}

inline void text(std::ostream& os, double x, double y, const std::string& s, const std::string& anchor = "middle") {
    os << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\"" << anchor << "\">" << s << "</text>\n";
}

inline void polyline(std::ostream& os, const Frame& f, const std::vector<double>& x, const std::vector<double>& y,
                     const std::string& style) {
    os << "<polyline fill=\"none\" " << style << " points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? " " : "") << num(f.px(x[i])) << ',' << num(f.py(y[i]));
    os << "\"/>\n";
}

inline void axes(std::ostream& os, const Frame& f, const std::string& title) {
    const auto& b = f.box;
    os << "<rect x=\"" << num(b.x) << "\" y=\"" << num(b.y) << "\" width=\"" << num(b.w) << "\" height=\"" << num(b.h)
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    text(os, b.x + b.w / 2, b.y - 6, title);
    text(os, b.x, b.y + b.h + 14, num(f.x0));
    text(os, b.x + b.w, b.y + b.h + 14, num(f.x1));
    text(os, b.x - 4, b.y + b.h, num(f.y0), "end");
    text(os, b.x - 4, b.y + 10, num(f.y1), "end");
}

/// Estimates as vertical bars from zero, CI whiskers, and a zero line.
inline void write_lacv_plot(std::ostream& os, const LacvEstimate& e, bool correlation = false) {
    const int W = 640, H = 400;
    header(os, W, H);
    const bool corr = correlation && e.as_correlation.has_value();
    const auto& v = corr ? e.as_correlation->value : e.c_hat;
    const auto& lo = corr ? e.as_correlation->ci_low : e.ci_low;
    const auto& hi = corr ? e.as_correlation->ci_high : e.ci_high;
    double ymin = std::min(0.0, *std::min_element(lo.begin(), lo.end()));
    double ymax = std::max(0.0, *std::max_element(hi.begin(), hi.end()));
    if (ymax <= ymin) ymax = ymin + 1.0;
    const double pad = 0.05 * (ymax - ymin);
    Frame f{{70, 40, W - 100.0, H - 90.0}, -0.5, static_cast<double>(e.lags.back()) + 0.5, ymin - pad, ymax + pad};
    std::ostringstream title;
    title << (corr ? "localized autocorrelation" : "localized autocovariance") << " at index " << e.index;
    axes(os, f, title.str());
    line(os, f.px(f.x0), f.py(0.0), f.px(f.x1), f.py(0.0), "stroke=\"gray\"");
    for (std::size_t i = 0; i < e.lags.size(); ++i) {
        const double x = f.px(e.lags[i]);
        line(os, x, f.py(0.0), x, f.py(v[i]), "stroke=\"black\" stroke-width=\"2\"");
        line(os, x, f.py(lo[i]), x, f.py(hi[i]), "stroke=\"blue\" stroke-dasharray=\"3,2\"");
        line(os, x - 4, f.py(lo[i]), x + 4, f.py(lo[i]), "stroke=\"blue\"");
        line(os, x - 4, f.py(hi[i]), x + 4, f.py(hi[i]), "stroke=\"blue\"");
    }
    text(os, W / 2.0, H - 12.0, "lag");
    os << "</svg>\n";
}

/// One panel per (T, lag) cell, two columns: KDE (solid), matched Gaussian
/// (dashed) and the reference value (vertical dashed line).
inline void write_density_grid(std::ostream& os, const NormalityResult& r, int lag) {
    std::vector<const NormalityCell*> cells;
    for (const auto& c : r.cells) {
        if (c.lag == lag) cells.push_back(&c);
    }
    const int cols = 2;
    const int rows = static_cast<int>((cells.size() + 1) / 2);
    const double pw = 360, ph = 260;
    header(os, static_cast<int>(cols * pw), static_cast<int>(std::max(1, rows) * ph));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = *cells[i];
        const Box b{(static_cast<double>(i % cols)) * pw + 60, (static_cast<double>(i / cols)) * ph + 30, pw - 80, ph - 70};
        std::vector<double> gauss;
        for (double x : c.density.x) gauss.push_back(normal_density(x, c.moments.mean, c.moments.sd));
        double ymax = std::max(*std::max_element(c.density.density.begin(), c.density.density.end()),
                               *std::max_element(gauss.begin(), gauss.end()));
        double x0 = c.density.x.front(), x1 = c.density.x.back();
        if (c.reference) {
            x0 = std::min(x0, *c.reference);
            x1 = std::max(x1, *c.reference);
        }
        Frame f{b, x0, x1, 0.0, 1.05 * ymax};
        axes(os, f, "T = " + std::to_string(c.T) + ", lag " + std::to_string(c.lag));
        polyline(os, f, c.density.x, c.density.density, "stroke=\"black\"");
        polyline(os, f, c.density.x, gauss, "stroke=\"red\" stroke-dasharray=\"5,3\"");
        if (c.reference) {
            line(os, f.px(*c.reference), f.py(0.0), f.px(*c.reference), f.py(f.y1), "stroke=\"blue\" stroke-dasharray=\"2,2\"");
        }
    }
    os << "</svg>\n";
}

}  // namespace lsw::svg

#endif  // LSW_SVG_HPP
