#ifndef LSW_KDE_HPP
#define LSW_KDE_HPP

// Sample summaries and a Gaussian kernel density estimate with the
// rule-of-thumb bandwidth 0.9 min(sd, IQR/1.34) n^(-1/5).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "lsw/error.hpp"

namespace lsw {

struct Moments {
    double mean = 0.0;
    double sd = 0.0;  ///< n - 1 denominator
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

/// Moment-ratio skewness m3 / m2^(3/2) and excess kurtosis m4 / m2^2 - 3.
inline Moments sample_moments(std::span<const double> x) {
    const auto n = static_cast<double>(x.size());
    if (x.size() < 2) throw InputError("need at least two observations");
    Moments m;
    m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - m.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m.sd = std::sqrt(m2 / (n - 1.0));
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 > 0.0) {
        m.skewness = m3 / std::pow(m2, 1.5);
        m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return m;
}

/// Quantile with linear interpolation between order statistics (the
/// "type 7" definition).
inline double quantile(std::vector<double> x, double p) {
    if (x.empty()) throw InputError("quantile of an empty sample");
    std::sort(x.begin(), x.end());
    const double h = (static_cast<double>(x.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

inline double rule_of_thumb_bandwidth(std::span<const double> x) {
    if (x.size() < 2) throw InputError("density estimate needs at least two observations");
    const double sd = sample_moments(x).sd;
    std::vector<double> v(x.begin(), x.end());
    const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd;  // IQR can vanish with ties
    if (!(spread > 0.0)) throw InputError("density estimate needs a sample with nonzero spread");
    return 0.9 * spread * std::pow(static_cast<double>(x.size()), -0.2);
}

struct DensityCurve {
    std::vector<double> x;
    std::vector<double> density;
    double bandwidth = 0.0;

    /// Trapezoid rule over the grid.
    double integral() const {
        double s = 0.0;
        for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (density[i] + density[i - 1]) * (x[i] - x[i - 1]);
        return s;
    }
};

/// Gaussian KDE on `grid_points` equally spaced points covering the data
/// range extended by 3h on each side.
inline DensityCurve kde(std::span<const double> sample, std::size_t grid_points = 512) {
    if (grid_points < 2) throw InputError("density grid needs at least two points");
    DensityCurve c;
    c.bandwidth = rule_of_thumb_bandwidth(sample);
    const double h = c.bandwidth;
    const auto [mn, mx] = std::minmax_element(sample.begin(), sample.end());
    const double lo = *mn - 3.0 * h;
    const double hi = *mx + 3.0 * h;
    const double step = (hi - lo) / static_cast<double>(grid_points - 1);
    const double norm = 1.0 / (static_cast<double>(sample.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    c.x.resize(grid_points);
    c.density.resize(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double g = i + 1 == grid_points ? hi : lo + step * static_cast<double>(i);
        double s = 0.0;
        for (double v : sample) {
            const double u = (g - v) / h;
            s += std::exp(-0.5 * u * u);
        }
        c.x[i] = g;
        c.density[i] = s * norm;
    }
    return c;
}

inline double normal_density(double x, double mean, double sd) {
    const double u = (x - mean) / sd;
    return std::exp(-0.5 * u * u) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace lsw

#endif  // LSW_KDE_HPP
