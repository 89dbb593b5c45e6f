#ifndef LSW_EWS_HPP
#define LSW_EWS_HPP

// Evolutionary wavelet spectrum estimation: raw periodogram, running-mean
// smoothing over time, and A^{-1} bias correction.

#include <Eigen/Dense>

#include <cmath>
#include <ostream>
#include <string>

#include "lsw/error.hpp"
#include "lsw/time_series.hpp"
#include "lsw/wavelet.hpp"

namespace lsw {

enum class EwsStage { raw, smoothed, corrected };

inline const char* to_string(EwsStage s) {
    switch (s) {
        case EwsStage::raw: return "raw";
        case EwsStage::smoothed: return "smoothed";
        case EwsStage::corrected: return "corrected";
    }
    return "?";
}

/// Levels x time matrix of spectrum values; row j - 1 is level j.
struct Ews {
    Eigen::MatrixXd values;
    EwsStage stage = EwsStage::raw;
    int smoothing_halfwidth = 0;

    int levels() const noexcept { return static_cast<int>(values.rows()); }
    std::size_t length() const noexcept { return static_cast<std::size_t>(values.cols()); }
    double operator()(int level, std::size_t k) const { return values(level - 1, static_cast<Eigen::Index>(k)); }
};

/// Halfwidth s with 2s + 1 the odd integer nearest sqrt(T).
inline int default_smoothing_halfwidth(std::size_t T) {
    auto w = static_cast<long>(std::lround(std::sqrt(static_cast<double>(T))));
    if (w % 2 == 0) ++w;
    return static_cast<int>((w - 1) / 2);
}

/// Levels kept for correction and testing: j with 2^j <= T/4.
inline int retained_levels(std::size_t T) { return std::max(1, dyadic_log2(T) - 2); }

inline Ews raw_periodogram(const TimeSeries& x, int max_level = 0) {
    return Ews{haar_ndwt_periodogram(x, max_level).d, EwsStage::raw, 0};
}

/// Centered running mean over 2s + 1 time points per level, periodic wrap.
inline Ews smooth_periodogram(const Ews& raw, int s) {
    if (raw.stage != EwsStage::raw) throw InputError("smooth_periodogram expects a raw periodogram");
    if (s < 0) throw InputError("smoothing halfwidth must be non-negative");
    const auto T = static_cast<Eigen::Index>(raw.length());
    if (2 * static_cast<Eigen::Index>(s) + 1 >= T) throw InputError("smoothing window must be shorter than the series");
    Ews out{raw.values, EwsStage::smoothed, s};
    if (s == 0) return out;
    const double w = 1.0 / (2.0 * s + 1.0);
    for (Eigen::Index j = 0; j < raw.values.rows(); ++j) {
        double acc = 0.0;
        for (Eigen::Index m = -s; m <= s; ++m) acc += raw.values(j, (m + T) % T);
        for (Eigen::Index k = 0; k < T; ++k) {
            out.values(j, k) = acc * w;
            acc += raw.values(j, (k + s + 1) % T) - raw.values(j, (k - s + T) % T);
        }
    }
    return out;
}

/// Premultiply every time column by A^{-1} of the first `levels` levels
/// (default: all rows present).  Corrected values may be slightly negative.
inline Ews correct_spectrum(const Ews& smoothed, int levels = 0) {
    if (smoothed.stage != EwsStage::smoothed) throw InputError("correct_spectrum expects a smoothed periodogram");
    if (levels <= 0) levels = smoothed.levels();
    if (levels > smoothed.levels()) throw InputError("cannot correct more levels than are present");
    const auto a = a_matrix(levels);
    Ews out{a->inverse * smoothed.values.topRows(levels), EwsStage::corrected, smoothed.smoothing_halfwidth};
    return out;
}

/// Convenience: raw -> smoothed -> corrected on the retained levels.
struct EwsEstimate {
    Ews raw;
    Ews smoothed;
    Ews corrected;
};

inline EwsEstimate estimate_ews(const TimeSeries& x, int s = -1, int levels = 0) {
    if (s < 0) s = default_smoothing_halfwidth(x.size());
    if (levels <= 0) levels = retained_levels(x.size());
    EwsEstimate e;
    e.raw = raw_periodogram(x);
    e.smoothed = smooth_periodogram(e.raw, s);
    e.corrected = correct_spectrum(e.smoothed, levels);
    return e;
}

/// CSV with one row per level (finest first) and one column per time point.
/// `clip` zeroes negative corrected values, for display only.
template <class Format>
void write_ews_csv(std::ostream& os, const Ews& e, Format&& fmt, bool clip = false) {
    for (Eigen::Index j = 0; j < e.values.rows(); ++j) {
        for (Eigen::Index k = 0; k < e.values.cols(); ++k) {
            const double v = e.values(j, k);
            if (k) os << ',';
            os << fmt(clip && v < 0.0 ? 0.0 : v);
        }
        os << '\n';
    }
}

}  // namespace lsw

#endif  // LSW_EWS_HPP
