#ifndef LSW_LACV_HPP
#define LSW_LACV_HPP

// Localized autocovariance c(z, tau) = sum_j S_j(z) Psi_j(tau) from the
// corrected spectrum, with pointwise +-2 SE intervals.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "lsw/error.hpp"
#include "lsw/fft.hpp"
#include "lsw/ews.hpp"
#include "lsw/time_series.hpp"
#include "lsw/wavelet.hpp"

namespace lsw {

inline constexpr double lacv_ci_multiplier = 2.0;

struct LacvEstimate {
    double z = 0.0;
    /// 1-based time index the estimate was taken at.
    std::size_t index = 0;
    std::vector<int> lags;
    std::vector<double> c_hat;
    std::vector<double> variance;
    std::vector<double> ci_low;
    std::vector<double> ci_high;

    /// c_hat(tau) / c_hat(0) with the interval scaled by the same factor;
    /// empty when c_hat(0) <= 0.
    struct Correlation {
        std::vector<double> value;
        std::vector<double> ci_low;
        std::vector<double> ci_high;
    };
    std::optional<Correlation> as_correlation;

    double standard_error(std::size_t i) const { return std::sqrt(variance.at(i)); }
};

/// Time index (1-based) for rescaled time z: round(z T), kept s + 1 .. T - s.
inline std::size_t lacv_index(double z, std::size_t T, int s) {
    if (!(z > 0.0 && z < 1.0)) throw InputError("rescaled time z must lie in (0, 1)");
    const auto k = static_cast<long>(std::lround(z * static_cast<double>(T)));
    const long lo = s + 1;
    const long hi = static_cast<long>(T) - s;
    return static_cast<std::size_t>(std::clamp(k, lo, std::max(lo, hi)));
}

inline void check_lag_max(int lag_max, std::size_t T) {
    if (lag_max < 0) throw InputError("lags must be non-negative");
    if (static_cast<std::size_t>(lag_max) * 4 >= T) throw InputError("lag_max must be below T/4");
}

namespace detail {

/// W_jl = sum_{|u| <= 2s} (2s + 1 - |u|) rho_jl(u)^2, where rho_jl(u) is the
/// correlation between level-j and level-l coefficients u apart for a
/// stationary Haar LSW process with spectrum `local` (padded with zeros to
/// all levels).  Falls back to white noise when `local` vanishes.
inline Eigen::MatrixXd window_overlap(const Eigen::VectorXd& local, std::size_t T, int s) {
    const auto bank = circular_filter_bank(T);
    const int n = static_cast<int>(local.size());
    const std::size_t nf = bank->power[0].size();
    std::vector<double> f(nf, 0.0);
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        const double w = std::max(local(j), 0.0);
        total += w;
        for (std::size_t k = 0; k < nf; ++k) f[k] += w * bank->power[static_cast<std::size_t>(j)][k];
    }
    if (!(total > 0.0)) std::fill(f.begin(), f.end(), 1.0);

    std::vector<std::vector<double>> gamma(static_cast<std::size_t>(n * n));
    std::vector<fft::cplx> spec(nf);
    for (int j = 0; j < n; ++j) {
        for (int l = j; l < n; ++l) {
            for (std::size_t k = 0; k < nf; ++k) {
                spec[k] = f[k] * bank->response[static_cast<std::size_t>(j)][k] * std::conj(bank->response[static_cast<std::size_t>(l)][k]);
            }
            gamma[static_cast<std::size_t>(j * n + l)] = fft::irfft(spec, static_cast<int>(T));
        }
    }
    const double df = 2.0 * s + 1.0;
    const auto Tl = static_cast<long>(T);
    Eigen::MatrixXd w(n, n);
    for (int j = 0; j < n; ++j) {
        for (int l = j; l < n; ++l) {
            const auto& g = gamma[static_cast<std::size_t>(j * n + l)];
            const double norm = gamma[static_cast<std::size_t>(j * n + j)][0] * gamma[static_cast<std::size_t>(l * n + l)][0];
            double acc = 0.0;
            if (norm > 0.0) {
                for (long u = -2L * s; u <= 2L * s; ++u) {
                    const double r = g[static_cast<std::size_t>((u % Tl + Tl) % Tl)];
                    acc += (df - static_cast<double>(std::labs(u))) * r * r;
                }
                acc /= norm;
            }
            w(j, l) = w(l, j) = acc;
        }
    }
    return w;
}

}  // namespace detail

/// Var c_hat(z, tau) = Psi(tau)' A^{-1} D A^{-T} Psi(tau), one entry per lag
/// 0..lag_max.  D is the Gaussian covariance of the smoothed periodogram at
/// z: D_jl = 2 I_j I_l W_jl / (2s + 1)^2, with I the smoothed periodogram and
/// W the window overlap of levels j and l under the local spectrum estimate.
/// Taking neighbouring ordinates as independent would reduce it to
/// diag(2 I_j^2 / (2s + 1)), which badly understates the coarse levels.
inline std::vector<double> lacv_variance(const Ews& smoothed, const Ews& corrected, std::size_t index, int lag_max) {
    if (smoothed.stage != EwsStage::smoothed) throw InputError("lacv_variance expects the smoothed periodogram");
    if (corrected.stage != EwsStage::corrected) throw InputError("lacv_variance expects the corrected spectrum");
    if (index < 1 || index > smoothed.length()) throw InputError("time index out of range");
    check_lag_max(lag_max, smoothed.length());
    const int n = corrected.levels();
    const auto a = a_matrix(n);
    const auto psi = autocorr_wavelet(n);
    const auto col = static_cast<Eigen::Index>(index - 1);
    const double df = 2.0 * smoothed.smoothing_halfwidth + 1.0;
    const Eigen::VectorXd p = smoothed.values.col(col).head(n).cwiseAbs();
    const Eigen::MatrixXd w = detail::window_overlap(corrected.values.col(col), smoothed.length(), smoothed.smoothing_halfwidth);
    const Eigen::MatrixXd d = (2.0 / (df * df) * (p * p.transpose())).cwiseProduct(w);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(lag_max) + 1);
    for (int tau = 0; tau <= lag_max; ++tau) {
        const Eigen::VectorXd v = a->inverse.transpose() * psi.column(tau, n);
        const double var = v.dot(d * v);
        if (!(var >= -1e-12 * v.squaredNorm() * d.norm())) throw InternalError("negative localized autocovariance variance");
        out.push_back(std::max(var, 0.0));
    }
    return out;
}

/// Estimate at a 1-based time index from precomputed spectra.
inline LacvEstimate lacv_from_ews(const Ews& smoothed, const Ews& corrected, std::size_t index, int lag_max) {
    const std::size_t T = corrected.length();
    check_lag_max(lag_max, T);
    if (index < 1 || index > T) throw InputError("time index out of range");
    const int n = corrected.levels();
    const auto psi = autocorr_wavelet(n);
    const auto col = static_cast<Eigen::Index>(index - 1);

    LacvEstimate e;
    e.z = static_cast<double>(index) / static_cast<double>(T);
    e.index = index;
    e.variance = lacv_variance(smoothed, corrected, index, lag_max);
    const Eigen::VectorXd s = corrected.values.col(col);
    for (int tau = 0; tau <= lag_max; ++tau) {
        const double c = s.dot(psi.column(tau, n));
        const double half = lacv_ci_multiplier * std::sqrt(e.variance[static_cast<std::size_t>(tau)]);
        e.lags.push_back(tau);
        e.c_hat.push_back(c);
        e.ci_low.push_back(c - half);
        e.ci_high.push_back(c + half);
    }
    if (e.c_hat[0] > 0.0) {
        LacvEstimate::Correlation r;
        const double c0 = e.c_hat[0];
        for (std::size_t i = 0; i < e.c_hat.size(); ++i) {
            r.value.push_back(i == 0 ? 1.0 : e.c_hat[i] / c0);
            r.ci_low.push_back(e.ci_low[i] / c0);
            r.ci_high.push_back(e.ci_high[i] / c0);
        }
        e.as_correlation = std::move(r);
    }
    return e;
}

/// Estimate at the 1-based index `index` (the "nz" of the command line).
inline LacvEstimate lacv_at_index(const TimeSeries& x, std::size_t index, int lag_max, int s = -1) {
    check_lag_max(lag_max, x.size());
    const auto est = estimate_ews(x, s);
    const std::size_t T = x.size();
    const auto hw = static_cast<std::size_t>(est.smoothed.smoothing_halfwidth);
    if (index < 1 || index > T) throw InputError("time index must lie in 1.." + std::to_string(T));
    return lacv_from_ews(est.smoothed, est.corrected, std::clamp(index, hw + 1, T - hw), lag_max);
}

/// Estimate at rescaled time z in (0, 1).
inline LacvEstimate lacv(const TimeSeries& x, double z, int lag_max, int s = -1) {
    check_lag_max(lag_max, x.size());
    const int hw = s >= 0 ? s : default_smoothing_halfwidth(x.size());
    const std::size_t index = lacv_index(z, x.size(), hw);
    const auto est = estimate_ews(x, hw);
    auto e = lacv_from_ews(est.smoothed, est.corrected, index, lag_max);
    e.z = z;
    return e;
}

}  // namespace lsw

#endif  // LSW_LACV_HPP
