#ifndef LSW_WAVELET_HPP
#define LSW_WAVELET_HPP

// Discrete Haar wavelet machinery.
//
// Level convention used throughout the library: j = 1 is the finest scale
// (filter length 2), j = J = log2(T) the coarsest.  Software that numbers
// levels coarse-to-fine from 0 (e.g. a "level 8" of a length-512 transform)
// maps to j = J - level.
//
// Non-decimated coefficients are aligned so that
//     d_{j,k} = sum_m h_j(m) x_{(k + m - 2^(j-1)) mod T},
// i.e. the filter straddles position k: its positive half covers
// x_{k-2^(j-1)} .. x_{k-1} and its negative half x_k .. x_{k+2^(j-1)-1}.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "lsw/error.hpp"
#include "lsw/fft.hpp"
#include "lsw/time_series.hpp"

namespace lsw {

/// Haar wavelet family.  Other compactly supported families can be added by
/// providing the same static interface.
struct Haar {
    static constexpr const char* name = "haar";

    /// Discrete wavelet vector at level j: 2^(j/2) normalised, 2^j taps.
    static std::vector<double> filter(int level) {
        if (level < 1 || level > 30) throw InputError("wavelet level must be in [1, 30]");
        const std::size_t len = std::size_t{1} << level;
        const double c = std::pow(2.0, -0.5 * level);
        std::vector<double> h(len, c);
        for (std::size_t m = len / 2; m < len; ++m) h[m] = -c;
        return h;
    }
};

// ---------------------------------------------------------------------------
// Decimated transform

/// Orthonormal Haar pyramid.  details[l - 1] holds the 2^(m - l) level-l
/// coefficients (l = 1 finest); `scaling` is the single coarsest smooth.
struct HaarPyramid {
    std::vector<std::vector<double>> details;
    double scaling = 0.0;

    int levels() const noexcept { return static_cast<int>(details.size()); }
    const std::vector<double>& level(int l) const { return details.at(static_cast<std::size_t>(l - 1)); }
};

inline HaarPyramid haar_dwt(std::span<const double> x) {
    const int m = dyadic_log2(x.size());
    HaarPyramid out;
    out.details.reserve(static_cast<std::size_t>(m));
    std::vector<double> smooth(x.begin(), x.end());
    const double r = 1.0 / std::sqrt(2.0);
    for (int l = 1; l <= m; ++l) {
        const std::size_t half = smooth.size() / 2;
        std::vector<double> d(half), s(half);
        for (std::size_t k = 0; k < half; ++k) {
            d[k] = (smooth[2 * k] - smooth[2 * k + 1]) * r;
            s[k] = (smooth[2 * k] + smooth[2 * k + 1]) * r;
        }
        out.details.push_back(std::move(d));
        smooth = std::move(s);
    }
    out.scaling = smooth.front();
    return out;
}

inline std::vector<double> haar_idwt(const HaarPyramid& p) {
    std::vector<double> smooth{p.scaling};
    const double r = 1.0 / std::sqrt(2.0);
    for (int l = p.levels(); l >= 1; --l) {
        const auto& d = p.level(l);
        if (d.size() != smooth.size()) throw InputError("inconsistent Haar pyramid");
        std::vector<double> next(2 * d.size());
        for (std::size_t k = 0; k < d.size(); ++k) {
            next[2 * k] = (smooth[k] + d[k]) * r;
            next[2 * k + 1] = (smooth[k] - d[k]) * r;
        }
        smooth = std::move(next);
    }
    return smooth;
}

// ---------------------------------------------------------------------------
// Non-decimated transform

/// J x T array of non-decimated coefficients; row j - 1 is level j.
struct NdwtCoeffs {
    Eigen::MatrixXd d;

    int levels() const noexcept { return static_cast<int>(d.rows()); }
    std::size_t length() const noexcept { return static_cast<std::size_t>(d.cols()); }
    double operator()(int level, std::size_t k) const { return d(level - 1, static_cast<Eigen::Index>(k)); }
};

/// Periodic non-decimated Haar transform at levels 1..max_level (default J).
inline NdwtCoeffs haar_ndwt(std::span<const double> x, int max_level = 0) {
    const int J = dyadic_log2(x.size());
    if (max_level <= 0) max_level = J;
    if (max_level > J) throw InputError("max_level exceeds log2(T)");
    const auto T = static_cast<std::ptrdiff_t>(x.size());
    // prefix[i] = x_0 + ... + x_{i-1} over three periods, so every window
    // [k - half, k + half) with 0 <= k < T is a contiguous slice.
    std::vector<double> prefix(3 * x.size() + 1, 0.0);
    for (std::ptrdiff_t i = 0; i < 3 * T; ++i) {
        prefix[static_cast<std::size_t>(i + 1)] = prefix[static_cast<std::size_t>(i)] + x[static_cast<std::size_t>(i % T)];
    }
    auto window = [&](std::ptrdiff_t a, std::ptrdiff_t b) {  // sum over [a, b), a >= -T
        return prefix[static_cast<std::size_t>(b + T)] - prefix[static_cast<std::size_t>(a + T)];
    };
    NdwtCoeffs out{Eigen::MatrixXd(max_level, T)};
    for (int j = 1; j <= max_level; ++j) {
        const std::ptrdiff_t half = std::ptrdiff_t{1} << (j - 1);
        const double c = std::pow(2.0, -0.5 * j);
        for (std::ptrdiff_t k = 0; k < T; ++k) {
            out.d(j - 1, k) = c * (window(k - half, k) - window(k, k + half));
        }
    }
    return out;
}

/// Raw wavelet periodogram I_{j,k} = d_{j,k}^2.
inline NdwtCoeffs haar_ndwt_periodogram(const TimeSeries& x, int max_level = 0) {
    auto c = haar_ndwt(x.values(), max_level);
    c.d = c.d.array().square().matrix();
    return c;
}

// ---------------------------------------------------------------------------
// Autocorrelation wavelets and the inner-product matrix

/// Psi_j(tau) for j = 1..max_level, stored for tau = 0..2^j - 1.
class AutocorrWavelet {
public:
    AutocorrWavelet() = default;
    explicit AutocorrWavelet(std::vector<std::vector<double>> psi) : psi_(std::move(psi)) {}

    int max_level() const noexcept { return static_cast<int>(psi_.size()); }

    /// Support bound L_j = 2^j - 1: Psi_j(tau) = 0 for |tau| > L_j.
    static long support(int level) noexcept { return (1L << level) - 1; }

    double operator()(int level, long tau) const {
        const auto& p = psi_.at(static_cast<std::size_t>(level - 1));
        const auto a = static_cast<std::size_t>(tau < 0 ? -tau : tau);
        return a < p.size() ? p[a] : 0.0;
    }

    const std::vector<double>& one_sided(int level) const { return psi_.at(static_cast<std::size_t>(level - 1)); }

    /// Column (Psi_1(tau), ..., Psi_n(tau)) for the first n levels.
    Eigen::VectorXd column(long tau, int n) const {
        Eigen::VectorXd v(n);
        for (int j = 1; j <= n; ++j) v(j - 1) = (*this)(j, tau);
        return v;
    }

private:
    std::vector<std::vector<double>> psi_;
};

/// Autocorrelation of each discrete wavelet vector, normalised so Psi_j(0) = 1.
template <class W = Haar>
AutocorrWavelet autocorr_wavelet(int max_level) {
    if (max_level < 1) throw InputError("max_level must be >= 1");
    std::vector<std::vector<double>> psi;
    psi.reserve(static_cast<std::size_t>(max_level));
    for (int j = 1; j <= max_level; ++j) {
        const auto h = W::filter(j);
        const std::size_t L = h.size();
        // Zero padding to >= 2L makes the circular autocorrelation linear.
        std::size_t n = 1;
        while (n < 2 * L) n <<= 1;
        std::vector<double> padded(n, 0.0);
        std::copy(h.begin(), h.end(), padded.begin());
        auto spec = fft::rfft(padded);
        for (auto& c : spec) c = std::norm(c);
        const auto ac = fft::irfft(spec, static_cast<int>(n));
        std::vector<double> row(L);
        for (std::size_t t = 0; t < L; ++t) row[t] = ac[t] / ac[0];
        row[0] = 1.0;
        psi.push_back(std::move(row));
    }
    return AutocorrWavelet(std::move(psi));
}

/// A_{jl} = sum_tau Psi_j(tau) Psi_l(tau) and its inverse.
struct AMatrix {
    Eigen::MatrixXd entries;
    Eigen::MatrixXd inverse;

    int levels() const noexcept { return static_cast<int>(entries.rows()); }
};

namespace detail {

template <class W>
AMatrix build_a_matrix(int max_level) {
    const auto psi = autocorr_wavelet<W>(max_level);
    Eigen::MatrixXd a(max_level, max_level);
    for (int j = 1; j <= max_level; ++j) {
        for (int l = j; l <= max_level; ++l) {
            const auto& pj = psi.one_sided(j);
            const auto& pl = psi.one_sided(l);
            const std::size_t n = std::min(pj.size(), pl.size());
            double s = pj[0] * pl[0];
            for (std::size_t t = 1; t < n; ++t) s += 2.0 * pj[t] * pl[t];
            a(j - 1, l - 1) = s;
            a(l - 1, j - 1) = s;
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) throw InternalError("A matrix is not positive definite");
    Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(max_level, max_level));
    return AMatrix{std::move(a), std::move(inv)};
}

/// Read-mostly memo keyed by an integer; safe for concurrent readers.
template <class Value>
class Memo {
public:
    template <class Build>
    std::shared_ptr<const Value> get(long key, Build&& build) {
        {
            std::shared_lock lock(mu_);
            auto it = map_.find(key);
            if (it != map_.end()) return it->second;
        }
        auto value = std::make_shared<const Value>(build());
        std::unique_lock lock(mu_);
        return map_.emplace(key, std::move(value)).first->second;
    }

private:
    std::shared_mutex mu_;
    std::map<long, std::shared_ptr<const Value>> map_;
};

}  // namespace detail

/// Memoised A matrix for levels 1..max_level.
template <class W = Haar>
std::shared_ptr<const AMatrix> a_matrix(int max_level) {
    if (max_level < 1) throw InputError("max_level must be >= 1");
    if (max_level > 20) throw InputError("A matrix is only supported up to 20 levels");
    static detail::Memo<AMatrix> memo;
    return memo.get(max_level, [&] { return detail::build_a_matrix<W>(max_level); });
}

// ---------------------------------------------------------------------------
// Circular filter bank (exact second-order quantities on a length-T circle)

/// Frequency responses of the level filters on the length-T circle, in the
/// alignment used by haar_ndwt, together with the circular analogue of A.
struct CircularFilterBank {
    int length = 0;
    int levels = 0;
    /// response[j - 1][k] = G_j(2 pi k / T), k = 0..T/2, with d_j = conj(G_j) X.
    std::vector<std::vector<fft::cplx>> response;
    /// power[j - 1][k] = |G_j|^2.
    std::vector<std::vector<double>> power;
    /// (1/T) sum over the full circle of |G_j|^2 |G_l|^2.
    Eigen::MatrixXd a_circular;

    /// Weight of half-spectrum bin k when summing over the full circle.
    double bin_weight(int k) const noexcept { return (k == 0 || 2 * k == length) ? 1.0 : 2.0; }
};

template <class W = Haar>
std::shared_ptr<const CircularFilterBank> circular_filter_bank(std::size_t T) {
    const int J = dyadic_log2(T);
    static detail::Memo<CircularFilterBank> memo;
    return memo.get(static_cast<long>(T), [&] {
        CircularFilterBank b;
        b.length = static_cast<int>(T);
        b.levels = J;
        const auto n = static_cast<std::ptrdiff_t>(T);
        for (int j = 1; j <= J; ++j) {
            const auto h = W::filter(j);
            const auto half = static_cast<std::ptrdiff_t>(h.size() / 2);
            std::vector<double> g(T, 0.0);
            for (std::size_t m = 0; m < h.size(); ++m) {
                const std::ptrdiff_t pos = ((static_cast<std::ptrdiff_t>(m) - half) % n + n) % n;
                g[static_cast<std::size_t>(pos)] += h[m];
            }
            auto resp = fft::rfft(g);
            std::vector<double> pw(resp.size());
            for (std::size_t k = 0; k < resp.size(); ++k) pw[k] = std::norm(resp[k]);
            b.response.push_back(std::move(resp));
            b.power.push_back(std::move(pw));
        }
        b.a_circular.resize(J, J);
        for (int j = 0; j < J; ++j) {
            for (int l = j; l < J; ++l) {
                double s = 0.0;
                for (std::size_t k = 0; k < b.power[0].size(); ++k) {
                    s += b.bin_weight(static_cast<int>(k)) * b.power[j][k] * b.power[l][k];
                }
                b.a_circular(j, l) = b.a_circular(l, j) = s / static_cast<double>(T);
            }
        }
        return b;
    });
}

}  // namespace lsw

#endif  // LSW_WAVELET_HPP
