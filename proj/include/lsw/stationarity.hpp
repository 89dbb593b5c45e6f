#ifndef LSW_STATIONARITY_HPP
#define LSW_STATIONARITY_HPP

// Tests of second-order stationarity.
//
// HWTOS: the corrected evolutionary wavelet spectrum of a stationary process
// is constant in time, so every Haar wavelet coefficient of each spectrum
// level (taken across time) has mean zero.  Each coefficient is studentised
// by its standard deviation under a fitted stationary null and referred to
// N(0, 1); the family of tests is controlled by Bonferroni or
// Benjamini-Hochberg.
//
// PSR: two-way ANOVA (time block x frequency) on log multitaper spectra of
// non-overlapping blocks, with the known variance trigamma(K) of a log
// K-taper estimate.  Rejects when the between-block effect is significant.

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "lsw/error.hpp"
#include "lsw/ews.hpp"
#include "lsw/fft.hpp"
#include "lsw/time_series.hpp"
#include "lsw/wavelet.hpp"

namespace lsw {

enum class TestMethod { hwtos_bonferroni, hwtos_fdr, psr };
enum class Control { bonferroni, fdr };

inline const char* to_string(TestMethod m) {
    switch (m) {
        case TestMethod::hwtos_bonferroni: return "hwtos-bonferroni";
        case TestMethod::hwtos_fdr: return "hwtos-fdr";
        case TestMethod::psr: return "psr";
    }
    return "?";
}

inline TestMethod parse_method(std::string_view s) {
    if (s == "hwtos-bonferroni" || s == "hwtos-bon" || s == "bonferroni") return TestMethod::hwtos_bonferroni;
    if (s == "hwtos-fdr" || s == "fdr") return TestMethod::hwtos_fdr;
    if (s == "psr") return TestMethod::psr;
    throw InputError("unknown test method '" + std::string(s) + "'");
}

inline Control parse_control(std::string_view s) {
    if (s == "bonferroni" || s == "bon") return Control::bonferroni;
    if (s == "fdr") return Control::fdr;
    throw InputError("unknown multiple-comparison control '" + std::string(s) + "'");
}

/// Two-sided p-value of a standard normal statistic.
inline double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

/// Upper tail of chi-squared with `df` degrees of freedom.
inline double chi_squared_sf(double x, double df) {
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

// ---------------------------------------------------------------------------
// Multiple comparisons

/// Indices rejected by Benjamini-Hochberg step-up at level gamma: reject all
/// i with rank <= max{r : p_(r) <= r gamma / m}.  Equal p-values are ranked
/// by index.  Returned in increasing index order.
inline std::vector<std::size_t> fdr_threshold(std::span<const double> pvalues, double gamma) {
    const std::size_t m = pvalues.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
    std::size_t cutoff = 0;
    for (std::size_t r = 1; r <= m; ++r) {
        if (pvalues[order[r - 1]] <= static_cast<double>(r) * gamma / static_cast<double>(m)) cutoff = r;
    }
    std::vector<std::size_t> out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cutoff));
    std::sort(out.begin(), out.end());
    return out;
}

/// Indices with p <= gamma / m.
inline std::vector<std::size_t> bonferroni_threshold(std::span<const double> pvalues, double gamma) {
    std::vector<std::size_t> out;
    const double cut = gamma / static_cast<double>(pvalues.size());
    for (std::size_t i = 0; i < pvalues.size(); ++i) {
        if (pvalues[i] <= cut) out.push_back(i);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports

/// One tested Haar coefficient: spectrum level j, Haar level l (l = 1 finest
/// of the time-direction pyramid), location k within that level.
struct HaarCoefficientTest {
    int spectral_level = 0;
    int haar_level = 0;
    std::size_t location = 0;
    double statistic = 0.0;
    double p_value = 1.0;

    friend bool operator==(const HaarCoefficientTest&, const HaarCoefficientTest&) = default;
};

struct PsrDetail {
    int blocks = 0;
    int block_length = 0;
    int frequencies = 0;
    int tapers = 0;
    double time_statistic = 0.0;
    double time_df = 0.0;
    double interaction_statistic = 0.0;
    double interaction_df = 0.0;
    double interaction_p = 1.0;
};

struct TosReport {
    TestMethod method = TestMethod::psr;
    double nominal_size = 0.05;
    bool reject = false;
    int n_tests = 0;
    std::vector<HaarCoefficientTest> significant;
    double overall_p = 1.0;
    std::optional<PsrDetail> psr;
};

/// Number of surviving Haar coefficients in an HWTOS report.
inline std::size_t count_significant(const TosReport& report) {
    if (report.method == TestMethod::psr) throw InputError("count_significant applies to HWTOS reports only");
    return report.significant.size();
}

// ---------------------------------------------------------------------------
// HWTOS

enum class SpectralLevelRule {
    coarsest_retained,  ///< the n coarsest of the retained levels
    finest,             ///< levels 1..n
};

struct HwtosOptions {
    /// Running-mean halfwidth applied to the periodogram before the Haar
    /// transform; negative selects default_smoothing_halfwidth(T).  The
    /// periodogram is tested unsmoothed by default: smoothing across time
    /// correlates neighbouring Haar coefficients and blunts local changes.
    int smoothing_halfwidth = 0;
    /// Levels kept for the A^{-1} correction; 0 selects retained_levels(T).
    int retained = 0;
    /// Number of spectrum levels tested and how they are picked.
    int spectral_levels = 6;
    SpectralLevelRule level_rule = SpectralLevelRule::finest;
    /// Haar levels (across time) with at most this many coefficients are tested.
    int max_haar_coefficients = 16;
    /// Multiplier on the null variance of every coefficient; fitted once
    /// against the Bonferroni size on iid Gaussian noise at T = 512, then
    /// frozen.  It absorbs the excess kurtosis the Gaussian covariance misses.
    double variance_inflation = 1.8;
    /// Test A^{-1}-corrected spectrum levels (true) or the periodogram levels
    /// themselves (false).  A Haar coefficient of a constant-mean row is zero
    /// either way; the correction only mixes levels and inflates the noise.
    bool bias_correct = false;

    friend bool operator==(const HwtosOptions&, const HwtosOptions&) = default;
};

/// Variance of each tested Haar coefficient under the stationary null,
/// indexed by (spectral level, Haar level).  Under circular stationarity it
/// does not depend on the location.
struct NullVariance {
    std::map<std::pair<int, int>, double> by_level;

    double at(int spectral_level, int haar_level) const { return by_level.at({spectral_level, haar_level}); }
};

struct HwtosAnalysis {
    std::vector<HaarCoefficientTest> coefficients;
    std::vector<int> spectral_levels;
    std::vector<int> haar_levels;
    int smoothing_halfwidth = 0;
    int retained = 0;
};

struct HwtosLayout {
    bool bias_correct = true;
    int smoothing_halfwidth = 0;
    int retained = 0;
    std::vector<int> spectral_levels;
    std::vector<int> haar_levels;
};

inline HwtosLayout hwtos_layout(std::size_t T, const HwtosOptions& opt) {
    const int J = dyadic_log2(T);
    if (T < 64) throw InputError("HWTOS needs at least 64 observations");
    HwtosLayout lay;
    lay.bias_correct = opt.bias_correct;
    lay.smoothing_halfwidth = opt.smoothing_halfwidth >= 0 ? opt.smoothing_halfwidth : default_smoothing_halfwidth(T);
    lay.retained = opt.retained > 0 ? std::min(opt.retained, J) : retained_levels(T);
    const int n = std::min(opt.spectral_levels, lay.retained);
    if (n < 1) throw InputError("at least one spectrum level must be tested");
    const int first = opt.level_rule == SpectralLevelRule::coarsest_retained ? lay.retained - n + 1 : 1;
    for (int j = first; j < first + n; ++j) lay.spectral_levels.push_back(j);
    for (int l = 1; l <= J; ++l) {
        if ((std::size_t{1} << (J - l)) <= static_cast<std::size_t>(opt.max_haar_coefficients)) lay.haar_levels.push_back(l);
    }
    if (lay.haar_levels.empty()) throw InputError("series too short for one full coarse Haar coefficient");
    return lay;
}

/// Number of simultaneous tests HWTOS performs on a length-T series.
inline int hwtos_test_count(std::size_t T, const HwtosOptions& opt = {}) {
    const auto lay = hwtos_layout(T, opt);
    const int J = dyadic_log2(T);
    int per_level = 0;
    for (int l : lay.haar_levels) per_level += 1 << (J - l);
    return per_level * static_cast<int>(lay.spectral_levels.size());
}

namespace detail {

/// Circular autocorrelation of (box kernel * Haar vector) for each Haar level;
/// memoised by (T, s).
inline std::shared_ptr<const std::map<int, std::vector<double>>> haar_window_autocorr(std::size_t T, int s) {
    static std::mutex mu;
    static std::map<std::pair<std::size_t, int>, std::shared_ptr<const std::map<int, std::vector<double>>>> cache;
    {
        std::lock_guard lock(mu);
        auto it = cache.find({T, s});
        if (it != cache.end()) return it->second;
    }
    const int J = dyadic_log2(T);
    const auto n = static_cast<std::ptrdiff_t>(T);
    std::vector<double> box(T, 0.0);
    for (std::ptrdiff_t m = -s; m <= s; ++m) box[static_cast<std::size_t>((m + n) % n)] += 1.0 / (2.0 * s + 1.0);
    const auto box_f = fft::rfft(box);
    auto result = std::make_shared<std::map<int, std::vector<double>>>();
    for (int l = 1; l <= J; ++l) {
        const std::size_t len = std::size_t{1} << l;
        const double c = 1.0 / std::sqrt(static_cast<double>(len));
        std::vector<double> g(T, 0.0);
        for (std::size_t t = 0; t < len; ++t) g[t] = t < len / 2 ? c : -c;
        auto gf = fft::rfft(g);
        for (std::size_t k = 0; k < gf.size(); ++k) gf[k] = std::norm(gf[k] * box_f[k]);
        (*result)[l] = fft::irfft(gf, static_cast<int>(T));
    }
    std::lock_guard lock(mu);
    return cache.emplace(std::pair{T, s}, std::move(result)).first->second;
}

}  // namespace detail

/// Stationary spectral density (on the half-spectrum grid) of the Haar LSW
/// process whose constant spectrum matches the time-averaged raw periodogram.
/// Negative spectrum levels from the fit are clipped to zero.
inline std::vector<double> stationary_null_density(const Ews& raw) {
    const auto bank = circular_filter_bank(raw.length());
    const int J = bank->levels;
    if (raw.levels() != J) throw InputError("null density needs the raw periodogram at all levels");
    Eigen::VectorXd mean_per = raw.values.rowwise().mean();
    Eigen::VectorXd s = bank->a_circular.ldlt().solve(mean_per);
    s = s.cwiseMax(0.0);
    std::vector<double> f(bank->power[0].size(), 0.0);
    for (std::size_t k = 0; k < f.size(); ++k) {
        double v = 0.0;
        for (int j = 0; j < J; ++j) v += s(j) * bank->power[static_cast<std::size_t>(j)][k];
        f[k] = v;
    }
    return f;
}

/// Null variances of the tested coefficients for a periodogram whose
/// underlying process has spectral density `density` (half-spectrum grid).
///
/// Each Haar coefficient is h = sum_l a_l sum_t w(t) I_l(t), with a the row of
/// A^{-1} and w the smoothing-filtered Haar vector.  For Gaussian d,
/// Cov(I_l(t), I_m(t')) = 2 Cov(d_l(t), d_m(t'))^2, giving
///     Var h = 2 sum_{l,m} a_l a_m sum_u gamma_lm(u)^2 R_w(u).
inline NullVariance hwtos_null_variance(std::span<const double> density, std::size_t T, const HwtosLayout& lay,
                                        double inflation = 1.0) {
    const auto bank = circular_filter_bank(T);
    const Eigen::MatrixXd a_inv = lay.bias_correct ? a_matrix(lay.retained)->inverse
                                                   : Eigen::MatrixXd::Identity(lay.retained, lay.retained);
    const int R = lay.retained;
    const auto n = static_cast<int>(T);
    const std::size_t nf = bank->power[0].size();

    // gamma_lm(u) = Cov(d_l(t), d_m(t + u)) for l <= m.
    std::vector<std::vector<double>> gamma(static_cast<std::size_t>(R * R));
    std::vector<fft::cplx> spec(nf);
    for (int l = 0; l < R; ++l) {
        for (int m = l; m < R; ++m) {
            for (std::size_t k = 0; k < nf; ++k) {
                spec[k] = density[k] * bank->response[static_cast<std::size_t>(l)][k] *
                          std::conj(bank->response[static_cast<std::size_t>(m)][k]);
            }
            gamma[static_cast<std::size_t>(l * R + m)] = fft::irfft(spec, n);
        }
    }

    const auto windows = detail::haar_window_autocorr(T, lay.smoothing_halfwidth);
    NullVariance out;
    std::vector<double> q(T);
    for (int j : lay.spectral_levels) {
        std::fill(q.begin(), q.end(), 0.0);
        for (int l = 0; l < R; ++l) {
            const double al = a_inv(j - 1, l);
            const auto& gll = gamma[static_cast<std::size_t>(l * R + l)];
            for (std::size_t u = 0; u < T; ++u) q[u] += al * al * gll[u] * gll[u];
            for (int m = l + 1; m < R; ++m) {
                const double w = al * a_inv(j - 1, m);
                const auto& glm = gamma[static_cast<std::size_t>(l * R + m)];
                for (std::size_t u = 0; u < T; ++u) {
                    const double g_neg = glm[(T - u) % T];
                    q[u] += w * (glm[u] * glm[u] + g_neg * g_neg);
                }
            }
        }
        for (int hl : lay.haar_levels) {
            const auto& rw = windows->at(hl);
            double v = 0.0;
            for (std::size_t u = 0; u < T; ++u) v += q[u] * rw[u];
            out.by_level[{j, hl}] = 2.0 * inflation * v;
        }
    }
    return out;
}

/// Studentised Haar coefficients of the given spectrum levels across time.
inline std::vector<HaarCoefficientTest> haar_coefficient_tests(const Ews& spectrum, const HwtosLayout& lay,
                                                               const NullVariance& var) {
    std::vector<HaarCoefficientTest> out;
    for (int j : lay.spectral_levels) {
        const Eigen::VectorXd row = spectrum.values.row(j - 1).transpose();
        const auto pyramid = haar_dwt(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
        for (int hl : lay.haar_levels) {
            const double v = var.at(j, hl);
            const double sd = std::sqrt(std::max(v, 0.0));
            const auto& d = pyramid.level(hl);
            for (std::size_t k = 0; k < d.size(); ++k) {
                double z = 0.0;
                if (sd > 0.0) {
                    z = d[k] / sd;
                } else if (d[k] != 0.0) {
                    z = std::copysign(std::numeric_limits<double>::infinity(), d[k]);
                }
                out.push_back({j, hl, k, z, normal_two_sided_p(z)});
            }
        }
    }
    return out;
}

inline HwtosAnalysis hwtos_analyze(const TimeSeries& x, const HwtosOptions& opt = {}) {
    const auto lay = hwtos_layout(x.size(), opt);
    const Ews raw = raw_periodogram(x);
    const Ews smoothed = smooth_periodogram(raw, lay.smoothing_halfwidth);
    Ews corrected = smoothed;
    if (lay.bias_correct) {
        corrected = correct_spectrum(smoothed, lay.retained);
    } else {
        corrected.values = smoothed.values.topRows(lay.retained).eval();
    }
    const auto var = hwtos_null_variance(stationary_null_density(raw), x.size(), lay, opt.variance_inflation);
    HwtosAnalysis a;
    a.coefficients = haar_coefficient_tests(corrected, lay, var);
    a.spectral_levels = lay.spectral_levels;
    a.haar_levels = lay.haar_levels;
    a.smoothing_halfwidth = lay.smoothing_halfwidth;
    a.retained = lay.retained;
    return a;
}

/// Apply the multiple-comparison control to an analysis.
inline TosReport hwtos_decide(const HwtosAnalysis& a, double gamma, Control control) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw InputError("nominal size must lie in [0, 1)");
    std::vector<double> p;
    p.reserve(a.coefficients.size());
    for (const auto& c : a.coefficients) p.push_back(c.p_value);
    const auto m = static_cast<double>(p.size());
    TosReport r;
    r.method = control == Control::bonferroni ? TestMethod::hwtos_bonferroni : TestMethod::hwtos_fdr;
    r.nominal_size = gamma;
    r.n_tests = static_cast<int>(p.size());
    const auto keep = control == Control::bonferroni ? bonferroni_threshold(p, gamma) : fdr_threshold(p, gamma);
    for (std::size_t i : keep) r.significant.push_back(a.coefficients[i]);
    r.reject = !r.significant.empty();
    if (control == Control::bonferroni) {
        const double pmin = p.empty() ? 1.0 : *std::min_element(p.begin(), p.end());
        r.overall_p = std::min(1.0, m * pmin);
    } else {
        // smallest BH-adjusted p-value: min_r m p_(r) / r
        std::vector<double> sorted = p;
        std::sort(sorted.begin(), sorted.end());
        double best = 1.0;
        for (std::size_t i = 0; i < sorted.size(); ++i) best = std::min(best, m * sorted[i] / static_cast<double>(i + 1));
        r.overall_p = best;
    }
    return r;
}

inline TosReport hwtos(const TimeSeries& x, double gamma, Control control, const HwtosOptions& opt = {}) {
    return hwtos_decide(hwtos_analyze(x, opt), gamma, control);
}

// ---------------------------------------------------------------------------
// Priestley-Subba Rao

struct PsrOptions {
    /// Number of non-overlapping blocks; 0 selects floor(sqrt(T) / 2), i.e.
    /// blocks of about 2 sqrt(T) observations.
    int blocks = 0;
    /// Sine tapers per block.
    int tapers = 5;
    /// First Fourier index (of the block length) used, and index spacing.
    /// Zero selects ceil((K + 1) / 2) and K + 2 respectively, so the chosen
    /// frequencies are one multitaper bandwidth plus a guard bin apart.
    int first_frequency = 0;
    int frequency_spacing = 0;
    /// Floor applied before taking logarithms.
    double log_floor = 1e-10;

    friend bool operator==(const PsrOptions&, const PsrOptions&) = default;
};

struct PsrLayout {
    int blocks = 0;
    int block_length = 0;
    std::vector<int> frequencies;
};

inline PsrLayout psr_layout(std::size_t T, const PsrOptions& opt) {
    if (T < 128) throw InputError("PSR needs at least 128 observations");
    if (opt.tapers < 1) throw InputError("PSR needs at least one taper");
    PsrLayout lay;
    lay.blocks = opt.blocks > 0 ? opt.blocks : static_cast<int>(std::floor(std::sqrt(static_cast<double>(T)) / 2.0));
    if (lay.blocks < 2) throw InputError("PSR needs at least two time blocks");
    lay.block_length = static_cast<int>(T) / lay.blocks;
    const int K = opt.tapers;
    const int first = opt.first_frequency > 0 ? opt.first_frequency : (K + 2) / 2;
    const int step = opt.frequency_spacing > 0 ? opt.frequency_spacing : K + 2;
    const int nyquist = lay.block_length / 2;
    for (int m = first; m + (K + 1) / 2 <= nyquist; m += step) lay.frequencies.push_back(m);
    if (lay.frequencies.size() < 2) throw InputError("PSR blocks too short for two frequencies");
    return lay;
}

inline TosReport psr(const TimeSeries& x, double gamma, const PsrOptions& opt = {}) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw InputError("nominal size must lie in [0, 1)");
    const auto lay = psr_layout(x.size(), opt);
    const int B = lay.blocks;
    const int L = lay.block_length;
    const int K = opt.tapers;
    const auto F = static_cast<int>(lay.frequencies.size());

    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    std::vector<std::vector<double>> tapers(static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(L)));
    for (int k = 1; k <= K; ++k) {
        for (int t = 1; t <= L; ++t) {
            tapers[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(t - 1)] =
                std::sqrt(2.0 / (L + 1)) * std::sin(std::numbers::pi * k * t / (L + 1));
        }
    }

    Eigen::MatrixXd y(B, F);
    std::vector<double> seg(static_cast<std::size_t>(L));
    for (int b = 0; b < B; ++b) {
        std::vector<double> sdf(static_cast<std::size_t>(L / 2 + 1), 0.0);
        for (int k = 0; k < K; ++k) {
            for (int t = 0; t < L; ++t) {
                seg[static_cast<std::size_t>(t)] =
                    tapers[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)] * (x[static_cast<std::size_t>(b * L + t)] - mean);
            }
            const auto X = fft::rfft(seg);
            for (std::size_t f = 0; f < sdf.size(); ++f) sdf[f] += std::norm(X[f]) / K;
        }
        for (int f = 0; f < F; ++f) {
            y(b, f) = std::log(std::max(sdf[static_cast<std::size_t>(lay.frequencies[static_cast<std::size_t>(f)])], opt.log_floor));
        }
    }

    const double sigma2 = boost::math::trigamma(static_cast<double>(K));
    const Eigen::VectorXd row_mean = y.rowwise().mean();
    const Eigen::RowVectorXd col_mean = y.colwise().mean();
    const double grand = y.mean();
    const double ss_time = F * (row_mean.array() - grand).square().sum() / sigma2;
    double ss_inter = 0.0;
    for (int b = 0; b < B; ++b) {
        for (int f = 0; f < F; ++f) {
            const double r = y(b, f) - row_mean(b) - col_mean(f) + grand;
            ss_inter += r * r;
        }
    }
    ss_inter /= sigma2;

    PsrDetail d;
    d.blocks = B;
    d.block_length = L;
    d.frequencies = F;
    d.tapers = K;
    d.time_statistic = ss_time;
    d.time_df = B - 1;
    d.interaction_statistic = ss_inter;
    d.interaction_df = static_cast<double>((B - 1) * (F - 1));
    d.interaction_p = chi_squared_sf(ss_inter, d.interaction_df);

    TosReport r;
    r.method = TestMethod::psr;
    r.nominal_size = gamma;
    r.n_tests = 1;
    r.overall_p = chi_squared_sf(ss_time, d.time_df);
    r.reject = r.overall_p < gamma;
    r.psr = d;
    return r;
}

}  // namespace lsw

#endif  // LSW_STATIONARITY_HPP
