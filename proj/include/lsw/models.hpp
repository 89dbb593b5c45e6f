#ifndef LSW_MODELS_HPP
#define LSW_MODELS_HPP

// Generating processes: stationary ARMA (with Gaussian, double-exponential or
// Student-t innovations), time-varying AR(1)/MA(1), and Haar LSW processes
// synthesised from a prescribed evolutionary wavelet spectrum.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "lsw/error.hpp"
#include "lsw/rng.hpp"
#include "lsw/time_series.hpp"
#include "lsw/wavelet.hpp"

namespace lsw {

// ---------------------------------------------------------------------------
// Innovations

struct InnovationDist {
    enum class Kind { gaussian, double_exponential, student_t };

    Kind kind = Kind::gaussian;
    int df = 0;  // only for student_t

    static InnovationDist gaussian() { return {}; }
    static InnovationDist double_exponential() { return {Kind::double_exponential, 0}; }
    static InnovationDist student_t(int df) {
        if (df < 1) throw InputError("Student-t degrees of freedom must be a positive integer");
        return {Kind::student_t, df};
    }

    double draw(RandomStream& rng) const {
        switch (kind) {
            case Kind::gaussian: return rng.normal();
            case Kind::double_exponential: return rng.laplace();
            case Kind::student_t: return rng.student_t(df);
        }
        return 0.0;
    }

    /// Population variance (infinite for t with df <= 2).
    double variance() const {
        switch (kind) {
            case Kind::gaussian: return 1.0;
            case Kind::double_exponential: return 2.0;
            case Kind::student_t: return df > 2 ? static_cast<double>(df) / (df - 2) : INFINITY;
        }
        return 0.0;
    }

    std::string describe() const {
        switch (kind) {
            case Kind::gaussian: return "gaussian";
            case Kind::double_exponential: return "double-exponential";
            case Kind::student_t: return "student-t(" + std::to_string(df) + ")";
        }
        return {};
    }

    friend bool operator==(const InnovationDist&, const InnovationDist&) = default;
};

// ---------------------------------------------------------------------------
// Model specifications

/// ARMA(p, q): X_t = sum_i ar_i X_{t-i} + e_t + sum_i ma_i e_{t-i}.
class Arma {
public:
    Arma(std::vector<double> ar, std::vector<double> ma, InnovationDist innovations = {})
        : ar_(std::move(ar)), ma_(std::move(ma)), innovations_(innovations) {
        for (const auto& r : characteristic_roots()) {
            if (std::abs(r) >= 1.0) {
                throw ConstructionError("AR polynomial is not stationary: root of modulus " +
                                        std::to_string(std::abs(r)));
            }
        }
    }

    const std::vector<double>& ar() const noexcept { return ar_; }
    const std::vector<double>& ma() const noexcept { return ma_; }
    const InnovationDist& innovations() const noexcept { return innovations_; }

    /// Roots of the auxiliary equation m^p - ar_1 m^(p-1) - ... - ar_p = 0
    /// (eigenvalues of the companion matrix); stationary iff all |root| < 1.
    std::vector<std::complex<double>> characteristic_roots() const {
        const auto p = static_cast<Eigen::Index>(ar_.size());
        if (p == 0) return {};
        Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
        for (Eigen::Index i = 0; i < p; ++i) companion(0, i) = ar_[static_cast<std::size_t>(i)];
        for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
        Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
        std::vector<std::complex<double>> roots;
        for (Eigen::Index i = 0; i < p; ++i) roots.push_back(es.eigenvalues()(i));
        return roots;
    }

    /// Discarded warm-up samples.
    std::size_t burn_in() const noexcept { return 10 * (ar_.size() + ma_.size() + 1); }

private:
    std::vector<double> ar_;
    std::vector<double> ma_;
    InnovationDist innovations_;
};

/// Parameter interpolated linearly over t = 1..T: start + (end - start)(t-1)/(T-1).
inline double linear_profile(double start, double end, std::size_t t, std::size_t T) {
    if (T < 2) return start;
    return start + (end - start) * static_cast<double>(t - 1) / static_cast<double>(T - 1);
}

/// X_t = a_t X_{t-1} + e_t with a_t linear from alpha_start to alpha_end.
struct Tvar1 {
    double alpha_start = 0.0;
    double alpha_end = 0.0;
    InnovationDist innovations;
    static constexpr std::size_t pre_roll = 100;

    double alpha(std::size_t t, std::size_t T) const { return linear_profile(alpha_start, alpha_end, t, T); }
};

/// X_t = Z_t + b_t Z_{t-1} with b_t linear from beta_start to beta_end.
struct Tvma1 {
    double beta_start = 0.0;
    double beta_end = 0.0;
    InnovationDist innovations;

    double beta(std::size_t t, std::size_t T) const { return linear_profile(beta_start, beta_end, t, T); }
};

/// Evolutionary wavelet spectrum S_j(z), zero above max_level.
class SpectrumFn {
public:
    using Fn = std::function<double(int level, double z)>;

    SpectrumFn() = default;
    SpectrumFn(int max_level, Fn fn, std::string name = "custom")
        : max_level_(max_level), fn_(std::move(fn)), name_(std::move(name)) {}

    int max_level() const noexcept { return max_level_; }
    const std::string& name() const noexcept { return name_; }

    double operator()(int level, double z) const {
        if (level < 1 || level > max_level_ || !fn_) return 0.0;
        return fn_(level, z);
    }

    static SpectrumFn zero() { return SpectrumFn(0, nullptr, "zero"); }

    /// S_j(z) = values[j - 1] for all z.
    static SpectrumFn constant(std::vector<double> values) {
        const int n = static_cast<int>(values.size());
        return SpectrumFn(n, [v = std::move(values)](int j, double) { return v[static_cast<std::size_t>(j - 1)]; },
                          "constant");
    }

private:
    int max_level_ = 0;
    Fn fn_;
    std::string name_;
};

struct LswModel {
    SpectrumFn spectrum;
};

using ModelSpec = std::variant<Arma, Tvar1, Tvma1, LswModel>;

inline std::string describe(const ModelSpec& spec) {
    struct V {
        std::string operator()(const Arma& m) const {
            auto list = [](const std::vector<double>& v) {
                std::string s = "[";
                for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
                return s + "]";
            };
            return "arma(ar=" + list(m.ar()) + ", ma=" + list(m.ma()) + ", " + m.innovations().describe() + ")";
        }
        std::string operator()(const Tvar1& m) const {
            return "tvar1(" + std::to_string(m.alpha_start) + " -> " + std::to_string(m.alpha_end) + ")";
        }
        std::string operator()(const Tvma1& m) const {
            return "tvma1(" + std::to_string(m.beta_start) + " -> " + std::to_string(m.beta_end) + ")";
        }
        std::string operator()(const LswModel& m) const { return "lsw-haar(" + m.spectrum.name() + ")"; }
    };
    return std::visit(V{}, spec);
}

// ---------------------------------------------------------------------------
// Simulation

inline void require_dyadic_length(std::size_t T) {
    if (!is_dyadic(T)) throw InputError("series length " + std::to_string(T) + " is not a power of two");
}

/// Haar LSW realisation X_t = sum_j sum_k sqrt(S_j(k/T)) psi_{j,k}(t) xi_{j,k}
/// with periodic wavelets and iid N(0,1) xi.
inline TimeSeries synthesize_lsw(const SpectrumFn& spectrum, std::size_t T, Seed seed) {
    const int J = dyadic_log2(T);
    const int top = std::min(spectrum.max_level(), J);
    RandomStream rng(seed);
    const auto n = static_cast<std::ptrdiff_t>(T);
    std::vector<double> x(T, 0.0);
    std::vector<double> amp(T);
    std::vector<double> prefix(3 * T + 1);
    for (int j = 1; j <= top; ++j) {
        bool any = false;
        for (std::size_t k = 0; k < T; ++k) {
            const double s = spectrum(j, static_cast<double>(k) / static_cast<double>(T));
            if (!(s >= 0.0)) throw InputError("spectrum must be non-negative (level " + std::to_string(j) + ")");
            amp[k] = std::sqrt(s) * rng.normal();
            any = any || s > 0.0;
        }
        if (!any) continue;
        prefix[0] = 0.0;
        for (std::ptrdiff_t i = 0; i < 3 * n; ++i) {
            prefix[static_cast<std::size_t>(i + 1)] = prefix[static_cast<std::size_t>(i)] + amp[static_cast<std::size_t>(i % n)];
        }
        // sum of amp over the inclusive circular range [a, b], a >= -T
        auto range = [&](std::ptrdiff_t a, std::ptrdiff_t b) {
            return prefix[static_cast<std::size_t>(b + n + 1)] - prefix[static_cast<std::size_t>(a + n)];
        };
        const std::ptrdiff_t half = std::ptrdiff_t{1} << (j - 1);
        const double c = std::pow(2.0, -0.5 * j);
        for (std::ptrdiff_t t = 0; t < n; ++t) {
            x[static_cast<std::size_t>(t)] += c * (range(t + 1, t + half) - range(t - half + 1, t));
        }
    }
    return TimeSeries(std::move(x));
}

namespace detail {

inline TimeSeries simulate_arma(const Arma& m, std::size_t T, RandomStream& rng) {
    const std::size_t burn = m.burn_in();
    const std::size_t n = T + burn;
    const auto& ar = m.ar();
    const auto& ma = m.ma();
    std::vector<double> e(n), x(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) e[t] = m.innovations().draw(rng);
    for (std::size_t t = 0; t < n; ++t) {
        double v = e[t];
        for (std::size_t i = 0; i < ar.size() && i < t; ++i) v += ar[i] * x[t - 1 - i];
        for (std::size_t i = 0; i < ma.size() && i < t; ++i) v += ma[i] * e[t - 1 - i];
        x[t] = v;
    }
    return TimeSeries(std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(burn), x.end()));
}

inline TimeSeries simulate_tvar1(const Tvar1& m, std::size_t T, RandomStream& rng) {
    double x = 0.0;
    for (std::size_t i = 0; i < Tvar1::pre_roll; ++i) x = m.alpha_start * x + m.innovations.draw(rng);
    std::vector<double> out(T);
    for (std::size_t t = 1; t <= T; ++t) {
        x = m.alpha(t, T) * x + m.innovations.draw(rng);
        out[t - 1] = x;
    }
    return TimeSeries(std::move(out));
}

inline TimeSeries simulate_tvma1(const Tvma1& m, std::size_t T, RandomStream& rng) {
    double prev = m.innovations.draw(rng);  // Z_0
    std::vector<double> out(T);
    for (std::size_t t = 1; t <= T; ++t) {
        const double z = m.innovations.draw(rng);
        out[t - 1] = z + m.beta(t, T) * prev;
        prev = z;
    }
    return TimeSeries(std::move(out));
}

}  // namespace detail

/// One length-T realisation of `spec`; a pure function of (spec, T, seed).
inline TimeSeries simulate(const ModelSpec& spec, std::size_t T, Seed seed) {
    require_dyadic_length(T);
    RandomStream rng(seed);
    struct V {
        std::size_t T;
        RandomStream& rng;
        Seed seed;
        TimeSeries operator()(const Arma& m) const { return detail::simulate_arma(m, T, rng); }
        TimeSeries operator()(const Tvar1& m) const { return detail::simulate_tvar1(m, T, rng); }
        TimeSeries operator()(const Tvma1& m) const { return detail::simulate_tvma1(m, T, rng); }
        TimeSeries operator()(const LswModel& m) const { return synthesize_lsw(m.spectrum, T, seed); }
    };
    return std::visit(V{T, rng, seed}, spec);
}

// ---------------------------------------------------------------------------
// Presets

namespace spectra {

/// 1/4 - (z - 1/2)^2 on (0, 1).
inline double quadratic_bump(double z) { return 0.25 - (z - 0.5) * (z - 0.5); }
/// exp(-4 (z - 1/2)^2).
inline double gaussian_bump(double z) { return std::exp(-4.0 * (z - 0.5) * (z - 0.5)); }
/// z + shift wrapped into [0, 1).
inline double wrap(double z) { return z - std::floor(z); }

inline SpectrumFn p2() {
    return SpectrumFn(1, [](int, double z) { return quadratic_bump(z); }, "P2");
}

inline SpectrumFn p3() {
    return SpectrumFn(2, [](int j, double z) { return j == 1 ? quadratic_bump(z) : quadratic_bump(wrap(z + 0.5)); },
                      "P3");
}

inline SpectrumFn p4() {
    return SpectrumFn(4,
                      [](int j, double z) {
                          switch (j) {
                              case 1: return gaussian_bump(z);
                              case 3: return gaussian_bump(wrap(z - 0.25));
                              case 4: return gaussian_bump(wrap(z + 0.25));
                              default: return 0.0;
                          }
                      },
                      "P4");
}

}  // namespace spectra

/// Names accepted by preset(), in table order.
inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const char* family : {"S", "SHD", "SHT"}) {
            for (int i = 1; i <= 7; ++i) v.push_back(family + std::to_string(i));
        }
        for (int i = 1; i <= 4; ++i) v.push_back("P" + std::to_string(i));
        for (int i = 1; i <= 4; ++i) v.push_back("AC" + std::to_string(i));
        return v;
    }();
    return names;
}

/// True for the S/SHD/SHT families (and the stationary AC1/AC2).
inline bool is_stationary_preset(std::string_view name) {
    return name.starts_with("S") || name == "AC1" || name == "AC2";
}

/// Stationary preset S1..S7 with the given innovations.
inline ModelSpec stationary_model(int index, InnovationDist innov) {
    switch (index) {
        case 1: return Arma({}, {}, innov);
        case 2: return Arma({0.9}, {}, innov);
        case 3: return Arma({-0.9}, {}, innov);
        case 4: return Arma({}, {0.8}, innov);
        case 5: return Arma({}, {-0.8}, innov);
        case 6: return Arma({-0.4}, {-0.8, 0.4}, innov);
        case 7: return Arma({1.385929, -0.9604}, {}, innov);
        default: throw InputError("stationary model index must be 1..7");
    }
}

/// Model by its table name: S1-S7, SHD1-SHD7, SHT1-SHT7, P1-P4, AC1-AC4.
inline ModelSpec preset(std::string_view name) {
    auto index_after = [&](std::size_t prefix_len) -> int {
        const auto rest = name.substr(prefix_len);
        if (rest.size() != 1 || rest[0] < '1' || rest[0] > '9') return -1;
        return rest[0] - '0';
    };
    auto unknown = [&]() { return InputError("unknown model preset '" + std::string(name) + "'"); };

    if (name.starts_with("SHD") || name.starts_with("SHT")) {
        const int i = index_after(3);
        if (i < 1 || i > 7) throw unknown();
        return stationary_model(i, name[2] == 'D' ? InnovationDist::double_exponential()
                                                  : InnovationDist::student_t(4));
    }
    if (name.starts_with("AC")) {
        switch (index_after(2)) {
            case 1: return Arma({}, {});
            case 2: return Arma({0.8}, {});
            case 3: return Tvar1{0.9, -0.9, {}};
            case 4: return Tvma1{1.0, -1.0, {}};
            default: throw unknown();
        }
    }
    if (name.starts_with("S")) {
        const int i = index_after(1);
        if (i < 1 || i > 7) throw unknown();
        return stationary_model(i, InnovationDist::gaussian());
    }
    if (name.starts_with("P")) {
        switch (index_after(1)) {
            case 1: return Tvar1{0.9, -0.9, {}};
            case 2: return LswModel{spectra::p2()};
            case 3: return LswModel{spectra::p3()};
            case 4: return LswModel{spectra::p4()};
            default: throw unknown();
        }
    }
    throw unknown();
}

}  // namespace lsw

#endif  // LSW_MODELS_HPP
