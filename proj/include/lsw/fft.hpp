#ifndef LSW_FFT_HPP
#define LSW_FFT_HPP

// Thin wrapper over FFTW's real-to-complex transforms.  Plans are created
// once per length under a mutex (FFTW's planner is not thread-safe) and then
// executed through the new-array interface, which is.

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <vector>

namespace lsw::fft {

using cplx = std::complex<double>;

namespace detail {

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

    PlanPair get(int n) {
        std::lock_guard lock(mu_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        std::vector<double> re(static_cast<std::size_t>(n));
        std::vector<cplx> co(static_cast<std::size_t>(n / 2 + 1));
        auto* cptr = reinterpret_cast<fftw_complex*>(co.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        PlanPair p;
        p.forward = fftw_plan_dft_r2c_1d(n, re.data(), cptr, flags);
        p.backward = fftw_plan_dft_c2r_1d(n, cptr, re.data(), flags | FFTW_DESTROY_INPUT);
        plans_.emplace(n, p);
        return p;
    }

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [n, p] : plans_) {
            fftw_destroy_plan(p.forward);
            fftw_destroy_plan(p.backward);
        }
    }

    std::mutex mu_;
    std::map<int, PlanPair> plans_;
};

}  // namespace detail

/// Half-spectrum DFT X_k = sum_t x_t exp(-2 pi i k t / n), k = 0..n/2.
inline std::vector<cplx> rfft(std::span<const double> x) {
    const int n = static_cast<int>(x.size());
    const auto plan = detail::PlanCache::instance().get(n);
    std::vector<double> in(x.begin(), x.end());
    std::vector<cplx> out(static_cast<std::size_t>(n / 2 + 1));
    fftw_execute_dft_r2c(plan.forward, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

/// Inverse of rfft including the 1/n factor.
inline std::vector<double> irfft(std::span<const cplx> spectrum, int n) {
    const auto plan = detail::PlanCache::instance().get(n);
    std::vector<cplx> in(spectrum.begin(), spectrum.end());
    std::vector<double> out(static_cast<std::size_t>(n));
    fftw_execute_dft_c2r(plan.backward, reinterpret_cast<fftw_complex*>(in.data()), out.data());
    const double scale = 1.0 / n;
    for (double& v : out) v *= scale;
    return out;
}

}  // namespace lsw::fft

#endif  // LSW_FFT_HPP
