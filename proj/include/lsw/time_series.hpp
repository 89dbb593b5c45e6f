#ifndef LSW_TIME_SERIES_HPP
#define LSW_TIME_SERIES_HPP

#include <bit>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lsw/error.hpp"

namespace lsw {

constexpr bool is_dyadic(std::size_t n) noexcept { return n >= 2 && std::has_single_bit(n); }

/// log2 of a dyadic length; throws InputError otherwise.
inline int dyadic_log2(std::size_t n) {
    if (!is_dyadic(n)) {
        throw InputError("length " + std::to_string(n) + " is not a power of two");
    }
    return std::countr_zero(n);
}

/// A real-valued series of dyadic length x_1..x_T (stored zero-based).
class TimeSeries {
public:
    TimeSeries() = default;

    explicit TimeSeries(std::vector<double> data) : data_(std::move(data)) {
        levels_ = dyadic_log2(data_.size());
    }

    std::size_t size() const noexcept { return data_.size(); }
    /// Number of wavelet levels J = log2(T).
    int levels() const noexcept { return levels_; }

    double operator[](std::size_t i) const { return data_[i]; }
    std::span<const double> values() const noexcept { return data_; }
    const std::vector<double>& vector() const noexcept { return data_; }

    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    std::vector<double> data_;
    int levels_ = 0;
};

}  // namespace lsw

#endif  // LSW_TIME_SERIES_HPP
