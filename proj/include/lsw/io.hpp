#ifndef LSW_IO_HPP
#define LSW_IO_HPP

// Plain-text series input/output and the earthquake/explosion loader.
// Number formatting goes through std::to_chars, so output does not depend on
// the C locale.

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "lsw/error.hpp"
#include "lsw/time_series.hpp"

namespace lsw {

/// `v` with `digits` significant digits (general notation).
inline std::string format_sig(double v, int digits = 6) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;  // drop the sign of negative zero
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, digits);
    if (ec != std::errc{}) throw InternalError("number formatting failed");
    return std::string(buf.data(), end);
}

/// Shortest representation that reads back to the same double.
inline std::string format_exact(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw InternalError("number formatting failed");
    return std::string(buf.data(), end);
}

/// Callable form of format_sig for the CSV writers.
struct SigFormat {
    int digits = 6;
    std::string operator()(double v) const { return format_sig(v, digits); }
};

namespace detail {

inline bool parse_double(std::string_view tok, double& out) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

/// Every number in `in`; tokens are separated by whitespace or commas and
/// lines starting with '#' are skipped.  A bad token raises FormatError
/// carrying its line number.
inline std::vector<double> read_numbers(std::istream& in, std::string_view what) {
    std::vector<double> out;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view rest(line);
        const auto first = rest.find_first_not_of(" \t\r");
        if (first == std::string_view::npos || rest[first] == '#') continue;
        while (!rest.empty()) {
            const auto b = rest.find_first_not_of(" \t\r,");
            if (b == std::string_view::npos) break;
            rest.remove_prefix(b);
            const auto e = rest.find_first_of(" \t\r,");
            const auto tok = rest.substr(0, e);
            double v = 0.0;
            if (!parse_double(tok, v)) {
                throw FormatError(std::string(what) + ": cannot parse '" + std::string(tok) + "' as a number", lineno);
            }
            out.push_back(v);
            if (e == std::string_view::npos) break;
            rest.remove_prefix(e);
        }
    }
    return out;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return in;
}

}  // namespace detail

/// Series file: one number per line (or a single-column CSV).
inline TimeSeries read_series(std::istream& in, std::string_view what = "series") {
    auto v = detail::read_numbers(in, what);
    if (!is_dyadic(v.size())) {
        throw FormatError(std::string(what) + ": " + std::to_string(v.size()) + " values, expected a power of two");
    }
    return TimeSeries(std::move(v));
}

inline TimeSeries read_series(const std::string& path) {
    auto in = detail::open_input(path);
    return read_series(in, path);
}

/// One value per line at full precision, so the file reads back exactly.
inline void write_series(std::ostream& os, const TimeSeries& x) {
    for (double v : x) os << format_exact(v) << '\n';
}

struct QuakeDataset {
    TimeSeries eqP, eqQ, exP, exQ;

    static constexpr std::size_t series_length = 1024;

    const TimeSeries& series(std::string_view name) const {
        if (name == "eqP") return eqP;
        if (name == "eqQ") return eqQ;
        if (name == "exP") return exP;
        if (name == "exQ") return exQ;
        throw InputError("unknown series '" + std::string(name) + "' (expected eqP, eqQ, exP or exQ)");
    }
};

/// 4096 values: earthquake P and Q phases, then explosion P and Q.
inline QuakeDataset load_quake(std::istream& in, std::string_view what = "quake data") {
    const auto v = detail::read_numbers(in, what);
    constexpr std::size_t n = QuakeDataset::series_length;
    if (v.size() != 4 * n) {
        throw FormatError(std::string(what) + ": expected 4096 values, found " + std::to_string(v.size()));
    }
    auto slice = [&](std::size_t i) {
        return TimeSeries(std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(i * n),
                                              v.begin() + static_cast<std::ptrdiff_t>((i + 1) * n)));
    };
    return QuakeDataset{slice(0), slice(1), slice(2), slice(3)};
}

inline QuakeDataset load_quake(const std::string& path) {
    auto in = detail::open_input(path);
    return load_quake(in, path);
}

/// First differences with the second value prepended:
/// y_1 = x_1 - x_2, y_t = x_t - x_{t-1}.
inline std::vector<double> diff_pad_first(const std::vector<double>& x) {
    if (x.size() < 2) throw InputError("diff_pad_first needs at least two values");
    std::vector<double> y(x.size());
    y[0] = x[0] - x[1];
    for (std::size_t t = 1; t < x.size(); ++t) y[t] = x[t] - x[t - 1];
    return y;
}

}  // namespace lsw

#endif  // LSW_IO_HPP
