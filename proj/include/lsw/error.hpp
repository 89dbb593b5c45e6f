#ifndef LSW_ERROR_HPP
#define LSW_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lsw {

/// Bad argument supplied by the caller (wrong length, out-of-range parameter).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Model specification rejected at construction (e.g. non-stationary AR part).
class ConstructionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed data or configuration file.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what, long line = -1)
        : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}

    long line() const noexcept { return line_; }

private:
    long line_;
};

/// Broken internal invariant; indicates a bug rather than bad input.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace lsw

#endif  // LSW_ERROR_HPP
