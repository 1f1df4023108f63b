#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pointnls {

/// Argument outside the mathematical domain of a routine.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical routine could not reach its target accuracy.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double estimate)
        : std::runtime_error(what), estimate_(estimate) {}
    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

/// Datum given in a decomposition frame other than the one required.
class FrameError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid parameters or configuration; carries every violation found.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : std::invalid_argument(join(violations)), violations_(std::move(violations)) {}
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out;
        for (const auto& s : v) {
            if (!out.empty()) out += "; ";
            out += s;
        }
        return out;
    }
    std::vector<std::string> violations_;
};

/// Observable requested where the high-frequency tail is not under control.
class TailError : public NumericError {
public:
    using NumericError::NumericError;
};

/// A one-parameter datum family could not hit the requested energy.
class TuningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pointnls
