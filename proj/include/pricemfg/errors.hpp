#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pricemfg {

// Bad configuration or precondition violation (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Iteration budget exhausted without meeting tolerance (CLI exit code 3).
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& msg, std::vector<double> residuals = {})
        : std::runtime_error(msg), residual_history(std::move(residuals)) {}
    std::vector<double> residual_history;
};

// NaN/Inf detected or a scheme invariant broke mid-run (CLI exit code 4).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg, int time_index = -1)
        : std::runtime_error(msg), time_index(time_index) {}
    int time_index;
};

}  // namespace pricemfg
