#pragma once

#include <stdexcept>
#include <string>

namespace fpp {

/// Malformed or incomplete scenario configuration. `path` names the
/// offending JSON field, e.g. "grid.points_per_dim".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// NaN, overflow, or a quadrature that failed to converge.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
    NumericalError(const std::string& what, double t)
        : std::runtime_error(what + " (t = " + std::to_string(t) + ")"), time_(t) {}

    double time() const noexcept { return time_; }

private:
    double time_ = -1.0;
};

class QuadratureError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace fpp
