#pragma once

#include <stdexcept>
#include <string>

namespace ssmdelay {

/// Bad user-supplied configuration (step sizes, names, shapes).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Unknown catalog entry or parameter name.
class CatalogError : public std::runtime_error {
public:
    explicit CatalogError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure inside an algorithm (singular system, no convergence).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Trajectory left the admissible region; carries the blow-up time.
class DivergedError : public std::runtime_error {
public:
    DivergedError(const std::string& what, double t_blowup)
        : std::runtime_error(what), t_blowup_(t_blowup) {}
    double blowup_time() const noexcept { return t_blowup_; }

private:
    double t_blowup_;
};

}  // namespace ssmdelay
