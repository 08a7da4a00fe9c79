#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lvgrid {

constexpr double kStepHours = 0.25;   // 15-minute simulation step
constexpr int kStepsPerDay = 96;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Base error for all modules; `module` names the subsystem that failed.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& msg)
        : std::runtime_error(module + ": " + msg), module_(std::move(module)) {}
    const std::string& module() const { return module_; }

private:
    std::string module_;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class TopologyError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    CalibrationError(const std::string& msg, double best_ratio)
        : Error("tariff", msg), best_ratio_(best_ratio) {}
    double best_ratio() const { return best_ratio_; }

private:
    double best_ratio_;
};

/// Percentile with linear interpolation between closest ranks (values need not be sorted).
double percentile(std::vector<double> values, double q);

/// Sum of products a[i]*b[i]; sizes must match.
double dot(const std::vector<double>& a, const std::vector<double>& b);

inline double sum(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s;
}

} // namespace lvgrid
