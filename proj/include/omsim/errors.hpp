#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace omsim {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument to a pure function (out-of-domain input).
class DomainError : public Error {
  public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// A composite object (config, params, profile) failed validation.
class ValidationError : public Error {
  public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// Integration hit a non-finite derivative or the step-size floor.
/// Carries the time and state at the point of failure.
class SingularityError : public Error {
  public:
    SingularityError(const std::string& msg, double t, std::vector<double> state)
        : Error(msg), t_tilde(t), last_state(std::move(state)) {}
    double t_tilde;
    std::vector<double> last_state;
};

/// Step budget exhausted before reaching the end of the span.
class DivergenceError : public Error {
  public:
    DivergenceError(const std::string& msg, double t) : Error(msg), t_tilde(t) {}
    double t_tilde;
};

/// Steady state requested where none exists (pump above threshold).
class UnstableRegimeError : public Error {
  public:
    explicit UnstableRegimeError(const std::string& msg) : Error(msg) {}
};

/// Steady-state expressions degenerate (division by zero) for these parameters.
class DegenerateSteadyStateError : public Error {
  public:
    explicit DegenerateSteadyStateError(const std::string& msg) : Error(msg) {}
};

/// Optimizer target cannot be reached for any admissible pump strength.
class InfeasibleError : public Error {
  public:
    explicit InfeasibleError(const std::string& msg) : Error(msg) {}
};

/// A threshold window was still open when the trajectory ended.
class HorizonError : public Error {
  public:
    explicit HorizonError(const std::string& msg) : Error(msg) {}
};

/// Two trajectories cannot be compared sample-by-sample.
class GridMismatchError : public Error {
  public:
    explicit GridMismatchError(const std::string& msg) : Error(msg) {}
};

}  // namespace omsim
