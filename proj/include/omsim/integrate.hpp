#pragma once

#include <functional>
#include <string>
#include <vector>

#include "omsim/errors.hpp"

// Adaptive explicit ODE driver: embedded Dormand-Prince 5(4) pair with a
// fourth-order dense-output interpolant, threshold-crossing (event)
// detection by bisection on the interpolant, and streaming output onto a
// caller-supplied sample grid.  Re-entrant; no shared mutable state.

namespace omsim {

using OdeRhs = std::function<void(double t, const std::vector<double>& y,
                                  std::vector<double>& dydt)>;

struct IntegratorConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double h_init = 1e-4;
    double h_min = 1e-12;
    double h_max = 0.1;
    std::size_t max_steps = 10'000'000;

    void validate() const;
};

enum class EventDirection { Rising, Falling, Both };

/// Threshold crossing of a continuous scalar observable of the state.
struct Event {
    std::string name;
    std::function<double(double t, const std::vector<double>& y)> observable;
    double threshold = 0.0;
    EventDirection direction = EventDirection::Both;
    bool terminal = false;  // stop integration at the crossing
};

struct Crossing {
    double t_tilde;
    std::size_t event_index;
    std::string name;
};

/// Dense-output polynomial for one accepted step [t0, t0+h].
struct StepInterpolant {
    double t0 = 0.0;
    double h = 0.0;
    // Contiguous blocks of n doubles: r1..r5 of the standard interpolant
    // y(t0 + q*h) = r1 + q*(r2 + (1-q)*(r3 + q*(r4 + (1-q)*r5))).
    std::vector<double> rcont;

    void eval(double t, std::vector<double>& out) const;
};

/// One embedded RK 5(4) step from (t, y) with step h.  Fills y5 (5th-order
/// solution), the seven stage derivatives k (7 blocks of n), and returns the
/// mixed relative/absolute error norm (accept when <= 1).
double rk45_step(const OdeRhs& rhs, double t, const std::vector<double>& y, double h,
                 double rel_tol, double abs_tol, std::vector<double>& y5,
                 std::vector<double>& k);

/// Build the dense-output interpolant for a step computed by rk45_step.
StepInterpolant make_interpolant(double t, double h, const std::vector<double>& y,
                                 const std::vector<double>& y5,
                                 const std::vector<double>& k);

struct OdeResult {
    double t_final = 0.0;
    std::vector<double> y_final;
    std::vector<Crossing> crossings;
    std::size_t n_steps = 0;
    std::size_t n_rejected = 0;
    bool terminated_by_event = false;
    // Filled when a sample grid was given and no sink was installed.
    std::vector<double> sample_times;
    std::vector<std::vector<double>> sample_states;
};

/// Integrate y' = rhs(t, y) over [t0, t1].
///
/// sample_times: strictly increasing grid inside [t0, t1]; states there are
/// evaluated from the dense output.  If sample_sink is set it receives each
/// sample instead of the result storing it (used for large states).
///
/// Throws SingularityError when the error control pushes the step below
/// cfg.h_min (or the RHS is non-finite and refinement cannot fix it) and
/// DivergenceError when cfg.max_steps is exhausted.
OdeResult integrate(const OdeRhs& rhs, const std::vector<double>& y0, double t0, double t1,
                    const IntegratorConfig& cfg, const std::vector<Event>& events = {},
                    const std::vector<double>& sample_times = {},
                    const std::function<void(double, const std::vector<double>&)>&
                        sample_sink = nullptr);

}  // namespace omsim
