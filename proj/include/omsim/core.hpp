#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "omsim/errors.hpp"

// Shared types for the two-mode optomechanical simulator: physical
// parameters, pump profiles, the two exact-state parametrizations
// (beam-split thermal and two-mode squeezed thermal), and trajectories.
//
// All dynamics run in dimensionless time t~ = t * Gamma_plus with
// Gamma_plus = (kappa + Gamma_m)/2; dimensional inputs are converted
// once at the boundary.

namespace omsim {

using cplx = std::complex<double>;

inline constexpr double kHbar = 1.054571817e-34;  // J s
inline constexpr double kBoltzmann = 1.380649e-23;  // J/K

/// Physical parameters of the coupled microwave/mechanical system.
/// Rates are angular power-decay rates in s^-1.
struct SystemParams {
    double kappa = 0.0;      // microwave power decay
    double gamma_m = 0.0;    // mechanical power decay
    double gamma0 = 0.0;     // vacuum optomechanical coupling
    double omega_m = 0.0;    // mechanical resonance
    double omega_c = 0.0;    // cavity resonance
    double n_c_bath = 0.0;   // mean bath photon number
    double n_m_bath = 0.0;   // mean bath phonon number

    void validate() const;

    double gamma_plus() const { return 0.5 * (kappa + gamma_m); }
    double gamma_minus() const { return 0.5 * (kappa - gamma_m); }
    double zeta() const { return (kappa - gamma_m) / (kappa + gamma_m); }
};

/// Reduced parameter set used by the dimensionless equations.
struct DimensionlessParams {
    double gamma_plus;  // s^-1, sets the time unit
    double zeta;        // relative loss rate, in (-1, 1]
    double n_bar_b;     // (n_m_bath + n_c_bath) / 2
    double delta_n_b;   // n_m_bath - n_c_bath
};

DimensionlessParams dimensionless_params(const SystemParams& p);

/// Bose-Einstein occupation of a mode at angular frequency omega in a bath
/// at temperature T.
double occupation_from_temperature(double omega, double temperature_K);

enum class Sideband { Red, Blue };

/// Piecewise-constant dimensionless pump strength g(t~).  Before the first
/// segment the pump is off.  Red profiles may carry a detuning from sideband
/// resonance (in units of Gamma_plus); blue profiles with nonzero detuning
/// are rejected.
struct PumpProfile {
    struct Segment {
        double t_start = 0.0;  // dimensionless time
        double g = 0.0;        // dimensionless strength, >= 0
    };

    Sideband sideband = Sideband::Red;
    std::vector<Segment> segments;
    double detuning_over_gamma_plus = 0.0;
    double phi_L = 0.0;  // pump phase, radians

    void validate() const;
    double g_at(double t_tilde) const;

    static PumpProfile constant(Sideband sb, double g, double detuning = 0.0,
                                double phi_L = 0.0);
};

/// Beam-split thermal state parameters (red-sideband exact state).
struct BtsState {
    double theta = 0.0;    // mixing angle
    double phi_B = 0.0;    // interaction phase
    double n_c_th = 0.0;   // microwave thermal population
    double n_m_th = 0.0;   // mechanical thermal population

    void validate() const;
};

/// Two-mode squeezed thermal state parameters (blue-sideband exact state).
struct TmstsState {
    double u = 0.0;        // squeeze amplitude, >= 0
    double phi_S = 0.0;    // squeeze phase
    double n_c_th = 0.0;
    double n_m_th = 0.0;

    void validate() const;
};

/// Per-sample observable record.  `angle` is the mixing angle for red
/// trajectories and the squeeze amplitude for blue ones.
struct Observables {
    double n_c = 0.0;
    double n_m = 0.0;
    double delta12sq = 0.0;
    double angle = 0.0;
};

/// Time-sampled trajectory of an ansatz state.
template <typename State>
struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<Observables> observables;

    std::size_t size() const { return times.size(); }

    void validate() const {
        if (states.size() != times.size() || observables.size() != times.size())
            throw ValidationError("trajectory: one state and one observable record per time");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1]))
                throw ValidationError("trajectory: times must be strictly increasing");
    }
};

/// Uniform sample grid over [t0, t1] with n points (n >= 2).
std::vector<double> uniform_grid(double t0, double t1, std::size_t n);

}  // namespace omsim
