#pragma once

#include <utility>
#include <vector>

#include "omsim/core.hpp"
#include "omsim/integrate.hpp"

// Red-sideband (cooling) dynamics.  Under a red-detuned pump the exact state
// is a beam-split thermal state; its four parameters obey closed ODEs with
// two coordinate singularities (balanced thermal populations; zero mixing
// angle with nonzero interaction phase).  Trajectory integration switches to
// the second-moment representation across those instants and re-extracts the
// ansatz parameters afterwards.

namespace omsim {

struct BtsDeriv {
    double dtheta = 0.0;
    double dphi_B = 0.0;
    double dn_c_th = 0.0;
    double dn_m_th = 0.0;
};

/// Dimensionless right-hand side (time unit 1/Gamma_plus).
/// detuning_ratio is the pump detuning from the red sideband over Gamma_plus.
BtsDeriv bts_rhs(const BtsState& s, double zeta, double g_r, double detuning_ratio,
                 double n_c_b, double n_m_b);

/// Dimensional right-hand side in s^-1 for a pump alpha(t) = alpha0 e^{i phi_L}
/// at laser-cavity detuning Delta.  Equals bts_rhs scaled by Gamma_plus.
BtsDeriv bts_rhs_dimensional(const BtsState& s, const SystemParams& p, double alpha0,
                             double phi_L, double Delta);

/// Total mode populations (n_c, n_m) of the beam-split thermal state.
std::pair<double, double> bts_populations(const BtsState& s);

struct BtsSteadyState {
    double theta;
    double n_c_th;
    double n_m_th;
};

/// Closed-form fixed point of the undetuned cooling equations, mixing-angle
/// branch theta in [0, pi/4).
BtsSteadyState bts_steady_state(double g_r, double zeta, double n_c_b, double n_m_b);

/// Steady state in (delta_n_th, n_bar_th) form for a cold cavity bath.
std::pair<double, double> bts_reduced_steady(double g_r, double zeta, double n_m_b);

/// Temperature whose Bose occupation at omega equals n_th (0 maps to 0 K).
double effective_temperature(double n_th, double omega);

/// Two-mode correlation variance of the beam-split thermal state at
/// quadrature phases (beta_c, beta_m).  Includes the phase-dependent
/// beam-splitter cross term of the closed form; always >= 1 (see the
/// density-matrix oracle tests for the adjudication of the cross term).
double bts_correlation_variance(const BtsState& s, double beta_c = 0.0,
                                double beta_m = 0.0);

/// Mixing-angle relaxation after the cooling pump (strength g_r_prev) is cut,
/// with populations frozen at their steady values:
///   tan(theta) = (gamma-1)/sqrt(gamma^2-1) * exp(-gamma t~),
/// gamma = sqrt(1 + g_r_prev^2).  tan(2 theta(0)) = g_r_prev by construction.
double theta_decay(double g_r_prev, double t_tilde);

/// Mechanical rethermalization rate dn_m_th/dt~ for a cold cavity bath,
/// the restriction of the population equation at fixed mixing angle.
double rethermalization_rate(double n_m_th, double zeta, double n_m_b, double theta);

/// Reduce a mixing angle to (-pi/2, pi/2].  The dynamics are pi-periodic in
/// theta (only 2*theta enters), so strong pumps can park theta on a shifted
/// branch of tan(2 theta) = g_r; observables are unaffected.
double principal_mixing_angle(double theta);

struct BtsRunResult {
    Trajectory<BtsState> trajectory;
    BtsState final_state;
    double t_final = 0.0;
    // Intervals integrated in moment representation (coordinate
    // singularities of the ansatz chart).
    std::vector<std::pair<double, double>> bridge_intervals;
};

/// Integrate the cooling equations over [t0, t1] for a piecewise-constant
/// red pump profile, sampling onto sample_times.
BtsRunResult integrate_bts(double zeta, const PumpProfile& profile, double n_c_b,
                           double n_m_b, const BtsState& initial, double t0, double t1,
                           const IntegratorConfig& cfg,
                           const std::vector<double>& sample_times);

}  // namespace omsim
