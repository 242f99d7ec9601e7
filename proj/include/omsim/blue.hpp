#pragma once

#include <vector>

#include "omsim/core.hpp"
#include "omsim/integrate.hpp"

// Blue-sideband (pair-creation) dynamics.  The exact state is a two-mode
// squeezed thermal state.  With the pump on sideband resonance the squeeze
// phase is constant (phi_L - pi/2) and the dynamics close on
// (n_c_th, n_m_th, u); the equations are also provided in the
// (n_bar, delta_n) variables and in bath-free scaled variables.

namespace omsim {

struct TmstsDeriv {
    double dn_c_th = 0.0;
    double dn_m_th = 0.0;
    double du = 0.0;
};

/// Dimensionless right-hand side at zero detuning.
TmstsDeriv tmsts_rhs(const TmstsState& s, double zeta, double g_b, double n_c_b,
                     double n_m_b);

struct TmstsBarDeriv {
    double dn_bar_th = 0.0;
    double ddelta_n_th = 0.0;
    double du = 0.0;
};

/// Same dynamics in average/relative thermal-number variables.
TmstsBarDeriv tmsts_rhs_bar(double n_bar_th, double delta_n_th, double u, double zeta,
                            double g_b, double n_bar_b, double delta_n_b);

/// Bath-free scaled variables: n_bar0 = ((2 n_bar_th + 1)/(2 n_bar_b + 1) - 1)/2,
/// delta_n0 = (delta_n_th - delta_n_b)/(2 n_bar_b + 1).  From equilibrium
/// initial conditions the trajectories are independent of the bath size.
TmstsBarDeriv tmsts_rhs_scaled(double n_bar0, double delta_n0, double u, double zeta,
                               double g_b);

struct TmstsDimDeriv {
    double du = 0.0;
    double dphi_S = 0.0;
    double dn_c_th = 0.0;
    double dn_m_th = 0.0;
};

/// Dimensional right-hand side in s^-1 for pump alpha0 e^{i phi_L} at
/// laser-cavity detuning Delta, including the squeeze-phase equation (whose
/// drive term has a pole at u = 0 unless phi_S = phi_L - pi/2).
TmstsDimDeriv tmsts_rhs_dimensional(const TmstsState& s, const SystemParams& p,
                                    double alpha0, double phi_L, double Delta);

/// Correlation variance (n_c_th + n_m_th + 1) e^{-2u}.
double corr_variance(const TmstsState& s);

/// Evolution equation for the correlation variance itself.
double corr_variance_rhs(double delta12sq, double delta_n_th, double zeta, double g_b,
                         double n_bar_b, double delta_n_b);

struct TmstsSteadyState {
    double u;
    double n_bar_th;
    double delta_n_th;
    double delta12sq;
};

/// Closed-form steady state; only exists for g_b^2 < 1 - zeta^2.
TmstsSteadyState tmsts_steady_state(double g_b, double zeta, double n_bar_b,
                                    double delta_n_b);

/// Pump strength above which the pair generation runs away.
double blue_threshold(double zeta);

/// Total mode populations (n_c, n_m) of the squeezed thermal state.
std::pair<double, double> tmsts_populations(const TmstsState& s);

/// Event on the correlation variance of a blue trajectory.
Event make_delta12_event(const std::string& name, double threshold, EventDirection dir,
                         bool terminal = false);

struct BlueRunResult {
    Trajectory<TmstsState> trajectory;
    std::vector<Crossing> crossings;
    TmstsState final_state;
    double t_final = 0.0;
    bool terminated_by_event = false;
};

/// Integrate the blue dynamics over [t0, t1] for a piecewise-constant pump,
/// sampling onto sample_times; events see the raw state (use
/// make_delta12_event for the correlation variance).
BlueRunResult integrate_tmsts(double zeta, const PumpProfile& profile, double n_c_b,
                              double n_m_b, const TmstsState& initial, double t0,
                              double t1, const IntegratorConfig& cfg,
                              const std::vector<double>& sample_times,
                              const std::vector<Event>& events = {});

}  // namespace omsim
