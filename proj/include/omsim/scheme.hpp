#pragma once

#include <functional>
#include <vector>

#include "omsim/blue.hpp"
#include "omsim/core.hpp"
#include "omsim/red.hpp"

// Sequential cooling-then-entangle pipeline: cool the mechanical mode with a
// red pump, let the mixing angle relax, then drive the blue sideband above
// threshold to open a transient entanglement window.  Plus the window
// extraction and the pump-strength optimizers built on it.

namespace omsim {

struct SchemeConfig {
    double zeta = 0.0;
    double n_m_b = 0.0;
    double n_c_b = 0.0;
    double g_r = 0.0;            // cooling strength; <= 0 means the strong-field limit
    double g_b = 0.0;            // entangling strength
    double target_variance = 1.0;  // in (0, 1]
    double horizon = 20.0;         // dimensionless time budget for the blue phase
    double g_cap = 1e3;            // optimizer search ceiling
    bool explicit_relax = false;   // integrate the mixing-angle decay explicitly
    double relax_time = 2.0;       // span of the explicit relaxation phase
    std::size_t samples = 2001;
    IntegratorConfig ode;

    void validate() const;
};

struct SchemeResult {
    double delta12_min = 0.0;
    double t_at_min = 0.0;
    double tau_entangled = 0.0;      // time with delta12sq < 1
    double t_enter_entangled = 0.0;
    double t_exit_entangled = 0.0;
    double tau_below_target = 0.0;
    double t_enter_target = 0.0;
    double t_exit_target = 0.0;
    bool ever_entangled = false;
    bool reached_target = false;
    bool runaway_truncated = false;  // stopped early after the window closed
    bool multi_window = false;
};

/// Thermal state left behind by the cooling stage: u = 0 and both thermal
/// populations at the strong-pump balanced value n_bar_b - zeta delta_n_b / 2
/// (or the finite-g_r steady populations when g_r > 0 is given).
TmstsState cooled_initial_state(double zeta, double n_m_b, double n_c_b,
                                double g_r = 0.0);

struct SchemeRun {
    Trajectory<TmstsState> trajectory;
    SchemeResult result;
};

SchemeRun run_scheme(const SchemeConfig& cfg);

struct Window {
    double t_enter = 0.0;
    double t_exit = 0.0;
    double tau = 0.0;
};

/// First interval with delta12sq below the threshold, extracted from the
/// sampled trajectory with local quadratic refinement of the crossing times.
/// Throws HorizonError when the window is still open at the last sample.
Window entanglement_window(const Trajectory<TmstsState>& traj, double threshold);

/// Analytic floor for the pump strength needed to reach a target correlation
/// variance in the large-cooling limit: [(1 - zeta) n_m_b + 1]/target + 1.
double g_bound(double zeta, double n_m_b, double target);

/// Smallest pump strength whose transient dip reaches the target (relative
/// accuracy 1e-4).  Throws InfeasibleError when no strength up to g_cap works.
double find_g_min(double zeta, double n_m_b, double target, double horizon,
                  double g_cap = 1e3);

struct Optimum {
    double g_opt = 0.0;
    double tau_max = 0.0;
    bool multimodal = false;  // coarse scan saw more than one local maximum
};

/// Pump strength maximizing the time below the target variance, coarse
/// log-spaced scan (12 points) refined by golden section to 1e-3 relative.
Optimum find_g_opt(double zeta, double n_m_b, double target, double horizon,
                   double g_cap = 1e3);

/// Steady-state effective mechanical temperature over a (zeta, g_r) grid.
/// Rows follow zeta_grid, columns g_r_grid.  Cells run concurrently.
std::vector<std::vector<double>> sweep_cooling_heatmap(
    const std::vector<double>& zeta_grid, const std::vector<double>& g_r_grid,
    double n_m_b, double n_c_b, double omega_m);

/// Deterministic parallel map over [0, n): each index is an independent pure
/// computation; results land in caller-owned slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace omsim
