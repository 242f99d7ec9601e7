#pragma once

#include <array>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "omsim/core.hpp"
#include "omsim/integrate.hpp"

// Two independent verifiers of the semi-analytic states:
//  (a) exact closed second-moment (Gaussian) ODEs derived from the master
//      equation — linear, valid at any bath size;
//  (b) brute-force integration of the master equation for the density matrix
//      in a truncated two-mode Fock basis.
// Both are compared against the mapped ansatz trajectories.

namespace omsim {

/// Second moments of the two-mode state.  C = <d^dag b> carries the
/// beam-splitter channel, S = <d b> the pair channel.
struct MomentSet {
    double N_c = 0.0;
    double N_m = 0.0;
    cplx C{0.0, 0.0};
    cplx S{0.0, 0.0};
};

/// Moments of the beam-split thermal state.
MomentSet bts_moments(const BtsState& s);

/// Moments of the two-mode squeezed thermal state.
MomentSet tmsts_moments(const TmstsState& s);

/// Invert bts_moments.  The sign of n_c_th - n_m_th (equivalently the
/// mixing-angle branch) is not determined by the moments; the returned state
/// uses the theta in [0, pi/2] branch.  Balanced populations leave the angle
/// pair undetermined; the convention theta = phi_B = 0 is returned there.
BtsState bts_from_moments(const MomentSet& m);

/// Whether bts_from_moments is well-conditioned at m (needed to leave the
/// moment representation).  require_phase demands a resolvable phi_B as well.
bool bts_extraction_conditioned(const MomentSet& m, bool require_phase);

// Moment equations of motion.  The dimensionless forms use the time unit
// 1/Gamma_plus; the dimensional forms take the pump amplitude G = gamma0 *
// alpha0 in s^-1 and follow the spec'd signatures.
MomentSet moment_rhs_red_dimensionless(const MomentSet& m, double zeta, double g_r,
                                       double detuning_ratio, double n_c_b, double n_m_b);
MomentSet moment_rhs_blue_dimensionless(const MomentSet& m, double zeta, double g_b,
                                        double n_c_b, double n_m_b, double phi_L = 0.0);
MomentSet moment_rhs_red(const MomentSet& m, const SystemParams& p, double G,
                         double Delta_plus = 0.0);
MomentSet moment_rhs_blue(const MomentSet& m, const SystemParams& p, double G,
                          double phi_L = 0.0);

struct MomentRun {
    std::vector<double> times;
    std::vector<MomentSet> moments;
    MomentSet final_state;
};

/// Integrate the (linear) moment equations for a piecewise pump profile.
MomentRun integrate_moments(double zeta, const PumpProfile& profile, double n_c_b,
                            double n_m_b, const MomentSet& m0, double t0, double t1,
                            const IntegratorConfig& cfg,
                            const std::vector<double>& sample_times);

/// Correlation variance from moments at quadrature phases (beta_c, beta_m)
/// for zero-mean states.
double delta12_from_moments(const MomentSet& m, double beta_c, double beta_m);

/// Phase-minimized correlation variance N_c + N_m + 1 - 2|S|.
double delta12_min_from_moments(const MomentSet& m);

/// Symmetrized covariance matrix of (x_c, y_c, x_m, y_m) for a zero-mean
/// state with <d^2> = <b^2> = 0, row-major 4x4.
std::array<double, 16> covariance_from_moments(const MomentSet& m);

/// Smallest eigenvalue of sigma + i Omega / 2 (Gaussian uncertainty
/// physicality; >= 0 up to roundoff for physical states).
double physicality_min_eigenvalue(const std::array<double, 16>& sigma);

// ---------------------------------------------------------------------------
// Truncated-Fock-space density matrix oracle.

/// Dense two-mode density matrix over n_c in [0, dims_c) x n_m in [0, dims_m),
/// row-major over the product index (n_c * dims_m + n_m).
struct FockDensity {
    int dims_c = 0;
    int dims_m = 0;
    std::vector<cplx> rho;

    int dim() const { return dims_c * dims_m; }
    cplx& at(int ic, int jm, int kc, int lm) {
        return rho[static_cast<std::size_t>((ic * dims_m + jm)) * dim() + (kc * dims_m + lm)];
    }
    const cplx& at(int ic, int jm, int kc, int lm) const {
        return rho[static_cast<std::size_t>((ic * dims_m + jm)) * dim() + (kc * dims_m + lm)];
    }

    double trace() const;
    double hermiticity_residual() const;
    /// Probability weight in the highest retained Fock layer of either mode.
    double top_layer_occupancy() const;
    void validate() const;
};

FockDensity fock_thermal(int dims_c, int dims_m, double n_c, double n_m);
FockDensity fock_vacuum(int dims_c, int dims_m);
/// |n_c=0, n_m=1><0,1| (single mechanical excitation).
FockDensity fock_single_phonon(int dims_c, int dims_m);

/// Unitary conjugation by the beam-splitter / two-mode-squeeze operators
/// (generator exponentiated exactly in the truncated space).
FockDensity apply_beam_splitter(const FockDensity& r, double theta, double phi_B);
FockDensity apply_two_mode_squeeze(const FockDensity& r, double u, double phi_S);

/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const FockDensity& rho, const FockDensity& sigma);
/// Smallest eigenvalue of rho (positivity spot check).
double fock_min_eigenvalue(const FockDensity& rho);

struct FockParams {
    int dims_c = 0;
    int dims_m = 0;
    Sideband sideband = Sideband::Red;
    double zeta = 0.0;
    double g = 0.0;                 // dimensionless pump strength
    double detuning_ratio = 0.0;    // red only
    double phi_L = 0.0;
    double n_c_b = 0.0;
    double n_m_b = 0.0;
};

/// Master-equation right-hand side in dimensionless time; writes into drho.
void fock_lindblad_rhs(const FockParams& fp, const std::vector<cplx>& rho,
                       std::vector<cplx>& drho);

/// Dimensional form per the module contract (rates from p, pump from profile
/// evaluated at t~ = 0); returns drho/dt in s^-1.
FockDensity fock_lindblad_rhs(const FockDensity& rho, const SystemParams& p,
                              const PumpProfile& pump);

/// First and second moments extracted from a density matrix.
struct FockMoments {
    double N_c = 0.0, N_m = 0.0;
    cplx C{0, 0}, S{0, 0};
    cplx mean_d{0, 0}, mean_b{0, 0};
    cplx dd{0, 0}, bb{0, 0};

    MomentSet second_moments() const { return MomentSet{N_c, N_m, C, S}; }
    /// Correlation variance (Var X + Var Y) at the given quadrature phases,
    /// evaluated from the full quadrature expansion (all second moments and
    /// the first-moment subtraction).
    double delta12(double beta_c, double beta_m) const;
    double x_variance(double beta_c, double beta_m) const;
    double y_variance(double beta_c, double beta_m) const;
};

FockMoments moments_from_fock(const FockDensity& rho);

struct FockRun {
    std::vector<double> times;
    std::vector<FockMoments> moments;
    std::vector<double> trace;
    std::vector<double> top_layer;
    double trace_drift = 0.0;        // max |trace - trace(0)|
    double max_top_layer = 0.0;
    double max_hermiticity = 0.0;
    bool trusted = false;            // top-layer occupancy stayed < 1e-6
    FockDensity final_state;
};

FockRun integrate_fock(const FockParams& fp, const FockDensity& rho0, double t0, double t1,
                       const IntegratorConfig& cfg, const std::vector<double>& sample_times);

// ---------------------------------------------------------------------------
// Trajectory comparison.

struct SeriesDeviation {
    std::string name;
    double max_abs = 0.0;  // sup |a - b|
    double scale = 0.0;    // sup |b| (reference side)
    double rel = 0.0;      // max_abs / max(scale, floor)
};

struct DeviationReport {
    std::vector<SeriesDeviation> per_series;
    double max_rel = 0.0;
    double tol = 0.0;
    bool pass = false;
};

/// Compare named observable series sampled on a common grid.  The reference
/// side sets the per-series scale.  Throws GridMismatchError when the grids
/// differ.
DeviationReport compare_trajectories(const std::vector<double>& times_a,
                                     const std::map<std::string, std::vector<double>>& a,
                                     const std::vector<double>& times_b,
                                     const std::map<std::string, std::vector<double>>& b,
                                     double tol);

}  // namespace omsim
