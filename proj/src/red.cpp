#include "omsim/red.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "omsim/oracle.hpp"

namespace omsim {

namespace {

constexpr double kAngleGuard = 1e-12;   // |sin 2theta| below which the phase
                                        // quotient needs the launch series
constexpr double kLaunchGuard = 1e-9;   // |sin phi_B| treated as the clean launch

void check_finite(const BtsDeriv& d, double t, const BtsState& s) {
    if (std::isfinite(d.dtheta) && std::isfinite(d.dphi_B) && std::isfinite(d.dn_c_th) &&
        std::isfinite(d.dn_m_th))
        return;
    throw SingularityError("bts_rhs: non-finite derivative", t,
                           {s.theta, s.phi_B, s.n_c_th, s.n_m_th});
}

}  // namespace

BtsDeriv bts_rhs(const BtsState& s, double zeta, double g_r, double detuning_ratio,
                 double n_c_b, double n_m_b) {
    const double c2 = std::cos(s.theta) * std::cos(s.theta);
    const double s2 = std::sin(s.theta) * std::sin(s.theta);
    const double cos2t = std::cos(2.0 * s.theta);
    const double sin2t = std::sin(2.0 * s.theta);

    BtsDeriv d;
    d.dn_c_th = (1.0 + zeta) * n_c_b * c2 + (1.0 - zeta) * n_m_b * s2 -
                (1.0 + zeta * cos2t) * s.n_c_th;
    d.dn_m_th = (1.0 - zeta) * n_m_b * c2 + (1.0 + zeta) * n_c_b * s2 -
                (1.0 - zeta * cos2t) * s.n_m_th;

    const double n_bar_b = 0.5 * (n_m_b + n_c_b);
    const double delta_n_b = n_m_b - n_c_b;
    const double n_bar = 0.5 * (s.n_m_th + s.n_c_th);
    const double delta_n = s.n_m_th - s.n_c_th;

    // The drift term carries sin(2 theta)/delta_n; exactly unmixed states
    // contribute nothing regardless of the population split.
    double drift = 0.0;
    if (sin2t != 0.0)
        drift = (2.0 * zeta * (n_bar_b - n_bar) - delta_n_b) / delta_n * 0.5 * sin2t;
    d.dtheta = 0.5 * g_r * std::cos(s.phi_B) + drift;

    // Phase equation: sin(phi_B)/tan(2 theta) is 0/0 at the launch point
    // theta = phi_B = 0; the self-consistent series there gives the ratio
    // -2 detuning / g_r (and 0 for an undriven profile).
    double ratio;
    const double sphi = std::sin(s.phi_B);
    if (std::abs(sin2t) < kAngleGuard) {
        if (std::abs(sphi) < kLaunchGuard)
            ratio = (g_r > 0.0) ? (-2.0 * detuning_ratio / g_r) : 0.0;
        else
            ratio = sphi * cos2t / sin2t;  // genuine pole; caller bridges
    } else {
        ratio = sphi * cos2t / sin2t;
    }
    d.dphi_B = 0.5 * g_r * ratio - detuning_ratio;

    check_finite(d, 0.0, s);
    return d;
}

BtsDeriv bts_rhs_dimensional(const BtsState& s, const SystemParams& p, double alpha0,
                             double phi_L, double Delta) {
    p.validate();
    const double c2 = std::cos(s.theta) * std::cos(s.theta);
    const double s2 = std::sin(s.theta) * std::sin(s.theta);
    const double sin2t = std::sin(2.0 * s.theta);
    const double cos2t = std::cos(2.0 * s.theta);
    const double delta_plus = Delta + p.omega_m;

    BtsDeriv d;
    d.dn_c_th = p.kappa * (p.n_c_bath - s.n_c_th) * c2 +
                p.gamma_m * (p.n_m_bath - s.n_c_th) * s2;
    d.dn_m_th = p.gamma_m * (p.n_m_bath - s.n_m_th) * c2 +
                p.kappa * (p.n_c_bath - s.n_m_th) * s2;

    const double delta_n = s.n_m_th - s.n_c_th;
    const double n_sum = s.n_m_th + s.n_c_th;
    double drift = 0.0;
    if (sin2t != 0.0)
        drift = 0.5 * sin2t *
                (p.kappa * p.n_c_bath - p.gamma_m * p.n_m_bath -
                 0.5 * (p.kappa - p.gamma_m) * n_sum) /
                delta_n;
    d.dtheta = p.gamma0 * alpha0 * std::cos(s.phi_B - phi_L) + drift;

    double ratio;
    const double sphi = std::sin(s.phi_B - phi_L);
    if (std::abs(sin2t) < kAngleGuard) {
        if (std::abs(sphi) < kLaunchGuard)
            ratio = (p.gamma0 * alpha0 > 0.0)
                        ? (-delta_plus / (p.gamma0 * alpha0))
                        : 0.0;
        else
            ratio = sphi * cos2t / sin2t;
    } else {
        ratio = sphi * cos2t / sin2t;
    }
    d.dphi_B = -delta_plus + p.gamma0 * alpha0 * ratio;

    check_finite(d, 0.0, s);
    return d;
}

std::pair<double, double> bts_populations(const BtsState& s) {
    const double c2 = std::cos(s.theta) * std::cos(s.theta);
    const double s2 = std::sin(s.theta) * std::sin(s.theta);
    return {s.n_c_th * c2 + s.n_m_th * s2, s.n_m_th * c2 + s.n_c_th * s2};
}

BtsSteadyState bts_steady_state(double g_r, double zeta, double n_c_b, double n_m_b) {
    if (!(g_r >= 0.0)) throw DomainError("bts_steady_state: g_r must be >= 0");
    if (zeta == 1.0 && g_r == 0.0)
        throw DegenerateSteadyStateError(
            "bts_steady_state: lossless mechanics with no pump has no unique steady state");
    const double theta = 0.5 * std::atan(g_r);
    const double c2 = std::cos(theta) * std::cos(theta);
    const double s2 = std::sin(theta) * std::sin(theta);
    const double cos2t = std::cos(2.0 * theta);
    BtsSteadyState ss;
    ss.theta = theta;
    ss.n_c_th = ((1.0 + zeta) * n_c_b * c2 + (1.0 - zeta) * n_m_b * s2) /
                (1.0 + zeta * cos2t);
    ss.n_m_th = ((1.0 - zeta) * n_m_b * c2 + (1.0 + zeta) * n_c_b * s2) /
                (1.0 - zeta * cos2t);
    return ss;
}

std::pair<double, double> bts_reduced_steady(double g_r, double zeta, double n_m_b) {
    const double g2 = g_r * g_r;
    const double denom = 1.0 + g2 - zeta * zeta;
    const double delta_n = std::sqrt(1.0 + g2) * (1.0 - zeta * zeta) * n_m_b / denom;
    const double n_bar = 0.5 * n_m_b * (1.0 - zeta) * (1.0 + g2 + zeta) / denom;
    return {delta_n, n_bar};
}

double effective_temperature(double n_th, double omega) {
    if (!(omega > 0.0)) throw DomainError("effective_temperature: omega must be > 0");
    if (n_th < 0.0) throw DomainError("effective_temperature: n_th must be >= 0");
    if (n_th == 0.0) return 0.0;  // empty mode maps to 0 K by convention
    return kHbar * omega / (kBoltzmann * std::log1p(1.0 / n_th));
}

double bts_correlation_variance(const BtsState& s, double beta_c, double beta_m) {
    const auto [n_c, n_m] = bts_populations(s);
    return n_c + n_m + 1.0 +
           std::sin(2.0 * s.theta) * (s.n_c_th - s.n_m_th) *
               std::sin(s.phi_B + beta_c - beta_m);
}

double theta_decay(double g_r_prev, double t_tilde) {
    if (!(g_r_prev >= 0.0)) throw DomainError("theta_decay: g_r_prev must be >= 0");
    if (g_r_prev == 0.0) return 0.0;
    const double gamma = std::sqrt(1.0 + g_r_prev * g_r_prev);
    const double prefactor = (gamma - 1.0) / std::sqrt(gamma * gamma - 1.0);
    return std::atan(prefactor * std::exp(-gamma * t_tilde));
}

double rethermalization_rate(double n_m_th, double zeta, double n_m_b, double theta) {
    const double c2 = std::cos(theta) * std::cos(theta);
    const double cos2t = std::cos(2.0 * theta);
    return (1.0 - zeta) * n_m_b * c2 - (1.0 - zeta * cos2t) * n_m_th;
}

double principal_mixing_angle(double theta) {
    const double two = std::remainder(2.0 * theta, 2.0 * std::numbers::pi);
    return 0.5 * two;
}

// ---------------------------------------------------------------------------
// Hybrid trajectory integration.

namespace {

Observables bts_observables(const BtsState& s) {
    const auto [n_c, n_m] = bts_populations(s);
    return Observables{n_c, n_m, bts_correlation_variance(s), s.theta};
}

Observables moment_observables(const MomentSet& m) {
    // Correlation variance at the default (zero) quadrature phases, matching
    // bts_correlation_variance(s, 0, 0) through the moment map.
    return Observables{m.N_c, m.N_m, m.N_c + m.N_m + 1.0 + 2.0 * m.C.real(),
                       bts_from_moments(m).theta};
}

std::vector<double> slice_samples(const std::vector<double>& ts, double a, double b,
                                  bool exclusive_lower = false) {
    std::vector<double> out;
    for (double t : ts)
        if ((exclusive_lower ? t > a : t >= a) && t <= b) out.push_back(t);
    return out;
}

}  // namespace

BtsRunResult integrate_bts(double zeta, const PumpProfile& profile, double n_c_b,
                           double n_m_b, const BtsState& initial, double t0, double t1,
                           const IntegratorConfig& cfg,
                           const std::vector<double>& sample_times) {
    profile.validate();
    if (profile.sideband != Sideband::Red)
        throw ValidationError("integrate_bts: profile must be a red-sideband profile");
    initial.validate();
    cfg.validate();
    const double dtp = profile.detuning_over_gamma_plus;

    BtsRunResult run;
    auto push_sample = [&](double t, const BtsState& s) {
        run.trajectory.times.push_back(t);
        run.trajectory.states.push_back(s);
        run.trajectory.observables.push_back(bts_observables(s));
    };
    auto push_moment_sample = [&](double t, const MomentSet& m) {
        run.trajectory.times.push_back(t);
        run.trajectory.states.push_back(bts_from_moments(m));
        run.trajectory.observables.push_back(moment_observables(m));
    };

    // Segment boundaries of the pump profile inside (t0, t1).
    std::vector<double> bounds{t0};
    for (const auto& seg : profile.segments)
        if (seg.t_start > t0 && seg.t_start < t1) bounds.push_back(seg.t_start);
    bounds.push_back(t1);

    BtsState state = initial;
    for (std::size_t bi = 0; bi + 1 < bounds.size(); ++bi) {
        const double seg_a = bounds[bi];
        const double seg_b = bounds[bi + 1];
        const double g = profile.g_at(seg_a);
        auto rhs = [&](double t, const std::vector<double>& y, std::vector<double>& dy) {
            const BtsState s{y[0], y[1], y[2], y[3]};
            const BtsDeriv d = bts_rhs(s, zeta, g, dtp, n_c_b, n_m_b);
            (void)t;
            dy = {d.dtheta, d.dphi_B, d.dn_c_th, d.dn_m_th};
        };

        // Avoid emitting the shared boundary sample twice.
        std::vector<double> want = slice_samples(sample_times, seg_a, seg_b);
        if (bi > 0 && !want.empty() && !run.trajectory.times.empty() &&
            want.front() == run.trajectory.times.back())
            want.erase(want.begin());

        double t = seg_a;
        std::size_t next = 0;
        while (t < seg_b) {
            std::vector<double> pending(want.begin() + next, want.end());
            try {
                auto sink = [&](double ts, const std::vector<double>& y) {
                    push_sample(ts, BtsState{y[0], y[1], y[2], y[3]});
                    ++next;
                };
                const OdeResult r = integrate(rhs, {state.theta, state.phi_B, state.n_c_th,
                                                    state.n_m_th},
                                              t, seg_b, cfg, {}, pending, sink);
                state = BtsState{r.y_final[0], r.y_final[1], r.y_final[2], r.y_final[3]};
                t = r.t_final;
            } catch (const SingularityError& e) {
                // Ansatz chart degenerated: cross the interval in moment
                // space, then recover the ansatz parameters.
                const double t_sing = e.t_tilde;
                const BtsState at{e.last_state[0], e.last_state[1], e.last_state[2],
                                  e.last_state[3]};
                MomentSet m = bts_moments(at);
                auto mrhs = [&](double tt, const std::vector<double>& y,
                                std::vector<double>& dy) {
                    (void)tt;
                    const MomentSet mm{y[0], y[1], cplx(y[2], y[3]), cplx(0, 0)};
                    const MomentSet dm =
                        moment_rhs_red_dimensionless(mm, zeta, g, dtp, n_c_b, n_m_b);
                    dy = {dm.N_c, dm.N_m, dm.C.real(), dm.C.imag()};
                };
                double tb = t_sing;
                double quantum = std::max(1e-4, 1000.0 * cfg.h_min);
                IntegratorConfig mcfg = cfg;
                mcfg.h_init = std::min(mcfg.h_max, std::max(mcfg.h_min, quantum / 16.0));
                while (tb < seg_b) {
                    const double tb_next = std::min(seg_b, tb + quantum);
                    std::vector<double> bridge_samples(want.begin() + next, want.end());
                    bridge_samples = slice_samples(bridge_samples, tb, tb_next,
                                                   /*exclusive_lower=*/true);
                    auto msink = [&](double ts, const std::vector<double>& y) {
                        push_moment_sample(
                            ts, MomentSet{y[0], y[1], cplx(y[2], y[3]), cplx(0, 0)});
                        ++next;
                    };
                    const OdeResult r =
                        integrate(mrhs, {m.N_c, m.N_m, m.C.real(), m.C.imag()}, tb,
                                  tb_next, mcfg, {}, bridge_samples, msink);
                    m = MomentSet{r.y_final[0], r.y_final[1],
                                  cplx(r.y_final[2], r.y_final[3]), cplx(0, 0)};
                    tb = r.t_final;
                    quantum *= 2.0;
                    if (bts_extraction_conditioned(m, dtp != 0.0)) break;
                }
                run.bridge_intervals.emplace_back(t_sing, tb);
                state = bts_from_moments(m);
                t = tb;
            }
        }
    }

    run.trajectory.validate();
    run.final_state = state;
    run.t_final = t1;
    return run;
}

}  // namespace omsim
