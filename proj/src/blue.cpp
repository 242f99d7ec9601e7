#include "omsim/blue.hpp"

#include <algorithm>
#include <cmath>

namespace omsim {

TmstsDeriv tmsts_rhs(const TmstsState& s, double zeta, double g_b, double n_c_b,
                     double n_m_b) {
    const double c = std::cosh(s.u);
    const double sh = std::sinh(s.u);
    const double c2 = c * c, s2 = sh * sh, cs = c * sh;
    TmstsDeriv d;
    d.dn_c_th = (1.0 + zeta) * c2 * (n_c_b - s.n_c_th) +
                (1.0 - zeta) * s2 * (n_m_b + s.n_c_th + 1.0);
    d.dn_m_th = (1.0 - zeta) * c2 * (n_m_b - s.n_m_th) +
                (1.0 + zeta) * s2 * (n_c_b + s.n_m_th + 1.0);
    d.du = 0.5 * g_b -
           cs / (s.n_c_th + s.n_m_th + 1.0) *
               ((n_c_b + n_m_b + 1.0) + zeta * (n_c_b - s.n_c_th + s.n_m_th - n_m_b));
    if (!std::isfinite(d.dn_c_th) || !std::isfinite(d.dn_m_th) || !std::isfinite(d.du))
        throw SingularityError("tmsts_rhs: non-finite derivative", 0.0,
                               {s.n_c_th, s.n_m_th, s.u});
    return d;
}

TmstsBarDeriv tmsts_rhs_bar(double n_bar_th, double delta_n_th, double u, double zeta,
                            double g_b, double n_bar_b, double delta_n_b) {
    const double ch2u = std::cosh(2.0 * u);
    const double sh2u = std::sinh(2.0 * u);
    const double drive = (2.0 * n_bar_b + 1.0) + zeta * (delta_n_th - delta_n_b);
    TmstsBarDeriv d;
    d.dn_bar_th = 0.5 * (ch2u * drive - (2.0 * n_bar_th + 1.0));
    d.ddelta_n_th = (delta_n_b - delta_n_th) - zeta * (2.0 * n_bar_b + 1.0) +
                    (2.0 * n_bar_th + 1.0) * zeta * ch2u;
    d.du = 0.5 * (g_b - sh2u * drive / (2.0 * n_bar_th + 1.0));
    return d;
}

TmstsBarDeriv tmsts_rhs_scaled(double n_bar0, double delta_n0, double u, double zeta,
                               double g_b) {
    const double ch2u = std::cosh(2.0 * u);
    const double sh2u = std::sinh(2.0 * u);
    TmstsBarDeriv d;
    d.dn_bar_th = 0.5 * (ch2u * (1.0 + zeta * delta_n0) - (2.0 * n_bar0 + 1.0));
    d.ddelta_n_th = zeta * ((2.0 * n_bar0 + 1.0) * ch2u - 1.0) - delta_n0;
    d.du = 0.5 * (g_b - sh2u * (1.0 + zeta * delta_n0) / (2.0 * n_bar0 + 1.0));
    return d;
}

TmstsDimDeriv tmsts_rhs_dimensional(const TmstsState& s, const SystemParams& p,
                                    double alpha0, double phi_L, double Delta) {
    p.validate();
    const double c = std::cosh(s.u);
    const double sh = std::sinh(s.u);
    const double c2 = c * c, s2 = sh * sh, cs = c * sh;
    const cplx alpha = alpha0 * std::exp(cplx(0.0, phi_L));
    const cplx em = std::exp(cplx(0.0, -s.phi_S));

    TmstsDimDeriv d;
    d.dn_c_th = p.kappa * c2 * (p.n_c_bath - s.n_c_th) +
                p.gamma_m * s2 * (p.n_m_bath + s.n_c_th + 1.0);
    d.dn_m_th = p.gamma_m * c2 * (p.n_m_bath - s.n_m_th) +
                p.kappa * s2 * (p.n_c_bath + s.n_m_th + 1.0);
    const cplx drive_u = alpha * em - std::conj(alpha * em);
    d.du = -0.5 * p.gamma0 * (cplx(0, 1) * drive_u).real() -
           0.5 * cs / (s.n_c_th + s.n_m_th + 1.0) *
               (p.kappa * (2.0 * p.n_c_bath + 1.0) + p.gamma_m * (2.0 * p.n_m_bath + 1.0) +
                (s.n_m_th - s.n_c_th) * (p.kappa - p.gamma_m));
    const double drive_phi = 2.0 * (alpha * em).real();
    // phi_S = phi_L - pi/2 makes the drive vanish identically, so the pole
    // at u = 0 only bites for other phase choices.
    if (drive_phi == 0.0)
        d.dphi_S = Delta - p.omega_m;
    else
        d.dphi_S = -p.gamma0 * drive_phi / std::tanh(2.0 * s.u) + (Delta - p.omega_m);
    if (!std::isfinite(d.dphi_S))
        throw SingularityError("tmsts_rhs_dimensional: squeeze-phase pole at u = 0", 0.0,
                               {s.u, s.phi_S, s.n_c_th, s.n_m_th});
    return d;
}

double corr_variance(const TmstsState& s) {
    return (s.n_c_th + s.n_m_th + 1.0) * std::exp(-2.0 * s.u);
}

double corr_variance_rhs(double delta12sq, double delta_n_th, double zeta, double g_b,
                         double n_bar_b, double delta_n_b) {
    return (2.0 * n_bar_b + 1.0) + zeta * (delta_n_th - delta_n_b) -
           (1.0 + g_b) * delta12sq;
}

TmstsSteadyState tmsts_steady_state(double g_b, double zeta, double n_bar_b,
                                    double delta_n_b) {
    if (!(g_b >= 0.0)) throw DomainError("tmsts_steady_state: g_b must be >= 0");
    const double margin = 1.0 - zeta * zeta - g_b * g_b;
    if (!(margin > 0.0))
        throw UnstableRegimeError(
            "tmsts_steady_state: no steady state for g_b^2 >= 1 - zeta^2 (runaway)");
    TmstsSteadyState ss;
    ss.u = 0.5 * std::atanh(g_b);
    const double nb1 = 2.0 * n_bar_b + 1.0;
    ss.n_bar_th =
        0.5 * (nb1 * (1.0 - zeta * zeta) * std::sqrt(1.0 - g_b * g_b) / margin - 1.0);
    ss.delta_n_th = delta_n_b + nb1 * g_b * g_b * zeta / margin;
    ss.delta12sq = nb1 * (1.0 - g_b) * (1.0 - zeta * zeta) / margin;
    return ss;
}

double blue_threshold(double zeta) {
    if (std::abs(zeta) > 1.0) throw DomainError("blue_threshold: |zeta| must be <= 1");
    return std::sqrt(1.0 - zeta * zeta);
}

std::pair<double, double> tmsts_populations(const TmstsState& s) {
    const double c2 = std::cosh(s.u) * std::cosh(s.u);
    const double s2 = std::sinh(s.u) * std::sinh(s.u);
    return {s.n_c_th * c2 + (s.n_m_th + 1.0) * s2, s.n_m_th * c2 + (s.n_c_th + 1.0) * s2};
}

Event make_delta12_event(const std::string& name, double threshold, EventDirection dir,
                         bool terminal) {
    Event ev;
    ev.name = name;
    ev.threshold = threshold;
    ev.direction = dir;
    ev.terminal = terminal;
    ev.observable = [](double, const std::vector<double>& y) {
        return (y[0] + y[1] + 1.0) * std::exp(-2.0 * y[2]);
    };
    return ev;
}

namespace {

Observables tmsts_observables(const TmstsState& s) {
    const auto [n_c, n_m] = tmsts_populations(s);
    return Observables{n_c, n_m, corr_variance(s), s.u};
}

}  // namespace

BlueRunResult integrate_tmsts(double zeta, const PumpProfile& profile, double n_c_b,
                              double n_m_b, const TmstsState& initial, double t0,
                              double t1, const IntegratorConfig& cfg,
                              const std::vector<double>& sample_times,
                              const std::vector<Event>& events) {
    profile.validate();
    if (profile.sideband != Sideband::Blue)
        throw ValidationError("integrate_tmsts: profile must be a blue-sideband profile");
    initial.validate();
    cfg.validate();

    BlueRunResult run;
    const double phi_S = initial.phi_S;
    auto push = [&](double t, const TmstsState& s) {
        run.trajectory.times.push_back(t);
        run.trajectory.states.push_back(s);
        run.trajectory.observables.push_back(tmsts_observables(s));
    };

    std::vector<double> bounds{t0};
    for (const auto& seg : profile.segments)
        if (seg.t_start > t0 && seg.t_start < t1) bounds.push_back(seg.t_start);
    bounds.push_back(t1);

    TmstsState state = initial;
    double t_end = t0;
    for (std::size_t bi = 0; bi + 1 < bounds.size(); ++bi) {
        const double seg_a = bounds[bi];
        const double seg_b = bounds[bi + 1];
        const double g = profile.g_at(seg_a);
        auto rhs = [&](double t, const std::vector<double>& y, std::vector<double>& dy) {
            (void)t;
            const TmstsState s{y[2], phi_S, y[0], y[1]};
            const TmstsDeriv d = tmsts_rhs(s, zeta, g, n_c_b, n_m_b);
            dy = {d.dn_c_th, d.dn_m_th, d.du};
        };
        std::vector<double> want;
        for (double ts : sample_times)
            if (ts >= seg_a && ts <= seg_b) want.push_back(ts);
        if (bi > 0 && !want.empty() && !run.trajectory.times.empty() &&
            want.front() == run.trajectory.times.back())
            want.erase(want.begin());

        auto sink = [&](double ts, const std::vector<double>& y) {
            push(ts, TmstsState{y[2], phi_S, y[0], y[1]});
        };
        const OdeResult r = integrate(rhs, {state.n_c_th, state.n_m_th, state.u}, seg_a,
                                      seg_b, cfg, events, want, sink);
        state = TmstsState{r.y_final[2], phi_S, r.y_final[0], r.y_final[1]};
        t_end = r.t_final;
        run.crossings.insert(run.crossings.end(), r.crossings.begin(), r.crossings.end());
        if (r.terminated_by_event) {
            run.terminated_by_event = true;
            break;
        }
    }

    run.trajectory.validate();
    run.final_state = state;
    run.t_final = t_end;
    return run;
}

}  // namespace omsim
