#include "omsim/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <thread>

namespace omsim {

void SchemeConfig::validate() const {
    if (!(zeta >= 0.0 && zeta <= 1.0))
        throw ValidationError("SchemeConfig: scheme requires zeta in [0, 1]");
    if (!(n_m_b >= 0.0) || !(n_c_b >= 0.0))
        throw ValidationError("SchemeConfig: bath occupations must be >= 0");
    if (!(target_variance > 0.0 && target_variance <= 1.0))
        throw ValidationError("SchemeConfig: target variance must be in (0, 1]");
    if (!(g_b >= 0.0)) throw ValidationError("SchemeConfig: g_b must be >= 0");
    if (!(horizon > 0.0)) throw ValidationError("SchemeConfig: horizon must be > 0");
    if (!(g_cap > 0.0)) throw ValidationError("SchemeConfig: g_cap must be > 0");
    if (samples < 16) throw ValidationError("SchemeConfig: need at least 16 samples");
    ode.validate();
}

TmstsState cooled_initial_state(double zeta, double n_m_b, double n_c_b, double g_r) {
    if (!(zeta >= 0.0 && zeta <= 1.0))
        throw DomainError("cooled_initial_state: zeta must be in [0, 1]");
    TmstsState s;
    s.u = 0.0;
    s.phi_S = -0.5 * std::numbers::pi;  // phi_L - pi/2 with pump phase phi_L = 0
    if (g_r > 0.0) {
        const BtsSteadyState ss = bts_steady_state(g_r, zeta, n_c_b, n_m_b);
        s.n_c_th = ss.n_c_th;
        s.n_m_th = ss.n_m_th;
    } else {
        const double n_bar_b = 0.5 * (n_m_b + n_c_b);
        const double delta_n_b = n_m_b - n_c_b;
        const double n = n_bar_b - 0.5 * zeta * delta_n_b;
        s.n_c_th = s.n_m_th = n;
    }
    return s;
}

namespace {

// Quadratic refinement of a threshold crossing between samples (exact for a
// parabolic dip).  Points (t0,v0), (t1,v1), (t2,v2) with the crossing of
// `threshold` between t0 and t1 (v0, v1 on opposite sides).
double refine_crossing(double t0, double v0, double t1, double v1, double t2, double v2,
                       double threshold) {
    // Fit v(t) = a (t - t1)^2 + b (t - t1) + c through the three points.
    const double h0 = t0 - t1, h2 = t2 - t1;
    const double c = v1 - threshold;
    const double det = h0 * h2 * (h0 - h2);
    if (det == 0.0) return 0.5 * (t0 + t1);
    const double a = ((v0 - threshold - c) * h2 - (v2 - threshold - c) * h0) / det;
    const double b =
        ((v2 - threshold - c) * h0 * h0 - (v0 - threshold - c) * h2 * h2) / det;
    if (a == 0.0) {
        if (b == 0.0) return 0.5 * (t0 + t1);
        const double x = -c / b;
        return t1 + x;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) {
        // fall back to the secant between the bracketing pair
        return t0 + (threshold - v0) * (t1 - t0) / (v1 - v0);
    }
    const double r1 = (-b + std::sqrt(disc)) / (2.0 * a);
    const double r2 = (-b - std::sqrt(disc)) / (2.0 * a);
    const double x1 = t1 + r1, x2 = t1 + r2;
    const double lo = std::min(t0, t1), hi = std::max(t0, t1);
    const bool in1 = x1 >= lo && x1 <= hi, in2 = x2 >= lo && x2 <= hi;
    if (in1 && !in2) return x1;
    if (in2 && !in1) return x2;
    if (in1 && in2) return std::min(x1, x2);
    return t0 + (threshold - v0) * (t1 - t0) / (v1 - v0);
}

// Minimum of the sampled delta12sq with quadratic refinement at the vertex.
std::pair<double, double> refined_minimum(const Trajectory<TmstsState>& traj) {
    std::size_t im = 0;
    for (std::size_t i = 1; i < traj.size(); ++i)
        if (traj.observables[i].delta12sq < traj.observables[im].delta12sq) im = i;
    double tm = traj.times[im], vm = traj.observables[im].delta12sq;
    if (im > 0 && im + 1 < traj.size()) {
        const double t0 = traj.times[im - 1], t1 = traj.times[im], t2 = traj.times[im + 1];
        const double v0 = traj.observables[im - 1].delta12sq,
                     v1 = traj.observables[im].delta12sq,
                     v2 = traj.observables[im + 1].delta12sq;
        const double h0 = t0 - t1, h2 = t2 - t1;
        const double det = h0 * h2 * (h0 - h2);
        if (det != 0.0) {
            const double a = ((v0 - v1) * h2 - (v2 - v1) * h0) / det;
            const double b = ((v2 - v1) * h0 * h0 - (v0 - v1) * h2 * h2) / det;
            if (a > 0.0) {
                const double x = -b / (2.0 * a);
                if (x > h0 && x < h2) {
                    tm = t1 + x;
                    vm = v1 + b * x + a * x * x;
                }
            }
        }
    }
    return {tm, vm};
}

struct WindowScan {
    Window first;
    bool found = false;
    bool open_at_end = false;
    std::size_t count = 0;
};

WindowScan scan_windows(const Trajectory<TmstsState>& traj, double threshold) {
    WindowScan ws;
    const auto& ts = traj.times;
    auto v = [&](std::size_t i) { return traj.observables[i].delta12sq; };
    bool below = v(0) < threshold;
    double enter = below ? ts[0] : 0.0;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        const bool b = v(i) < threshold;
        if (b && !below) {
            const std::size_t k = i;
            enter = refine_crossing(ts[k - 1], v(k - 1), ts[k], v(k),
                                    k + 1 < traj.size() ? ts[k + 1] : ts[k - 1],
                                    k + 1 < traj.size() ? v(k + 1) : v(k - 1), threshold);
        } else if (!b && below) {
            const std::size_t k = i;
            const double exit = refine_crossing(
                ts[k - 1], v(k - 1), ts[k], v(k), k + 1 < traj.size() ? ts[k + 1] : ts[k - 1],
                k + 1 < traj.size() ? v(k + 1) : v(k - 1), threshold);
            ++ws.count;
            if (!ws.found) {
                ws.first = Window{enter, exit, exit - enter};
                ws.found = true;
            }
        }
        below = b;
    }
    if (below) ws.open_at_end = true;
    return ws;
}

}  // namespace

Window entanglement_window(const Trajectory<TmstsState>& traj, double threshold) {
    traj.validate();
    if (traj.size() < 3) throw DomainError("entanglement_window: trajectory too short");
    const WindowScan ws = scan_windows(traj, threshold);
    if (ws.open_at_end)
        throw HorizonError("entanglement_window: still below threshold at the last sample");
    if (!ws.found) return Window{0.0, 0.0, 0.0};
    return ws.first;
}

SchemeRun run_scheme(const SchemeConfig& cfg) {
    cfg.validate();
    TmstsState init = cooled_initial_state(cfg.zeta, cfg.n_m_b, cfg.n_c_b, cfg.g_r);

    if (cfg.explicit_relax && cfg.g_r > 0.0) {
        // Integrate the post-pump relaxation instead of assuming it is
        // instantaneous: mixing angle decays, populations drift.
        const BtsSteadyState ss = bts_steady_state(cfg.g_r, cfg.zeta, cfg.n_c_b, cfg.n_m_b);
        PumpProfile off = PumpProfile::constant(Sideband::Red, 0.0);
        const BtsState start{ss.theta, 0.0, ss.n_c_th, ss.n_m_th};
        const auto relax =
            integrate_bts(cfg.zeta, off, cfg.n_c_b, cfg.n_m_b, start, 0.0, cfg.relax_time,
                          cfg.ode, {0.0, cfg.relax_time});
        init.n_c_th = relax.final_state.n_c_th;
        init.n_m_th = relax.final_state.n_m_th;
    }

    const double d0 = corr_variance(init);
    const double nb1 = 2.0 * 0.5 * (cfg.n_m_b + cfg.n_c_b) + 1.0;
    const bool runaway = cfg.g_b > blue_threshold(cfg.zeta);

    std::vector<Event> events;
    events.push_back(make_delta12_event("entangled", 1.0, EventDirection::Both));
    if (cfg.target_variance != 1.0)
        events.push_back(
            make_delta12_event("target", cfg.target_variance, EventDirection::Both));
    if (runaway) {
        // Above threshold the variance re-crosses its start value after the
        // dip and then grows without bound; stop once the window is closed.
        const double stop_level = std::max({10.0 * nb1, 2.0 * d0, 100.0});
        events.push_back(
            make_delta12_event("runaway_stop", stop_level, EventDirection::Rising, true));
    }

    PumpProfile blue = PumpProfile::constant(Sideband::Blue, cfg.g_b);
    SchemeRun out;
    const auto grid = uniform_grid(0.0, cfg.horizon, cfg.samples);
    BlueRunResult r = integrate_tmsts(cfg.zeta, blue, cfg.n_c_b, cfg.n_m_b, init, 0.0,
                                      cfg.horizon, cfg.ode, grid, events);
    out.trajectory = std::move(r.trajectory);
    out.result.runaway_truncated = r.terminated_by_event;

    const auto [tmin, vmin] = refined_minimum(out.trajectory);
    out.result.delta12_min = vmin;
    out.result.t_at_min = tmin;

    auto window_from_events = [&](const std::string& name, double threshold) -> Window {
        std::vector<double> cs;
        for (const auto& c : r.crossings)
            if (c.name == name) cs.push_back(c.t_tilde);
        std::sort(cs.begin(), cs.end());
        if (cs.empty()) return Window{0.0, 0.0, 0.0};
        if (cs.size() % 2 != 0) {
            if (out.result.runaway_truncated)
                // odd crossing count with a truncated run means the dip was
                // still open when the stop event fired, which cannot happen
                // (stop level is far above the threshold); treat as horizon.
                throw HorizonError("run_scheme: window still open at truncation");
            throw HorizonError("run_scheme: window for '" + name +
                               "' still open at the horizon");
        }
        (void)threshold;
        return Window{cs[0], cs[1], cs[1] - cs[0]};
    };

    const Window went = window_from_events("entangled", 1.0);
    out.result.ever_entangled = went.tau > 0.0;
    out.result.t_enter_entangled = went.t_enter;
    out.result.t_exit_entangled = went.t_exit;
    out.result.tau_entangled = went.tau;

    Window wt = went;
    if (cfg.target_variance != 1.0) wt = window_from_events("target", cfg.target_variance);
    out.result.reached_target = wt.tau > 0.0;
    out.result.t_enter_target = wt.t_enter;
    out.result.t_exit_target = wt.t_exit;
    out.result.tau_below_target = wt.tau;

    std::size_t ent_crossings = 0;
    for (const auto& c : r.crossings)
        if (c.name == "entangled") ++ent_crossings;
    out.result.multi_window = ent_crossings > 2;
    return out;
}

double g_bound(double zeta, double n_m_b, double target) {
    if (!(target > 0.0 && target <= 1.0))
        throw DomainError("g_bound: target must be in (0, 1]");
    return ((1.0 - zeta) * n_m_b + 1.0) / target + 1.0;
}

namespace {

SchemeConfig optimizer_config(double zeta, double n_m_b, double target, double horizon,
                              double g_cap) {
    SchemeConfig cfg;
    cfg.zeta = zeta;
    cfg.n_m_b = n_m_b;
    cfg.n_c_b = 0.0;
    cfg.g_r = 0.0;  // strong-field cooled start
    cfg.target_variance = target;
    cfg.horizon = horizon;
    cfg.g_cap = g_cap;
    cfg.samples = 4001;
    return cfg;
}

double dip_minimum(const SchemeConfig& base, double g) {
    SchemeConfig cfg = base;
    cfg.g_b = g;
    return run_scheme(cfg).result.delta12_min;
}

double tau_below(const SchemeConfig& base, double g) {
    SchemeConfig cfg = base;
    cfg.g_b = g;
    return run_scheme(cfg).result.tau_below_target;
}

}  // namespace

double find_g_min(double zeta, double n_m_b, double target, double horizon, double g_cap) {
    const SchemeConfig base = optimizer_config(zeta, n_m_b, target, horizon, g_cap);
    base.validate();
    // The dip-depth relation at the minimum gives the analytic floor
    // ((1-zeta) n_m_b + 1)/target - 1; scan upward from just below it.
    const double floor_g =
        std::max(1e-3, (((1.0 - zeta) * n_m_b + 1.0) / target - 1.0) * 0.999);
    if (dip_minimum(base, g_cap) > target)
        throw InfeasibleError("find_g_min: target unreachable below the pump cap");
    double lo = floor_g, hi = g_cap;
    bool have_lo = false;
    const int n_scan = 48;
    double prev = floor_g;
    for (int i = 0; i <= n_scan; ++i) {
        const double g = floor_g * std::pow(g_cap / floor_g, double(i) / n_scan);
        if (dip_minimum(base, g) <= target) {
            hi = g;
            lo = prev;
            have_lo = true;
            break;
        }
        prev = g;
    }
    if (!have_lo) lo = prev;
    while (hi / lo - 1.0 > 1e-4) {
        const double mid = std::sqrt(lo * hi);
        if (dip_minimum(base, mid) <= target)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

Optimum find_g_opt(double zeta, double n_m_b, double target, double horizon, double g_cap) {
    const double gmin = find_g_min(zeta, n_m_b, target, horizon, g_cap);
    const SchemeConfig base = optimizer_config(zeta, n_m_b, target, horizon, g_cap);

    // Coarse log-spaced scan above g_min.
    const double lo0 = gmin * 1.02;
    const double hi0 = std::min(g_cap, gmin * 100.0);
    constexpr int kScan = 12;
    std::vector<double> gs(kScan), taus(kScan);
    for (int i = 0; i < kScan; ++i)
        gs[static_cast<std::size_t>(i)] =
            lo0 * std::pow(hi0 / lo0, double(i) / (kScan - 1));
    parallel_for(kScan, [&](std::size_t i) { taus[i] = tau_below(base, gs[i]); });

    std::size_t best = 0;
    std::size_t n_local_max = 0;
    for (std::size_t i = 0; i < kScan; ++i) {
        if (taus[i] > taus[best]) best = i;
        const bool left_ok = i == 0 || taus[i] >= taus[i - 1];
        const bool right_ok = i + 1 == kScan || taus[i] > taus[i + 1];
        if (left_ok && right_ok && taus[i] > 0.0) ++n_local_max;
    }
    if (taus[best] <= 0.0)
        throw InfeasibleError("find_g_opt: no pump strength held the target window open");

    Optimum opt;
    opt.multimodal = n_local_max > 1;

    double a = gs[best > 0 ? best - 1 : 0];
    double b = gs[std::min<std::size_t>(best + 1, kScan - 1)];
    if (a == b) return Optimum{gs[best], taus[best], opt.multimodal};
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = tau_below(base, c), fd = tau_below(base, d);
    while ((b - a) / b > 1e-3) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = tau_below(base, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = tau_below(base, d);
        }
    }
    opt.g_opt = 0.5 * (a + b);
    opt.tau_max = tau_below(base, opt.g_opt);
    if (opt.multimodal && taus[best] > opt.tau_max) {
        opt.g_opt = gs[best];
        opt.tau_max = taus[best];
    }
    return opt;
}

std::vector<std::vector<double>> sweep_cooling_heatmap(
    const std::vector<double>& zeta_grid, const std::vector<double>& g_r_grid,
    double n_m_b, double n_c_b, double omega_m) {
    if (zeta_grid.empty() || g_r_grid.empty())
        throw DomainError("sweep_cooling_heatmap: grids must be nonempty");
    std::vector<std::vector<double>> cells(zeta_grid.size(),
                                           std::vector<double>(g_r_grid.size(), 0.0));
    parallel_for(zeta_grid.size() * g_r_grid.size(), [&](std::size_t idx) {
        const std::size_t i = idx / g_r_grid.size();
        const std::size_t j = idx % g_r_grid.size();
        const BtsSteadyState ss =
            bts_steady_state(g_r_grid[j], zeta_grid[i], n_c_b, n_m_b);
        cells[i][j] = effective_temperature(ss.n_m_th, omega_m);
    });
    return cells;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const std::size_t workers = std::min(hw, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex err_mu;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace omsim
