#include "omsim/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace omsim {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// y5 - y4 coefficients.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output r5 coefficients.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw ValidationError("IntegratorConfig: tolerances must be > 0");
    if (!(h_min > 0.0) || !(h_min <= h_init) || !(h_init <= h_max))
        throw ValidationError("IntegratorConfig: need 0 < h_min <= h_init <= h_max");
    if (max_steps == 0) throw ValidationError("IntegratorConfig: max_steps must be > 0");
}

double rk45_step(const OdeRhs& rhs, double t, const std::vector<double>& y, double h,
                 double rel_tol, double abs_tol, std::vector<double>& y5,
                 std::vector<double>& k) {
    const std::size_t n = y.size();
    k.resize(7 * n);
    y5.resize(n);
    std::vector<double> tmp(n);
    double* k1 = k.data();
    double* k2 = k1 + n;
    double* k3 = k2 + n;
    double* k4 = k3 + n;
    double* k5 = k4 + n;
    double* k6 = k5 + n;
    double* k7 = k6 + n;

    std::vector<double> kv(n);
    auto call = [&](double ts, const std::vector<double>& ys, double* out) {
        rhs(ts, ys, kv);
        std::copy(kv.begin(), kv.end(), out);
    };

    call(t, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    call(t + c2 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    call(t + c3 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    call(t + c4 * h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    call(t + c5 * h, tmp, k5);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                             a65 * k5[i]);
    call(t + h, tmp, k6);
    for (std::size_t i = 0; i < n; ++i)
        y5[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] +
                            a76 * k6[i]);
    call(t + h, y5, k7);  // FSAL stage

    double err2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                               e6 * k6[i] + e7 * k7[i]);
        const double sc = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
        const double r = ei / sc;
        err2 += r * r;
    }
    return std::sqrt(err2 / static_cast<double>(n));
}

StepInterpolant make_interpolant(double t, double h, const std::vector<double>& y,
                                 const std::vector<double>& y5,
                                 const std::vector<double>& k) {
    const std::size_t n = y.size();
    StepInterpolant si;
    si.t0 = t;
    si.h = h;
    si.rcont.resize(5 * n);
    const double* k1 = k.data();
    const double* k3 = k.data() + 2 * n;
    const double* k4 = k.data() + 3 * n;
    const double* k5 = k.data() + 4 * n;
    const double* k6 = k.data() + 5 * n;
    const double* k7 = k.data() + 6 * n;
    double* r1 = si.rcont.data();
    double* r2 = r1 + n;
    double* r3 = r2 + n;
    double* r4 = r3 + n;
    double* r5 = r4 + n;
    for (std::size_t i = 0; i < n; ++i) {
        const double dy = y5[i] - y[i];
        r1[i] = y[i];
        r2[i] = dy;
        r3[i] = h * k1[i] - dy;
        r4[i] = dy - h * k7[i] - r3[i];
        r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                     d7 * k7[i]);
    }
    return si;
}

void StepInterpolant::eval(double t, std::vector<double>& out) const {
    const std::size_t n = rcont.size() / 5;
    out.resize(n);
    const double q = (t - t0) / h;
    const double q1 = 1.0 - q;
    const double* r1 = rcont.data();
    const double* r2 = r1 + n;
    const double* r3 = r2 + n;
    const double* r4 = r3 + n;
    const double* r5 = r4 + n;
    for (std::size_t i = 0; i < n; ++i)
        out[i] = r1[i] + q * (r2[i] + q1 * (r3[i] + q * (r4[i] + q1 * r5[i])));
}

namespace {

struct EventState {
    double g_prev = 0.0;
    bool have_prev = false;
};

// Locate a sign change of obs - threshold inside [ta, tb] of one step.
double bisect_crossing(const Event& ev, const StepInterpolant& si, double ta, double tb,
                       std::vector<double>& work) {
    auto g = [&](double t) {
        si.eval(t, work);
        return ev.observable(t, work) - ev.threshold;
    };
    double ga = g(ta);
    for (int it = 0; it < 200 && (tb - ta) > 1e-9; ++it) {
        const double tm = 0.5 * (ta + tb);
        const double gm = g(tm);
        if ((ga <= 0.0 && gm <= 0.0) || (ga > 0.0 && gm > 0.0)) {
            ta = tm;
            ga = gm;
        } else {
            tb = tm;
        }
    }
    return 0.5 * (ta + tb);
}

}  // namespace

OdeResult integrate(const OdeRhs& rhs, const std::vector<double>& y0, double t0, double t1,
                    const IntegratorConfig& cfg, const std::vector<Event>& events,
                    const std::vector<double>& sample_times,
                    const std::function<void(double, const std::vector<double>&)>&
                        sample_sink) {
    cfg.validate();
    if (!(t1 > t0)) throw DomainError("integrate: need t1 > t0");
    if (!all_finite(y0))
        throw SingularityError("integrate: non-finite initial state", t0, y0);

    OdeResult res;
    const std::size_t n = y0.size();
    std::vector<double> y = y0;
    std::vector<double> y_new(n), k(7 * n), work(n), probe(n);
    double t = t0;
    double h = std::min(cfg.h_init, t1 - t0);

    auto emit = [&](double ts, const std::vector<double>& ys) {
        if (sample_sink) {
            sample_sink(ts, ys);
        } else {
            res.sample_times.push_back(ts);
            res.sample_states.push_back(ys);
        }
    };

    std::size_t next_sample = 0;
    while (next_sample < sample_times.size() && sample_times[next_sample] < t0)
        ++next_sample;
    if (next_sample < sample_times.size() && sample_times[next_sample] == t0) {
        emit(t0, y);
        ++next_sample;
    }

    std::vector<EventState> ev_state(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) {
        ev_state[e].g_prev = events[e].observable(t0, y) - events[e].threshold;
        ev_state[e].have_prev = true;
    }

    // Standard stabilized step controller (order-5 error exponent).
    const double safety = 0.9, beta = 0.04, alpha = 0.2 - 0.75 * beta;
    double facold = 1e-4;
    bool done = false;

    while (!done) {
        if (res.n_steps + res.n_rejected >= cfg.max_steps)
            throw DivergenceError("integrate: max_steps exceeded at t=" + std::to_string(t), t);
        if (t + h >= t1) {
            h = t1 - t;
            done = true;
        }

        double err = std::numeric_limits<double>::quiet_NaN();
        bool stage_failed = false;
        try {
            err = rk45_step(rhs, t, y, h, cfg.rel_tol, cfg.abs_tol, y_new, k);
        } catch (const SingularityError&) {
            stage_failed = true;  // singular stage evaluation: retry smaller
        }
        if (stage_failed || !std::isfinite(err) || !all_finite(y_new)) {
            done = false;
            const double h_next = 0.25 * h;
            if (h_next < cfg.h_min)
                throw SingularityError(
                    "integrate: step underflow (non-finite derivatives) at t=" +
                        std::to_string(t),
                    t, y);
            h = h_next;
            ++res.n_rejected;
            continue;
        }

        if (err > 1.0) {
            done = false;
            const double fac = std::max(0.2, safety * std::pow(err, -0.2));
            const double h_next = h * fac;
            if (h_next < cfg.h_min)
                throw SingularityError("integrate: step underflow at t=" + std::to_string(t),
                                       t, y);
            h = h_next;
            ++res.n_rejected;
            continue;
        }

        // Accepted.
        ++res.n_steps;
        const StepInterpolant si = make_interpolant(t, h, y, y_new, k);
        const double t_end = t + h;

        // Event detection on a sub-sampled grid of the interpolant, then
        // bisection.  Sub-sampling catches dips shorter than one step.
        double t_stop = t_end;
        bool stop = false;
        std::size_t stop_event = 0;
        constexpr int kProbes = 8;
        for (std::size_t e = 0; e < events.size(); ++e) {
            const Event& ev = events[e];
            double ta = t;
            double ga = ev_state[e].g_prev;
            for (int j = 1; j <= kProbes; ++j) {
                const double tb = (j == kProbes) ? t_end
                                                 : t + h * static_cast<double>(j) / kProbes;
                si.eval(tb, probe);
                const double gb = ev.observable(tb, probe) - ev.threshold;
                const bool rising = ga <= 0.0 && gb > 0.0;
                const bool falling = ga >= 0.0 && gb < 0.0;
                const bool hit = (ev.direction == EventDirection::Rising && rising) ||
                                 (ev.direction == EventDirection::Falling && falling) ||
                                 (ev.direction == EventDirection::Both && (rising || falling));
                if (hit && ga != gb) {
                    const double tc = bisect_crossing(ev, si, ta, tb, work);
                    if (tc < t_stop || !stop) {
                        res.crossings.push_back({tc, e, ev.name});
                        if (ev.terminal && (!stop || tc < t_stop)) {
                            stop = true;
                            t_stop = tc;
                            stop_event = e;
                        }
                    }
                }
                ta = tb;
                ga = gb;
            }
            ev_state[e].g_prev = ga;
        }
        (void)stop_event;
        if (stop) {
            // Drop crossings recorded past the stopping point.
            std::erase_if(res.crossings, [&](const Crossing& c) { return c.t_tilde > t_stop; });
        }

        // Emit samples inside [t, min(t_end, t_stop)].
        const double t_emit_end = stop ? t_stop : t_end;
        while (next_sample < sample_times.size() && sample_times[next_sample] <= t_emit_end) {
            const double ts = sample_times[next_sample];
            if (ts > t) {
                si.eval(ts, work);
                emit(ts, work);
            } else if (ts == t0) {
                // already emitted
            } else {
                si.eval(ts, work);
                emit(ts, work);
            }
            ++next_sample;
        }

        if (stop) {
            si.eval(t_stop, y);
            t = t_stop;
            res.terminated_by_event = true;
            break;
        }

        y = y_new;
        t = t_end;

        const double fac11 = std::pow(std::max(err, 1e-32), alpha);
        double fac = fac11 / std::pow(facold, beta);
        fac = std::max(0.2, std::min(5.0, fac / safety));
        facold = std::max(err, 1e-4);
        h = std::min(cfg.h_max, h * 1.0 / fac);
        h = std::max(h, cfg.h_min);
    }

    res.t_final = t;
    res.y_final = y;
    return res;
}

}  // namespace omsim
