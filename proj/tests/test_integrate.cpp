#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "omsim/integrate.hpp"

using namespace omsim;

namespace {

const OdeRhs kDecay = [](double, const std::vector<double>& y, std::vector<double>& dy) {
    dy = {-y[0]};
};

IntegratorConfig tight() {
    IntegratorConfig c;
    c.rel_tol = 1e-9;
    c.abs_tol = 1e-12;
    return c;
}

}  // namespace

TEST_CASE("scalar exponential decay") {
    const auto r = integrate(kDecay, {1.0}, 0.0, 1.0, tight());
    CHECK(std::abs(r.y_final[0] - std::exp(-1.0)) < 1e-9);
}

TEST_CASE("event located at ln 2") {
    Event ev;
    ev.name = "half";
    ev.threshold = 0.5;
    ev.direction = EventDirection::Falling;
    ev.observable = [](double, const std::vector<double>& y) { return y[0]; };
    const auto r = integrate(kDecay, {1.0}, 0.0, 1.0, tight(), {ev});
    REQUIRE(r.crossings.size() == 1);
    CHECK(std::abs(r.crossings[0].t_tilde - std::numbers::ln2) < 1e-8);
}

TEST_CASE("terminal event stops the run") {
    Event ev;
    ev.name = "half";
    ev.threshold = 0.5;
    ev.direction = EventDirection::Falling;
    ev.terminal = true;
    ev.observable = [](double, const std::vector<double>& y) { return y[0]; };
    const auto r = integrate(kDecay, {1.0}, 0.0, 5.0, tight(), {ev});
    CHECK(r.terminated_by_event);
    CHECK(std::abs(r.t_final - std::numbers::ln2) < 1e-8);
    CHECK(std::abs(r.y_final[0] - 0.5) < 1e-7);
}

TEST_CASE("harmonic oscillator energy drift over t=100") {
    const OdeRhs osc = [](double, const std::vector<double>& y, std::vector<double>& dy) {
        dy = {y[1], -y[0]};
    };
    const auto r = integrate(osc, {1.0, 0.0}, 0.0, 100.0, tight());
    const double energy = r.y_final[0] * r.y_final[0] + r.y_final[1] * r.y_final[1];
    CHECK(std::abs(energy - 1.0) < 1e-8);
}

TEST_CASE("fifth-order convergence on the scalar exponential") {
    // Fixed-step errors must scale like h^5 for the embedded pair's
    // propagating solution.
    auto run_fixed = [&](double h) {
        std::vector<double> y{1.0}, y5, k;
        double t = 0.0;
        while (t < 1.0 - 1e-12) {
            rk45_step(kDecay, t, y, h, 1.0, 1.0, y5, k);
            y = y5;
            t += h;
        }
        return std::abs(y[0] - std::exp(-1.0));
    };
    const double e1 = run_fixed(0.05);
    const double e2 = run_fixed(0.025);
    const double order = std::log2(e1 / e2);
    CHECK(order > 4.5);
    CHECK(order < 5.5);
}

TEST_CASE("dense output is exact on polynomial right-hand sides up to degree 3") {
    // dy/dt = 4 t^3 - 3 t^2 + 2 t - 1, solution t^4 - t^3 + t^2 - t.
    const OdeRhs poly = [](double t, const std::vector<double>&, std::vector<double>& dy) {
        dy = {4.0 * t * t * t - 3.0 * t * t + 2.0 * t - 1.0};
    };
    std::vector<double> y{0.0}, y5, k;
    const double h = 0.8;
    rk45_step(poly, 0.0, y, h, 1.0, 1.0, y5, k);
    const auto si = make_interpolant(0.0, h, y, y5, k);
    std::vector<double> out;
    for (double q : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        const double t = q * h;
        si.eval(t, out);
        const double exact = ((t - 1.0) * t + 1.0) * t * t - t;
        CHECK(std::abs(out[0] - exact) < 1e-12);
    }
}

TEST_CASE("samples land on the requested grid") {
    const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
    const auto r = integrate(kDecay, {1.0}, 0.0, 1.0, tight(), {}, grid);
    REQUIRE(r.sample_times.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(r.sample_times[i] == grid[i]);
        CHECK(std::abs(r.sample_states[i][0] - std::exp(-grid[i])) < 1e-9);
    }
}

TEST_CASE("step underflow reports a singularity with the last state") {
    // 1/y blows up in finite time as y crosses zero.
    const OdeRhs blowup = [](double, const std::vector<double>& y,
                             std::vector<double>& dy) { dy = {-1.0 / y[0]}; };
    IntegratorConfig c = tight();
    c.h_min = 1e-10;
    try {
        integrate(blowup, {1.0}, 0.0, 2.0, c);
        FAIL("expected SingularityError");
    } catch (const SingularityError& e) {
        CHECK(e.t_tilde > 0.4);
        CHECK(e.t_tilde <= 0.51);
        REQUIRE(e.last_state.size() == 1);
        CHECK(e.last_state[0] < 0.1);
    }
}

TEST_CASE("max_steps exhaustion reports divergence") {
    IntegratorConfig c = tight();
    c.max_steps = 10;
    c.h_max = 1e-4;
    CHECK_THROWS_AS(integrate(kDecay, {1.0}, 0.0, 1.0, c), DivergenceError);
}

TEST_CASE("config validation") {
    IntegratorConfig c;
    c.h_min = 0.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = IntegratorConfig{};
    c.rel_tol = -1.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = IntegratorConfig{};
    c.h_init = 1.0;  // above h_max
    CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("sub-step event detection catches short dips") {
    // y = cos(20 t) dips below zero inside a fraction of an h_max step.
    const OdeRhs osc = [](double, const std::vector<double>& y, std::vector<double>& dy) {
        dy = {y[1], -400.0 * y[0]};
    };
    Event ev;
    ev.name = "zero";
    ev.threshold = 0.0;
    ev.direction = EventDirection::Both;
    ev.observable = [](double, const std::vector<double>& y) { return y[0]; };
    const auto r = integrate(osc, {1.0, 0.0}, 0.0, 1.0, tight(), {ev});
    // cos(20 t) = 0 at t = pi/40 + k pi/20: six crossings inside [0, 1].
    CHECK(r.crossings.size() == 6);
    CHECK(std::abs(r.crossings[0].t_tilde - std::numbers::pi / 40.0) < 1e-8);
}
