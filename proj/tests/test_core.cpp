#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "omsim/core.hpp"
#include "omsim/red.hpp"

using namespace omsim;

namespace {
constexpr double kOmega10MHz = 2.0 * std::numbers::pi * 1e7;
}

TEST_CASE("occupation from temperature: reference points") {
    // 2pi x 10 MHz at 20 mK; the quoted bath number 40 is this value rounded.
    const double n20 = occupation_from_temperature(kOmega10MHz, 0.020);
    CHECK(n20 == doctest::Approx(41.175).epsilon(2e-4));

    // 36 mK gives roughly 75 phonons.
    const double n36 = occupation_from_temperature(kOmega10MHz, 0.036);
    CHECK(n36 == doctest::Approx(74.515).epsilon(2e-4));
    CHECK(std::round(n36) == 75.0);

    // 4 K is roughly 8e3 phonons.
    const double n4K = occupation_from_temperature(kOmega10MHz, 4.0);
    CHECK(n4K == doctest::Approx(8.3e3).epsilon(0.01));
}

TEST_CASE("occupation from temperature: empty-bath limit and monotonicity") {
    CHECK(occupation_from_temperature(kOmega10MHz, 1e-12) == 0.0);
    double prev = 0.0;
    for (double T = 1e-3; T < 10.0; T *= 3.0) {
        const double n = occupation_from_temperature(kOmega10MHz, T);
        CHECK(n > prev);
        prev = n;
    }
}

TEST_CASE("occupation from temperature: domain errors") {
    CHECK_THROWS_AS(occupation_from_temperature(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(occupation_from_temperature(-1.0, 1.0), DomainError);
    CHECK_THROWS_AS(occupation_from_temperature(kOmega10MHz, 0.0), DomainError);
    CHECK_THROWS_AS(occupation_from_temperature(kOmega10MHz, -0.1), DomainError);
}

TEST_CASE("occupation/effective-temperature round trip") {
    for (double T : {1e-3, 0.02, 0.036, 0.3, 4.0, 300.0}) {
        for (double omega : {kOmega10MHz, 2.0 * std::numbers::pi * 1e11}) {
            const double n = occupation_from_temperature(omega, T);
            if (n == 0.0) continue;  // underflowed bath, no inverse
            const double Tb = effective_temperature(n, omega);
            CHECK(std::abs(Tb - T) / T < 1e-12);
            const double nb = occupation_from_temperature(omega, Tb);
            CHECK(std::abs(nb - n) / n < 1e-12);
        }
    }
}

TEST_CASE("dimensionless parameters") {
    SystemParams p;
    p.kappa = 1e5;
    p.gamma_m = 1e3;
    p.n_m_bath = 40.0;
    const auto d = dimensionless_params(p);
    CHECK(d.gamma_plus == doctest::Approx(5.05e4).epsilon(1e-14));
    // independent arithmetic: (1e5 - 1e3)/(1e5 + 1e3)
    CHECK(d.zeta == doctest::Approx(99000.0 / 101000.0).epsilon(1e-14));
    CHECK(d.zeta == doctest::Approx(0.9802).epsilon(1e-4));
    CHECK(d.n_bar_b == doctest::Approx(20.0));
    CHECK(d.delta_n_b == doctest::Approx(40.0));

    SUBCASE("matched losses") {
        p.gamma_m = p.kappa;
        CHECK(dimensionless_params(p).zeta == 0.0);
    }
    SUBCASE("lossless mechanics") {
        p.gamma_m = 0.0;
        CHECK(dimensionless_params(p).zeta == 1.0);
    }
}

TEST_CASE("gamma_minus equals zeta * gamma_plus to machine precision") {
    for (double kappa : {1e3, 1e5, 2.7e6}) {
        for (double gm : {0.0, 12.5, 999.0, 1e5}) {
            SystemParams p;
            p.kappa = kappa;
            p.gamma_m = gm;
            const double lhs = p.gamma_minus();
            const double rhs = p.zeta() * p.gamma_plus();
            CHECK(std::abs(lhs - rhs) <=
                  4.0 * std::abs(lhs) * std::numeric_limits<double>::epsilon());
        }
    }
}

TEST_CASE("SystemParams validation") {
    SystemParams p;
    p.kappa = 0.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.kappa = 1.0;
    p.gamma_m = -1.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.gamma_m = 0.5;
    p.n_m_bath = -1.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.n_m_bath = 1.0;
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("PumpProfile validation and evaluation") {
    PumpProfile p;
    p.sideband = Sideband::Red;
    CHECK_THROWS_AS(p.validate(), ValidationError);  // empty

    p.segments = {{0.0, 1.0}, {2.0, 0.5}};
    CHECK_NOTHROW(p.validate());
    CHECK(p.g_at(-1.0) == 0.0);  // pump off before turn-on
    CHECK(p.g_at(0.0) == 1.0);
    CHECK(p.g_at(1.999) == 1.0);
    CHECK(p.g_at(2.0) == 0.5);
    CHECK(p.g_at(100.0) == 0.5);

    SUBCASE("unsorted segments rejected") {
        p.segments = {{1.0, 1.0}, {1.0, 0.5}};
        CHECK_THROWS_AS(p.validate(), ValidationError);
    }
    SUBCASE("negative strength rejected") {
        p.segments = {{0.0, -0.1}};
        CHECK_THROWS_AS(p.validate(), ValidationError);
    }
    SUBCASE("detuned blue profile rejected") {
        p.sideband = Sideband::Blue;
        p.segments = {{0.0, 1.0}};
        p.detuning_over_gamma_plus = 0.3;
        CHECK_THROWS_AS(p.validate(), ValidationError);
        p.detuning_over_gamma_plus = 0.0;
        CHECK_NOTHROW(p.validate());
    }
}

TEST_CASE("state validation") {
    BtsState b;
    b.n_c_th = -0.1;
    CHECK_THROWS_AS(b.validate(), ValidationError);
    TmstsState t;
    t.u = -0.2;
    CHECK_THROWS_AS(t.validate(), ValidationError);
}

TEST_CASE("trajectory invariants") {
    Trajectory<BtsState> tr;
    tr.times = {0.0, 1.0, 1.0};
    tr.states.resize(3);
    tr.observables.resize(3);
    CHECK_THROWS_AS(tr.validate(), ValidationError);
    tr.times = {0.0, 1.0, 2.0};
    CHECK_NOTHROW(tr.validate());
    tr.observables.resize(2);
    CHECK_THROWS_AS(tr.validate(), ValidationError);
}
