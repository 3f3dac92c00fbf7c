#include "chiralqed/dde_engine.hpp"
#include "chiralqed/presets.hpp"
#include "chiralqed/steady_state.hpp"
#include "support/oracles.hpp"

#include <catch_amalgamated.hpp>

#include <numbers>
#include <random>

using namespace chiralqed;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double pi = std::numbers::pi;

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::InvalidConfig;
}

// symmetric coupling, omega1 = omega2, phases chosen so the bound-state condition holds
EngineParams symmetric_bic(double gamma1, double gamma2, double tau, double thetaL, double phiL) {
    const double thetaR = -thetaL - phiL;
    return make_engine_params(0.0, 500.0, 0.5 * gamma1, 0.5 * gamma1, 0.5 * gamma2, 0.5 * gamma2, tau, tau,
                              thetaL, thetaR, phiL, 0.0);
}

}  // namespace

TEST_CASE("laplace denominator") {
    const EngineParams bic = derive_engine_params(bic_config());
    CHECK(std::abs(laplace_denominator(0.0, bic)) < 1e-12);

    const EngineParams free = make_engine_params(0.2, 0.0, 0.0, 0.7, 0.4, 0.0, 1.0, 1.5, 0.3, 0.0, 0.0, 0.0);
    const cplx i_unit(0.0, 1.0);
    CHECK(std::abs(laplace_denominator(i_unit * free.xi1, free)) == 0.0);
    CHECK(std::abs(laplace_denominator(i_unit * free.xi2, free)) == 0.0);
    const cplx s(0.3, -0.2);
    CHECK(std::abs(laplace_denominator(s, free) - (s - i_unit * free.xi1) * (s - i_unit * free.xi2)) < 1e-15);

    const EngineParams revival = derive_engine_params(revival_config());
    CHECK(std::abs(laplace_denominator(0.0, revival)) > 0.1);
    CHECK_FALSE(check_bic(revival).satisfied);
}

TEST_CASE("bound-state residuals") {
    const BicReport bic = check_bic(derive_engine_params(bic_config()));
    CHECK(std::abs(bic.phase_residual) < 1e-9);
    CHECK(std::abs(bic.amplitude_residual) < 1e-9);
    CHECK(bic.satisfied);

    // odd and even multiples of pi/2 combining to a multiple of 2 pi
    const EngineParams q = make_engine_params(0.0, 0.0, 0.5, 0.5, 0.25, 0.25, 1.0, 1.0, 3.5 * pi, 4.5 * pi, 2 * pi, 0.0);
    CHECK(std::abs(check_bic(q).phase_residual) < 1e-12);
    // zero up to the rounding of |beta| recovered from its polar form
    CHECK(std::abs(check_bic(q).amplitude_residual) < 1e-15);

    PhysicalConfig chiral = bic_config();
    chiral.gammaL1 = 0.0;
    chiral.gammaR1 = 1.5;
    const EngineParams c = derive_engine_params(chiral);
    const BicReport r = check_bic(c);
    CHECK(r.amplitude_residual == 0.25 * c.gamma1 * c.gamma2);
    CHECK_FALSE(r.satisfied);

    const double wrapped = check_bic(make_engine_params(0, 0, 1, 1, 1, 1, 1, 1, pi, 0.0, 0.0, 0.0)).phase_residual;
    CHECK_THAT(wrapped, WithinAbs(pi, 1e-15));
}

TEST_CASE("stationary amplitudes: special cases") {
    const EngineParams p = derive_engine_params(bic_config());
    const DarkState bright = bright_state(p);
    const Amplitudes s = steady_amplitudes(p, InitialState{bright.amp_eg, bright.amp_ge});
    CHECK(std::abs(s.c1) < 1e-15);
    CHECK(std::abs(s.c2) < 1e-15);

    // no delay, identical emitters: half the excitation stays in the antisymmetric state
    const EngineParams markov = symmetric_bic(1.0, 1.0, 0.0, 0.0, 0.0);
    const Amplitudes m = steady_amplitudes(markov, InitialState{1.0, 0.0});
    CHECK(std::abs(m.c1 - 0.5) < 1e-15);
    CHECK(std::abs(m.c2 + 0.5) < 1e-15);
}

TEST_CASE("stationary amplitudes match the long-time delay-differential populations") {
    const EngineParams p = derive_engine_params(bic_config());
    const InitialState init = caption_initial_state(p.gamma1, p.gamma2);
    const Trajectory tr = integrate(p, init, 200.0);
    const Amplitudes end = tr.amps().back();
    const Amplitudes s = steady_amplitudes(p, init);
    CHECK_THAT(std::norm(end.c1), WithinAbs(std::norm(s.c1), 1e-4));
    CHECK_THAT(std::norm(end.c2), WithinAbs(std::norm(s.c2), 1e-4));
    const double ratio = dark_fidelity(end.c1, end.c2, dark_state(p)) / end.population();
    CHECK_THAT(ratio, WithinAbs(1.0, 1e-3));
}

TEST_CASE("stationary amplitude preconditions") {
    const InitialState init{1.0, 0.0};
    CHECK(kind_of([&] { steady_amplitudes(derive_engine_params(revival_config()), init); }) ==
          ErrorKind::PreconditionViolated);

    // asymmetric split passes only with a loose amplitude tolerance
    const EngineParams asym = make_engine_params(0.0, 0.0, 0.6, 0.4, 0.5, 0.5, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0);
    BicTolerances loose;
    loose.amplitude = 0.1;
    REQUIRE(check_bic(asym, loose).satisfied);
    CHECK(kind_of([&] { steady_amplitudes(asym, init, loose); }) == ErrorKind::PreconditionViolated);

    const EngineParams detuned = make_engine_params(0.2, 0.0, 0.5, 0.5, 0.5, 0.5, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0);
    REQUIRE(check_bic(detuned).satisfied);
    CHECK(kind_of([&] { steady_amplitudes(detuned, init); }) == ErrorKind::PreconditionViolated);
    CHECK_FALSE(analyze_steady_state(detuned, init).stationary.has_value());
}

TEST_CASE("dark state") {
    const DarkState sym = dark_state(symmetric_bic(1.0, 1.0, 1.0, 0.0, 0.0));
    CHECK(std::abs(sym.amp_eg - std::sqrt(0.5)) < 1e-15);
    CHECK(std::abs(sym.amp_ge + std::sqrt(0.5)) < 1e-15);

    const EngineParams p = derive_engine_params(bic_config());
    const DarkState d = dark_state(p);
    const cplx phase = std::polar(1.0, -(p.thetaL + p.phiL));
    CHECK(std::abs(d.amp_eg - std::sqrt(0.4)) < 1e-15);
    CHECK(std::abs(d.amp_ge + std::sqrt(0.6) * phase) < 1e-15);

    const DarkState b = bright_state(p);
    CHECK(std::abs(std::conj(d.amp_eg) * b.amp_eg + std::conj(d.amp_ge) * b.amp_ge) < 1e-12);
    CHECK_THAT(dark_fidelity(d.amp_eg, d.amp_ge, d), WithinAbs(1.0, 1e-15));
    CHECK(dark_fidelity(b.amp_eg, b.amp_ge, d) < 1e-24);

    CHECK(kind_of([] { dark_state(EngineParams{}); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("denominator at zero vanishes exactly when both residuals do") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> rate(0.1, 2.0), phase(-6.0, 6.0), delay(0.2, 3.0);
    for (int k = 0; k < 200; ++k) {
        EngineParams p = symmetric_bic(rate(rng), rate(rng), delay(rng), phase(rng), phase(rng));
        const int variant = k % 4;
        if (variant == 1) p = make_engine_params(0.0, 0.0, 0.5 * p.gamma1, 0.5 * p.gamma1, 0.5 * p.gamma2,
                                                 0.5 * p.gamma2, p.tauL, p.tauR, p.thetaL + 1e-6, p.thetaR, p.phiL, 0.0);
        if (variant == 2) p = make_engine_params(0.0, 0.0, 0.55 * p.gamma1, 0.45 * p.gamma1, 0.5 * p.gamma2,
                                                 0.5 * p.gamma2, p.tauL, p.tauR, p.thetaL, p.thetaR, p.phiL, 0.0);
        if (variant == 3) p = make_engine_params(0.0, 0.0, 0.5 * p.gamma1, 0.5 * p.gamma1, 0.5 * p.gamma2,
                                                 0.5 * p.gamma2, p.tauL, p.tauR, p.thetaL + phase(rng), p.thetaR,
                                                 p.phiL, 0.0);
        const BicReport r = check_bic(p);
        const bool small_residuals = std::abs(r.phase_residual) < 1e-10 && std::abs(r.amplitude_residual) < 1e-10;
        const bool zero = std::abs(laplace_denominator(0.0, p)) < 1e-10;
        INFO("variant " << variant);
        CHECK(zero == small_residuals);
        CHECK(zero == (variant == 0));
    }
}

TEST_CASE("stationary amplitude ratio") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> rate(0.1, 2.0), phase(-6.0, 6.0), delay(0.0, 3.0);
    for (int k = 0; k < 100; ++k) {
        const EngineParams p = symmetric_bic(rate(rng), rate(rng), delay(rng), phase(rng), phase(rng));
        const Amplitudes s = steady_amplitudes(p, oracle::random_initial(rng));
        const cplx expected = -std::sqrt(p.gamma1 / p.gamma2) * std::polar(1.0, -(p.thetaL + p.phiL));
        CHECK(std::abs(s.c2 / s.c1 - expected) < 1e-12 * std::abs(expected));
    }
}

TEST_CASE("trapped probability decreases with the round-trip delay") {
    const EngineParams base = derive_engine_params(bic_config());
    const InitialState init = caption_initial_state(base.gamma1, base.gamma2);
    double previous = 2.0;
    for (int k = 0; k < 10; ++k) {
        EngineParams p = base;
        p.tauL = base.tauL * (0.5 + 0.5 * k);
        p.tauR = base.tauR * (0.5 + 0.5 * k);
        const BicReport r = analyze_steady_state(p, init);
        REQUIRE(r.stationary.has_value());
        CHECK(r.trapped_probability < previous);
        previous = r.trapped_probability;
    }
}
