#pragma once

// Physical parameters of two emitters on a chiral waveguide and the reduced
// parameters of the delayed amplitude equations.
//
// Units: every number is taken as given. The presets and tests measure rates
// in units of gamma2 and speeds in units of c, so times come out in 1/gamma2
// and lengths in c/gamma2.

#include "chiralqed/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>

namespace chiralqed {

using cplx = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduce an angle to the canonical branch [0, 2pi).
inline double reduce_phase(double phase) {
    double r = std::fmod(phase, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

/// Wrap an angle to (-pi, pi].
inline double wrap_phase(double phase) {
    double r = reduce_phase(phase);
    if (r > std::numbers::pi) r -= two_pi;
    return r;
}

struct PhysicalConfig {
    double omega1 = 0.0;
    double omega2 = 0.0;
    double gammaL1 = 0.0;
    double gammaR1 = 0.0;
    double gammaL2 = 0.0;
    double gammaR2 = 0.0;
    double phiL1 = 0.0;
    double phiR1 = 0.0;
    double phiL2 = 0.0;
    double phiR2 = 0.0;
    double vL = 1.0;
    double vR = 1.0;
    double omega0 = 0.0;
    double kL0 = 0.0;
    double kR0 = 0.0;
    double d = 1.0;
    // Direct propagation phases. When set they replace (v k0 + omega_e - omega0) tau.
    std::optional<double> thetaL;
    std::optional<double> thetaR;

    double x1() const { return -0.5 * d; }
    double x2() const { return 0.5 * d; }
    double gamma1() const { return gammaL1 + gammaR1; }
    double gamma2() const { return gammaL2 + gammaR2; }
    double omega_e() const { return 0.5 * (omega1 + omega2); }
};

inline void validate(const PhysicalConfig& cfg) {
    auto finite = [](double v) { return std::isfinite(v); };
    const double all[] = {cfg.omega1, cfg.omega2, cfg.gammaL1, cfg.gammaR1, cfg.gammaL2, cfg.gammaR2,
                          cfg.phiL1,  cfg.phiR1,  cfg.phiL2,   cfg.phiR2,   cfg.vL,      cfg.vR,
                          cfg.omega0, cfg.kL0,    cfg.kR0,     cfg.d};
    if (!std::all_of(std::begin(all), std::end(all), finite))
        fail(ErrorKind::InvalidConfig, "physical parameters must be finite");
    if ((cfg.thetaL && !finite(*cfg.thetaL)) || (cfg.thetaR && !finite(*cfg.thetaR)))
        fail(ErrorKind::InvalidConfig, "theta overrides must be finite");
    if (cfg.gammaL1 < 0 || cfg.gammaR1 < 0 || cfg.gammaL2 < 0 || cfg.gammaR2 < 0)
        fail(ErrorKind::InvalidConfig, "decay rates must be non-negative");
    if (!(cfg.vL > 0) || !(cfg.vR > 0)) fail(ErrorKind::InvalidConfig, "propagation speeds must be positive");
    if (!(cfg.d > 0)) fail(ErrorKind::InvalidConfig, "emitter separation must be positive");
}

/// Copy of `cfg` with every phase on [0, 2pi). Validates first.
inline PhysicalConfig normalized(PhysicalConfig cfg) {
    validate(cfg);
    cfg.phiL1 = reduce_phase(cfg.phiL1);
    cfg.phiR1 = reduce_phase(cfg.phiR1);
    cfg.phiL2 = reduce_phase(cfg.phiL2);
    cfg.phiR2 = reduce_phase(cfg.phiR2);
    if (cfg.thetaL) cfg.thetaL = reduce_phase(*cfg.thetaL);
    if (cfg.thetaR) cfg.thetaR = reduce_phase(*cfg.thetaR);
    return cfg;
}

// Reduced parameters of
//   dC1/dt = i xi1 C1(t) - beta1 C2(t - tauL) H(t - tauL)
//   dC2/dt = i xi2 C2(t) - beta2 C1(t - tauR) H(t - tauR)
// in the frame rotating at omegaE.
struct EngineParams {
    double delta = 0.0;
    double omegaE = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    cplx xi1{};
    cplx xi2{};
    double tauL = 1.0;
    double tauR = 1.0;
    double thetaL = 0.0;
    double thetaR = 0.0;
    double phiL = 0.0;
    double phiR = 0.0;
    cplx beta1{};
    cplx beta2{};

    double round_trip() const { return tauL + tauR; }
    double min_delay() const { return std::min(tauL, tauR); }
    /// Generator of the free evolution of emitter j (1 or 2).
    cplx rate(int j) const { return cplx(0.0, 1.0) * (j == 1 ? xi1 : xi2); }
};

inline bool operator==(const EngineParams& a, const EngineParams& b) {
    return a.delta == b.delta && a.omegaE == b.omegaE && a.gamma1 == b.gamma1 && a.gamma2 == b.gamma2 &&
           a.xi1 == b.xi1 && a.xi2 == b.xi2 && a.tauL == b.tauL && a.tauR == b.tauR && a.thetaL == b.thetaL &&
           a.thetaR == b.thetaR && a.phiL == b.phiL && a.phiR == b.phiR && a.beta1 == b.beta1 &&
           a.beta2 == b.beta2;
}

/// Assemble EngineParams from the reduced quantities alone; used by direct overrides.
inline EngineParams make_engine_params(double delta, double omegaE, double gammaL1, double gammaR1,
                                       double gammaL2, double gammaR2, double tauL, double tauR,
                                       double thetaL, double thetaR, double phiL, double phiR) {
    EngineParams p;
    p.delta = delta;
    p.omegaE = omegaE;
    p.gamma1 = gammaL1 + gammaR1;
    p.gamma2 = gammaL2 + gammaR2;
    p.xi1 = cplx(-delta, 0.5 * p.gamma1);
    p.xi2 = cplx(delta, 0.5 * p.gamma2);
    p.tauL = tauL;
    p.tauR = tauR;
    p.thetaL = reduce_phase(thetaL);
    p.thetaR = reduce_phase(thetaR);
    p.phiL = reduce_phase(phiL);
    p.phiR = reduce_phase(phiR);
    p.beta1 = std::polar(std::sqrt(gammaL1 * gammaL2), p.thetaL + p.phiL);
    p.beta2 = std::polar(std::sqrt(gammaR1 * gammaR2), p.thetaR - p.phiR);
    return p;
}

/// Propagation phase (v k0 + omega_e - omega0) tau for one direction, unreduced.
inline double propagation_phase(double v, double k0, double omega_e, double omega0, double tau) {
    return (v * k0 + omega_e - omega0) * tau;
}

inline EngineParams derive_engine_params(const PhysicalConfig& raw) {
    const PhysicalConfig cfg = normalized(raw);
    const double omega_e = cfg.omega_e();
    const double tauL = cfg.d / cfg.vL;
    const double tauR = cfg.d / cfg.vR;
    const double thetaL =
        cfg.thetaL ? *cfg.thetaL : propagation_phase(cfg.vL, cfg.kL0, omega_e, cfg.omega0, tauL);
    const double thetaR =
        cfg.thetaR ? *cfg.thetaR : propagation_phase(cfg.vR, cfg.kR0, omega_e, cfg.omega0, tauR);
    return make_engine_params(0.5 * (cfg.omega1 - cfg.omega2), omega_e, cfg.gammaL1, cfg.gammaR1, cfg.gammaL2,
                              cfg.gammaR2, tauL, tauR, thetaL, thetaR, cfg.phiL1 - cfg.phiL2,
                              cfg.phiR1 - cfg.phiR2);
}

/// |g| from gamma = 2 pi |g|^2 / v.
inline double coupling_from_rate(double gamma, double v) {
    if (!(v > 0)) fail(ErrorKind::InvalidConfig, "speed must be positive");
    if (!(gamma >= 0)) fail(ErrorKind::InvalidConfig, "rate must be non-negative");
    return std::sqrt(gamma * v / two_pi);
}

inline double rate_from_coupling(double g, double v) {
    if (!(v > 0)) fail(ErrorKind::InvalidConfig, "speed must be positive");
    return two_pi * g * g / v;
}

/// Coherence length v / gamma of one emitter-direction channel.
inline double characteristic_length(double v, double gamma) {
    if (!(gamma > 0)) fail(ErrorKind::InvalidConfig, "characteristic length needs a positive rate");
    return v / gamma;
}

/// A pair of emitter amplitudes (C1, C2).
struct Amplitudes {
    cplx c1{};
    cplx c2{};

    double population() const { return std::norm(c1) + std::norm(c2); }
    friend bool operator==(const Amplitudes&, const Amplitudes&) = default;
};

struct InitialState {
    cplx c1{1.0, 0.0};
    cplx c2{0.0, 0.0};

    Amplitudes amplitudes() const { return {c1, c2}; }
};

inline constexpr double initial_norm_tolerance = 1e-12;

inline InitialState make_initial_state(cplx c1, cplx c2) {
    const double norm = std::norm(c1) + std::norm(c2);
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > initial_norm_tolerance)
        fail(ErrorKind::InvalidConfig,
             "initial emitter amplitudes must be normalized (|c1|^2+|c2|^2 = " + std::to_string(norm) + ")");
    return {c1, c2};
}

/// C1(0) = sqrt(g2/(g1+g2)), C2(0) = i sqrt(g1/(g1+g2)).
inline InitialState caption_initial_state(double gamma1, double gamma2) {
    const double total = gamma1 + gamma2;
    if (!(total > 0)) fail(ErrorKind::InvalidConfig, "caption initial state needs a positive total rate");
    return {cplx(std::sqrt(gamma2 / total), 0.0), cplx(0.0, std::sqrt(gamma1 / total))};
}

}  // namespace chiralqed
