#pragma once

// Bound state at s = 0 of the Laplace denominator, the trapped emitter
// amplitudes it supports and the dark state they occupy.

#include "chiralqed/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace chiralqed {

/// (s - i xi1)(s - i xi2) - beta1 beta2 exp(-s (tauL + tauR))
inline cplx laplace_denominator(cplx s, const EngineParams& p) {
    const cplx i_unit(0.0, 1.0);
    return (s - i_unit * p.xi1) * (s - i_unit * p.xi2) - p.beta1 * p.beta2 * std::exp(-s * p.round_trip());
}

struct BicTolerances {
    double phase = 1e-9;
    // relative to gamma1 * gamma2
    double amplitude = 1e-9;
    // |delta| relative to max(gamma1, gamma2); the closed form needs identical emitters
    double detuning = 1e-9;
};

struct BicReport {
    double phase_residual = 0.0;
    double amplitude_residual = 0.0;
    bool satisfied = false;
    // Filled only when the stationary amplitudes are known analytically.
    std::optional<Amplitudes> stationary;
    double trapped_probability = 0.0;
    double dark_fidelity = 0.0;
};

inline BicReport check_bic(const EngineParams& p, const BicTolerances& tol = {}) {
    BicReport r;
    r.phase_residual = wrap_phase(p.thetaL + p.thetaR + p.phiL - p.phiR);
    r.amplitude_residual = 0.25 * p.gamma1 * p.gamma2 - std::abs(p.beta1) * std::abs(p.beta2);
    const double amp_tol = tol.amplitude * p.gamma1 * p.gamma2;
    r.satisfied = std::abs(r.phase_residual) <= tol.phase && std::abs(r.amplitude_residual) <= amp_tol;
    return r;
}

/// gamma_Lj = gamma_Rj = gamma_j / 2, read off the reduced parameters:
/// with gamma_Lj + gamma_Rj = gamma_j fixed, |beta1| = |beta2| = sqrt(gamma1 gamma2)/2 holds only there.
inline bool has_symmetric_coupling(const EngineParams& p, double rel_tol = 1e-9) {
    const double target = 0.5 * std::sqrt(p.gamma1 * p.gamma2);
    const double tol = rel_tol * std::max(target, 1e-300);
    return target > 0.0 && std::abs(std::abs(p.beta1) - target) <= tol && std::abs(std::abs(p.beta2) - target) <= tol;
}

/// Stationary amplitudes from the final value theorem (symmetric coupling only).
inline Amplitudes steady_amplitudes(const EngineParams& p, const InitialState& init, const BicTolerances& tol = {}) {
    if (!check_bic(p, tol).satisfied)
        fail(ErrorKind::PreconditionViolated, "bound-state condition not satisfied; no trapped excitation");
    if (!has_symmetric_coupling(p))
        fail(ErrorKind::PreconditionViolated,
             "closed-form stationary amplitudes need gamma_Lj = gamma_Rj = gamma_j/2");
    if (std::abs(p.delta) > tol.detuning * std::max(p.gamma1, p.gamma2))
        fail(ErrorKind::PreconditionViolated, "closed-form stationary amplitudes need omega1 = omega2");
    const double g1 = p.gamma1;
    const double g2 = p.gamma2;
    const cplx phase = std::polar(1.0, p.thetaL + p.phiL);
    const double denom = (g1 + g2) + p.round_trip() * g1 * g2 / 2.0;
    const cplx c1s = (g2 * init.c1 - std::sqrt(g1 * g2) * phase * init.c2) / denom;
    const cplx c2s = -std::sqrt(g1 / g2) * std::conj(phase) * c1s;
    return {c1s, c2s};
}

struct DarkState {
    cplx amp_eg{};
    cplx amp_ge{};
};

inline DarkState dark_state(const EngineParams& p) {
    const double total = p.gamma1 + p.gamma2;
    if (!(total > 0)) fail(ErrorKind::InvalidConfig, "dark state undefined when both emitters are uncoupled");
    return {cplx(std::sqrt(p.gamma2 / total), 0.0),
            -std::sqrt(p.gamma1 / total) * std::polar(1.0, -(p.thetaL + p.phiL))};
}

/// The state orthogonal to the dark state within the emitter subspace.
inline DarkState bright_state(const EngineParams& p) {
    const double total = p.gamma1 + p.gamma2;
    if (!(total > 0)) fail(ErrorKind::InvalidConfig, "bright state undefined when both emitters are uncoupled");
    return {cplx(std::sqrt(p.gamma1 / total), 0.0),
            std::sqrt(p.gamma2 / total) * std::polar(1.0, -(p.thetaL + p.phiL))};
}

/// |<d|psi>|^2 for unnormalized emitter amplitudes.
inline double dark_fidelity(cplx c1, cplx c2, const DarkState& dark) {
    return std::norm(std::conj(dark.amp_eg) * c1 + std::conj(dark.amp_ge) * c2);
}

/// Residuals plus, where available, the trapped amplitudes and their overlap with the dark state.
inline BicReport analyze_steady_state(const EngineParams& p, const InitialState& init, const BicTolerances& tol = {}) {
    BicReport r = check_bic(p, tol);
    if (r.satisfied && has_symmetric_coupling(p) &&
        std::abs(p.delta) <= tol.detuning * std::max(p.gamma1, p.gamma2)) {
        const Amplitudes s = steady_amplitudes(p, init, tol);
        r.stationary = s;
        r.trapped_probability = std::clamp(s.population(), 0.0, 1.0);
        r.dark_fidelity = dark_fidelity(s.c1, s.c2, dark_state(p));
    }
    return r;
}

}  // namespace chiralqed
