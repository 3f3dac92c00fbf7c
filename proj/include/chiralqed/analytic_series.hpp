#pragma once

// Exact inverse-Laplace series for the emitter amplitudes.
//
// Expanding 1/[(s - i xi1)(s - i xi2) - beta1 beta2 exp(-s T)] in powers of
// exp(-s T), T = tauL + tauR, turns every retardation round trip into a pair
// of higher-order poles at xi1, xi2. The Heaviside factors cut the sum off, so
// for any finite t only finitely many residues contribute.

#include "chiralqed/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace chiralqed {

inline constexpr int max_kernel_order = 64;
inline constexpr int log_space_threshold = 20;

namespace detail {

// Neumaier step: s += v with the lost low-order part collected in c.
inline void neumaier_add(double& s, double& c, double v) {
    const double t = s + v;
    c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
}

}  // namespace detail

/// Compensated (Neumaier) summation; the result is accurate to a few ulps of
/// the sum regardless of term order.
inline cplx compensated_sum(std::span<const cplx> terms) {
    double re = 0.0, re_c = 0.0, im = 0.0, im_c = 0.0;
    for (const cplx& t : terms) {
        detail::neumaier_add(re, re_c, t.real());
        detail::neumaier_add(im, im_c, t.imag());
    }
    return {re + re_c, im + im_c};
}

namespace detail {

inline double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// log of the rising factorial (m)_j = m (m+1) ... (m+j-1)
inline double log_rising(int m, int j) { return std::lgamma(static_cast<double>(m + j)) - std::lgamma(m); }

inline double rising(int m, int j) {
    double r = 1.0;
    for (int i = 0; i < j; ++i) r *= m + i;
    return r;
}

inline cplx ipow(cplx base, int k) {
    cplx r = 1.0;
    for (int i = 0; i < k; ++i) r *= base;
    return r;
}

inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace detail

/// Default scale below which |z - pole| counts as a collision.
inline double degeneracy_tolerance(const EngineParams& p) {
    return 1e-8 * std::max({p.gamma1, p.gamma2, std::abs(p.delta), 1.0});
}

/// Terms of d^n/dz^n [exp(i z t) (z - pole)^(-m)] at z, before summation.
inline std::vector<cplx> kernel_derivative_terms(int n, double t, cplx z, cplx pole, int m,
                                                 double collision_tol = 1e-14) {
    if (n < 0 || m < 1) fail(ErrorKind::InvalidConfig, "kernel derivative needs n >= 0 and m >= 1");
    if (n > max_kernel_order) fail(ErrorKind::OrderTooHigh, "derivative order " + std::to_string(n) + " > 64");
    const cplx w = z - pole;
    if (std::abs(w) <= collision_tol) fail(ErrorKind::PoleCollision, "evaluation point coincides with the pole");

    const cplx i_unit(0.0, 1.0);
    const cplx phase = std::exp(i_unit * z * t);
    std::vector<cplx> terms;
    terms.reserve(static_cast<std::size_t>(n) + 1);
    if (n <= log_space_threshold) {
        const cplx it = i_unit * t;
        const cplx inv_w = 1.0 / w;
        for (int k = 0; k <= n; ++k) {
            const int j = n - k;
            const double coef = detail::binomial(n, k) * detail::rising(m, j) * ((j % 2) ? -1.0 : 1.0);
            terms.push_back(coef * detail::ipow(it, k) * phase * detail::ipow(inv_w, m + j));
        }
    } else {
        // log-space magnitudes; the phases are carried separately
        const double log_t = std::log(std::abs(t));
        const double log_w = std::log(std::abs(w));
        const double arg_w = std::arg(w);
        for (int k = 0; k <= n; ++k) {
            if (t == 0.0 && k > 0) {
                terms.emplace_back(0.0, 0.0);
                continue;
            }
            const int j = n - k;
            const double log_mag = detail::log_binomial(n, k) + detail::log_rising(m, j) +
                                   (k > 0 ? k * log_t : 0.0) - (m + j) * log_w;
            // (i t)^k contributes k * (pi/2) (+pi for negative t), (-1)^j contributes j * pi
            const double arg = k * (t < 0 ? -0.5 : 0.5) * std::numbers::pi + j * std::numbers::pi - (m + j) * arg_w;
            terms.push_back(phase * std::polar(std::exp(log_mag), arg));
        }
    }
    return terms;
}

/// d^n/dz^n [exp(i z t) (z - pole)^(-m)] evaluated at z.
inline cplx kernel_derivative(int n, double t, cplx z, cplx pole, int m, double collision_tol = 1e-14) {
    const auto terms = kernel_derivative_terms(n, t, z, pole, m, collision_tol);
    return compensated_sum(terms);
}

struct TermCounts {
    int self = 0;
    int d_family = 0;
    int e_family = 0;
    friend bool operator==(const TermCounts&, const TermCounts&) = default;
};

namespace detail {

// Number of n >= 0 with t - n T - offset >= 0.
inline int count_active(double t, double period, double offset) {
    int count = 0;
    while (t - count * period - offset >= 0.0) ++count;
    return count;
}

}  // namespace detail

inline TermCounts active_term_count(const EngineParams& p, double t) {
    if (!(t >= 0)) fail(ErrorKind::OutOfRange, "t must be non-negative");
    const double T = p.round_trip();
    return {detail::count_active(t, T, 0.0), detail::count_active(t, T, p.tauL),
            detail::count_active(t, T, p.tauR)};
}

/// Individual residue contributions, already multiplied by the initial amplitudes and signs.
struct SeriesTerms {
    std::vector<cplx> c1;
    std::vector<cplx> c2;
    TermCounts counts;
    // Sum of magnitudes of every elementary product before cancellation.
    double magnitude = 0.0;
};

inline void require_nondegenerate(const EngineParams& p) {
    if (std::abs(p.xi1 - p.xi2) <= degeneracy_tolerance(p))
        fail(ErrorKind::DegeneratePoles, "xi1 == xi2 within tolerance; use the delay-differential engine");
}

inline SeriesTerms series_terms(const EngineParams& p, const InitialState& init, double t) {
    if (!(t >= 0)) fail(ErrorKind::OutOfRange, "t must be non-negative");
    require_nondegenerate(p);
    const double tol = 0.5 * degeneracy_tolerance(p);
    const cplx i_unit(0.0, 1.0);
    const cplx b12 = p.beta1 * p.beta2;
    const double T = p.round_trip();

    SeriesTerms out;
    out.counts = active_term_count(p, t);
    auto kernel = [&](double scale, int n, double arg, cplx z, cplx pole, int m) {
        const auto parts = kernel_derivative_terms(n, arg, z, pole, m, tol);
        for (const cplx& c : parts) out.magnitude += scale * std::abs(c);
        return compensated_sum(parts);
    };
    if (std::max({out.counts.self, out.counts.d_family, out.counts.e_family}) - 1 > max_kernel_order)
        fail(ErrorKind::OrderTooHigh, "series needs more than 64 round trips at t = " + std::to_string(t));

    // (-1)^n (beta1 beta2)^n, built incrementally
    cplx pw = 1.0;
    double inv_fact = 1.0;       // 1/n!
    double inv_fact_prev = 1.0;  // 1/(n-1)!
    const int n_max = std::max({out.counts.self, out.counts.d_family, out.counts.e_family});
    for (int n = 0; n < n_max; ++n) {
        if (n > 0) {
            pw *= -b12;
            inv_fact_prev = inv_fact;
            inv_fact /= n;
        }
        const double tn = t - n * T;
        if (n < out.counts.self) {
            if (n == 0) {
                out.c1.push_back(init.c1 * std::exp(i_unit * p.xi1 * tn));
                out.c2.push_back(init.c2 * std::exp(i_unit * p.xi2 * tn));
            } else if (pw != 0.0) {
                const cplx a = pw * inv_fact_prev;
                const cplx b = pw * inv_fact;
                const double s1 = std::abs(init.c1), s2 = std::abs(init.c2);
                out.c1.push_back(init.c1 * b * kernel(s1 * std::abs(b), n, tn, p.xi1, p.xi2, n));
                out.c1.push_back(init.c1 * a * kernel(s1 * std::abs(a), n - 1, tn, p.xi2, p.xi1, n + 1));
                out.c2.push_back(init.c2 * b * kernel(s2 * std::abs(b), n, tn, p.xi2, p.xi1, n));
                out.c2.push_back(init.c2 * a * kernel(s2 * std::abs(a), n - 1, tn, p.xi1, p.xi2, n + 1));
            }
        }
        if (n < out.counts.d_family && p.beta1 != 0.0 && (n == 0 || pw != 0.0)) {
            const cplx pref = -i_unit * pw * p.beta1 * inv_fact;
            const double arg = tn - p.tauL;
            const double scale = std::abs(init.c2) * std::abs(pref);
            const cplx dsum = kernel(scale, n, arg, p.xi1, p.xi2, n + 1) + kernel(scale, n, arg, p.xi2, p.xi1, n + 1);
            out.c1.push_back(-init.c2 * pref * dsum);
        }
        if (n < out.counts.e_family && p.beta2 != 0.0 && (n == 0 || pw != 0.0)) {
            const cplx pref = -i_unit * pw * p.beta2 * inv_fact;
            const double arg = tn - p.tauR;
            const double scale = std::abs(init.c1) * std::abs(pref);
            const cplx esum = kernel(scale, n, arg, p.xi1, p.xi2, n + 1) + kernel(scale, n, arg, p.xi2, p.xi1, n + 1);
            out.c2.push_back(-init.c1 * pref * esum);
        }
    }
    return out;
}

struct SeriesResult {
    Amplitudes amps;
    // Sum of term magnitudes; amps carry a rounding error of about eps times this.
    double magnitude_sum = 0.0;

    double rounding_bound() const { return 64.0 * std::numeric_limits<double>::epsilon() * magnitude_sum; }
};

inline SeriesResult series_evaluate(const EngineParams& p, const InitialState& init, double t) {
    const SeriesTerms terms = series_terms(p, init, t);
    SeriesResult r;
    r.amps = {compensated_sum(terms.c1), compensated_sum(terms.c2)};
    r.magnitude_sum = terms.magnitude + std::abs(init.c1) + std::abs(init.c2);
    return r;
}

inline Amplitudes series_amplitudes(const EngineParams& p, const InitialState& init, double t) {
    return series_evaluate(p, init, t).amps;
}

}  // namespace chiralqed
