#pragma once

// Method-of-steps integration of the two-delay amplitude equations.
//
// The grid is aligned with every point a*tauL + b*tauR in [0, t_end]; the
// solution is only piecewise smooth across those points. Inside a segment the
// free part exp(i xi t) is factored out and the remaining quadrature is
// advanced with classical RK4. Because both delays are at least four steps
// long, the delayed amplitudes needed by a step always come from completed
// intervals.

#include "chiralqed/core_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace chiralqed {

struct BreakpointLattice {
    std::vector<double> times;
};

inline constexpr double breakpoint_merge_fraction = 1e-12;
inline constexpr std::size_t max_breakpoints = 4'000'000;

/// Sorted points {a tauL + b tauR} within [0, t_end], merged within 1e-12 min(tau).
inline BreakpointLattice breakpoint_lattice(double tauL, double tauR, double t_end) {
    if (!(tauL > 0) || !(tauR > 0)) fail(ErrorKind::InvalidConfig, "delays must be positive");
    if (!(t_end >= 0)) fail(ErrorKind::InvalidConfig, "t_end must be non-negative");
    const double estimate = (t_end / tauL + 1.0) * (t_end / tauR + 1.0);
    if (estimate > 2.0 * static_cast<double>(max_breakpoints))
        fail(ErrorKind::PreconditionViolated,
             "breakpoint lattice too large (t_end much longer than the delays)");

    std::vector<double> pts;
    for (std::size_t a = 0;; ++a) {
        const double base = static_cast<double>(a) * tauL;
        if (base > t_end) break;
        for (std::size_t b = 0;; ++b) {
            const double t = base + static_cast<double>(b) * tauR;
            if (t > t_end) break;
            pts.push_back(t);
        }
    }
    std::sort(pts.begin(), pts.end());
    const double merge = breakpoint_merge_fraction * std::min(tauL, tauR);
    BreakpointLattice lattice;
    lattice.times.reserve(pts.size());
    for (double t : pts)
        if (lattice.times.empty() || t - lattice.times.back() > merge) lattice.times.push_back(t);
    return lattice;
}

class Trajectory;

namespace detail {

// Cubic Hermite interpolation of u(s) = exp(-rate s) C(t0 + s) on [0, h].
// Exact whenever the forcing vanishes on the interval.
inline cplx exp_hermite(cplx rate, double h, double s, cplx c0, cplx c1, cplx f0, cplx f1) {
    const double th = s / h;
    const double th2 = th * th;
    const double th3 = th2 * th;
    const cplx decay = std::exp(-rate * h);
    const cplx u1 = decay * c1;
    const cplx du1 = decay * f1;
    const cplx u = (2 * th3 - 3 * th2 + 1) * c0 + (th3 - 2 * th2 + th) * h * f0 + (-2 * th3 + 3 * th2) * u1 +
                   (th3 - th2) * h * du1;
    return std::exp(rate * s) * u;
}

class TrajectoryBuilder;

}  // namespace detail

/// Emitter amplitudes on a breakpoint-aligned grid with dense output.
class Trajectory {
public:
    const std::vector<double>& times() const { return times_; }
    const std::vector<Amplitudes>& amps() const { return amps_; }
    double end_time() const { return times_.back(); }
    std::size_t size() const { return times_.size(); }

    /// Dense output; bit-exact at stored nodes.
    Amplitudes evaluate(double t) const {
        if (!(t >= 0.0) || t > end_time())
            fail(ErrorKind::OutOfRange, "t = " + std::to_string(t) + " outside [0, " +
                                            std::to_string(end_time()) + "]");
        return evaluate_unchecked(t);
    }

    /// Forcing terms (the delayed contributions) just right of node i and just left of node i+1.
    const Amplitudes& forcing_start(std::size_t interval) const { return f_start_[interval]; }
    const Amplitudes& forcing_end(std::size_t interval) const { return f_end_[interval]; }

private:
    friend class detail::TrajectoryBuilder;

    Amplitudes evaluate_unchecked(double t) const {
        const auto it = std::upper_bound(times_.begin(), times_.end(), t);
        if (it == times_.begin()) return amps_.front();
        const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
        if (t == times_[i] || i + 1 >= times_.size()) return amps_[i];
        return interpolate(i, t);
    }

    Amplitudes interpolate(std::size_t i, double t) const {
        const double h = times_[i + 1] - times_[i];
        const double s = t - times_[i];
        return {detail::exp_hermite(rate1_, h, s, amps_[i].c1, amps_[i + 1].c1, f_start_[i].c1, f_end_[i].c1),
                detail::exp_hermite(rate2_, h, s, amps_[i].c2, amps_[i + 1].c2, f_start_[i].c2, f_end_[i].c2)};
    }

    std::vector<double> times_;
    std::vector<Amplitudes> amps_;
    std::vector<Amplitudes> f_start_;
    std::vector<Amplitudes> f_end_;
    cplx rate1_{};
    cplx rate2_{};
};

namespace detail {

class TrajectoryBuilder {
public:
    TrajectoryBuilder(const EngineParams& p, Amplitudes start) : p_(p) {
        traj_.rate1_ = p.rate(1);
        traj_.rate2_ = p.rate(2);
        traj_.times_.push_back(0.0);
        traj_.amps_.push_back(start);
        merge_tol_ = breakpoint_merge_fraction * p.min_delay();
    }

    // Integrate across one smooth segment [a, b] with n equal steps.
    void segment(double a, double b, std::size_t n) {
        const bool active1 = a >= p_.tauL - merge_tol_;
        const bool active2 = a >= p_.tauR - merge_tol_;
        const double h = (b - a) / static_cast<double>(n);
        const cplx r1 = traj_.rate1_;
        const cplx r2 = traj_.rate2_;
        const cplx half1 = std::exp(-r1 * (0.5 * h)), full1 = std::exp(-r1 * h), grow1 = std::exp(r1 * h);
        const cplx half2 = std::exp(-r2 * (0.5 * h)), full2 = std::exp(-r2 * h), grow2 = std::exp(r2 * h);

        Amplitudes f0 = forcing(a, active1, active2);
        for (std::size_t k = 0; k < n; ++k) {
            const double t0 = a + static_cast<double>(k) * h;
            const double t1 = (k + 1 == n) ? b : a + static_cast<double>(k + 1) * h;
            const Amplitudes fm = forcing(t0 + 0.5 * h, active1, active2);
            const Amplitudes f1 = forcing(t1, active1, active2);
            const Amplitudes& c = traj_.amps_.back();
            // RK4 on u' = exp(-rate (t - t0)) f(t); stages 2 and 3 coincide.
            const cplx u1 = c.c1 + (h / 6.0) * (f0.c1 + 4.0 * half1 * fm.c1 + full1 * f1.c1);
            const cplx u2 = c.c2 + (h / 6.0) * (f0.c2 + 4.0 * half2 * fm.c2 + full2 * f1.c2);
            const Amplitudes next{grow1 * u1, grow2 * u2};
            if (!std::isfinite(next.c1.real()) || !std::isfinite(next.c1.imag()) ||
                !std::isfinite(next.c2.real()) || !std::isfinite(next.c2.imag()))
                fail(ErrorKind::NonFiniteValue, "amplitude overflow at t = " + std::to_string(t1));
            traj_.f_start_.push_back(f0);
            traj_.f_end_.push_back(f1);
            traj_.times_.push_back(t1);
            traj_.amps_.push_back(next);
            f0 = f1;
        }
    }

    Trajectory finish() && { return std::move(traj_); }

private:
    Amplitudes forcing(double t, bool active1, bool active2) const {
        Amplitudes f{};
        if (active1) f.c1 = -p_.beta1 * history(t - p_.tauL).c2;
        if (active2) f.c2 = -p_.beta2 * history(t - p_.tauR).c1;
        return f;
    }

    Amplitudes history(double s) const {
        if (s < 0.0) s = 0.0;  // only reachable through rounding at the activation instant
        return traj_.evaluate_unchecked(s);
    }

    const EngineParams& p_;
    Trajectory traj_;
    double merge_tol_ = 0.0;
};

}  // namespace detail

inline constexpr double default_step_divisor = 64.0;
inline constexpr double max_step_divisor = 4.0;

inline double default_step(const EngineParams& p) { return p.min_delay() / default_step_divisor; }

inline Trajectory integrate(const EngineParams& p, const InitialState& init, double t_end, double step) {
    if (!(t_end > 0)) fail(ErrorKind::InvalidConfig, "t_end must be positive");
    if (!(step > 0)) fail(ErrorKind::InvalidConfig, "step must be positive");
    if (!(p.tauL > 0) || !(p.tauR > 0)) fail(ErrorKind::InvalidConfig, "delays must be positive");
    if (step > p.min_delay() / max_step_divisor * (1.0 + 1e-12))
        fail(ErrorKind::StepTooLarge, "step " + std::to_string(step) + " exceeds min(tauL, tauR)/4 = " +
                                          std::to_string(p.min_delay() / max_step_divisor));

    std::vector<double> nodes = breakpoint_lattice(p.tauL, p.tauR, t_end).times;
    const double merge = breakpoint_merge_fraction * p.min_delay();
    if (t_end - nodes.back() > merge)
        nodes.push_back(t_end);
    else
        nodes.back() = std::max(nodes.back(), t_end);

    detail::TrajectoryBuilder builder(p, init.amplitudes());
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double len = nodes[i + 1] - nodes[i];
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(len / step - 1e-9)));
        builder.segment(nodes[i], nodes[i + 1], n);
    }
    return std::move(builder).finish();
}

inline Trajectory integrate(const EngineParams& p, const InitialState& init, double t_end) {
    return integrate(p, init, t_end, default_step(p));
}

inline Amplitudes evaluate(const Trajectory& traj, double t) { return traj.evaluate(t); }

}  // namespace chiralqed
