#pragma once

// Real-space field amplitude psi(x, t) assembled from the emitter histories.
//
// Each emitter radiates a left-moving wave into x < x_j and a right-moving one
// into x > x_j; the amplitude seen at (x, t) is C_j at the retarded time
// r = t - |x - x_j| / v. Windows in time are strict (r > 0), so the field is
// exactly zero at t = 0 and outside the light cones; spatial windows include
// the emitter position itself.

#include "chiralqed/analytic_series.hpp"
#include "chiralqed/core_model.hpp"
#include "chiralqed/dde_engine.hpp"

#include <cmath>
#include <concepts>
#include <limits>
#include <string>
#include <vector>

namespace chiralqed {

/// Anything that yields (C1, C2) for every t in [0, coverage_end()].
template <class S>
concept AmplitudeSource = requires(const S& s, double t) {
    { s.amplitudes(t) } -> std::convertible_to<Amplitudes>;
    { s.coverage_end() } -> std::convertible_to<double>;
};

/// Exact series evaluation, valid for any non-negative time up to `t_max`.
class SeriesSource {
public:
    SeriesSource(const EngineParams& p, const InitialState& init,
                 double t_max = std::numeric_limits<double>::infinity())
        : p_(p), init_(init), t_max_(t_max) {
        require_nondegenerate(p_);
    }
    Amplitudes amplitudes(double t) const { return series_amplitudes(p_, init_, t); }
    double coverage_end() const { return t_max_; }

private:
    EngineParams p_;
    InitialState init_;
    double t_max_;
};

/// Dense output of a precomputed delay-differential trajectory.
class TrajectorySource {
public:
    explicit TrajectorySource(Trajectory traj) : traj_(std::move(traj)) {}
    Amplitudes amplitudes(double t) const { return traj_.evaluate(t); }
    double coverage_end() const { return traj_.end_time(); }
    const Trajectory& trajectory() const { return traj_; }

private:
    Trajectory traj_;
};

inline constexpr double series_switch_tolerance = 1e-10;

/// Series where its rounding bound stays below `tol`, trajectory afterwards.
/// Degenerate poles use the trajectory throughout.
class HybridSource {
public:
    HybridSource(const EngineParams& p, const InitialState& init, double t_end, double tol = series_switch_tolerance)
        : p_(p), init_(init), traj_(integrate(p, init, t_end)) {
        if (std::abs(p.xi1 - p.xi2) <= degeneracy_tolerance(p)) return;
        // the bound grows with the number of round trips; scan on a quarter-period grid
        const double dt = 0.25 * p.round_trip();
        for (double t = 0.0; t <= t_end; t += dt) {
            try {
                if (series_evaluate(p, init, t).rounding_bound() > tol) break;
            } catch (const Error&) {
                break;
            }
            switch_time_ = t;
            use_series_ = true;
        }
    }

    Amplitudes amplitudes(double t) const {
        if (use_series_ && t >= 0.0 && t <= switch_time_) return series_amplitudes(p_, init_, t);
        return traj_.evaluate(t);
    }
    double coverage_end() const { return traj_.end_time(); }
    /// Times up to this use the series.
    double switch_time() const { return use_series_ ? switch_time_ : -1.0; }

private:
    EngineParams p_;
    InitialState init_;
    Trajectory traj_;
    double switch_time_ = 0.0;
    bool use_series_ = false;
};

/// Geometry, couplings and carrier phases the field needs beyond EngineParams.
struct FieldParams {
    double x1 = 0.0;
    double x2 = 0.0;
    double vL = 1.0;
    double vR = 1.0;
    double omegaE = 0.0;
    double omega0 = 0.0;
    double thetaL = 0.0;
    double thetaR = 0.0;
    double sqrt_gammaL1 = 0.0;
    double sqrt_gammaL2 = 0.0;
    double sqrt_gammaR1 = 0.0;
    double sqrt_gammaR2 = 0.0;
    double phiL1 = 0.0;
    double phiL2 = 0.0;
    double phiR1 = 0.0;
    double phiR2 = 0.0;
};

inline FieldParams make_field_params(const PhysicalConfig& raw) {
    const PhysicalConfig cfg = normalized(raw);
    const EngineParams p = derive_engine_params(cfg);
    FieldParams f;
    f.x1 = cfg.x1();
    f.x2 = cfg.x2();
    f.vL = cfg.vL;
    f.vR = cfg.vR;
    f.omegaE = p.omegaE;
    f.omega0 = cfg.omega0;
    f.thetaL = p.thetaL;
    f.thetaR = p.thetaR;
    f.sqrt_gammaL1 = std::sqrt(cfg.gammaL1);
    f.sqrt_gammaL2 = std::sqrt(cfg.gammaL2);
    f.sqrt_gammaR1 = std::sqrt(cfg.gammaR1);
    f.sqrt_gammaR2 = std::sqrt(cfg.gammaR2);
    f.phiL1 = cfg.phiL1;
    f.phiL2 = cfg.phiL2;
    f.phiR1 = cfg.phiR1;
    f.phiR2 = cfg.phiR2;
    return f;
}

/// The four carrier phases at (x, t).
struct PhaseSet {
    double fL1 = 0.0;
    double fL2 = 0.0;
    double fR1 = 0.0;
    double fR2 = 0.0;
};

inline PhaseSet field_phases(const FieldParams& f, double x, double t) {
    const double left = -f.omegaE * (t + x / f.vL) + f.omega0 * x / f.vL;
    const double right = -f.omegaE * (t - x / f.vR) - f.omega0 * x / f.vR;
    return {left - 0.5 * f.thetaL - f.phiL1, left + 0.5 * f.thetaL - f.phiL2,
            right + 0.5 * f.thetaR - f.phiR1, right - 0.5 * f.thetaR - f.phiR2};
}

/// (omega_e - omega0)(1/vL + 1/vR): wavenumber of the steady fringes.
inline double standing_wave_wavenumber(const FieldParams& f) {
    return (f.omegaE - f.omega0) * (1.0 / f.vL + 1.0 / f.vR);
}

inline double standing_wave_wavenumber(const PhysicalConfig& cfg) {
    return standing_wave_wavenumber(make_field_params(cfg));
}

namespace detail {

template <AmplitudeSource S>
cplx retarded(const S& source, double r, bool first) {
    if (r > source.coverage_end())
        fail(ErrorKind::SourceRangeExceeded, "retarded time " + std::to_string(r) + " beyond source coverage " +
                                                 std::to_string(source.coverage_end()));
    const Amplitudes a = source.amplitudes(r);
    return first ? a.c1 : a.c2;
}

}  // namespace detail

/// Left- and right-moving parts of psi; psi = left + right.
struct FieldChannels {
    cplx left{};
    cplx right{};
};

template <AmplitudeSource S>
FieldChannels field_channels(const FieldParams& f, const S& source, double x, double t) {
    const PhaseSet ph = field_phases(f, x, t);
    cplx left{}, right{};
    if (x <= f.x1 && f.sqrt_gammaL1 > 0.0) {
        const double r = t - (f.x1 - x) / f.vL;
        if (r > 0.0) left += f.sqrt_gammaL1 * std::polar(1.0, ph.fL1) * detail::retarded(source, r, true);
    }
    if (x <= f.x2 && f.sqrt_gammaL2 > 0.0) {
        const double r = t - (f.x2 - x) / f.vL;
        if (r > 0.0) left += f.sqrt_gammaL2 * std::polar(1.0, ph.fL2) * detail::retarded(source, r, false);
    }
    if (x >= f.x1 && f.sqrt_gammaR1 > 0.0) {
        const double r = t - (x - f.x1) / f.vR;
        if (r > 0.0) right += f.sqrt_gammaR1 * std::polar(1.0, ph.fR1) * detail::retarded(source, r, true);
    }
    if (x >= f.x2 && f.sqrt_gammaR2 > 0.0) {
        const double r = t - (x - f.x2) / f.vR;
        if (r > 0.0) right += f.sqrt_gammaR2 * std::polar(1.0, ph.fR2) * detail::retarded(source, r, false);
    }
    // the four-term sum equals i psi
    const cplx minus_i(0.0, -1.0);
    return {minus_i * left, minus_i * right};
}

/// psi(x, t); the overall factor i of the four-term sum is divided out.
template <AmplitudeSource S>
cplx field_amplitude(const FieldParams& f, const S& source, double x, double t) {
    const FieldChannels c = field_channels(f, source, x, t);
    return c.left + c.right;
}

struct FieldMap {
    std::vector<double> xs;
    std::vector<double> ts;
    std::vector<cplx> psi;          // row-major, one row per time
    std::vector<double> intensity;  // |psi|^2, same layout

    cplx psi_at(std::size_t it, std::size_t ix) const { return psi[it * xs.size() + ix]; }
    double intensity_at(std::size_t it, std::size_t ix) const { return intensity[it * xs.size() + ix]; }
};

namespace detail {

inline void require_increasing(const std::vector<double>& v, const char* name) {
    if (v.empty()) fail(ErrorKind::InvalidConfig, std::string(name) + " grid is empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) fail(ErrorKind::InvalidConfig, std::string(name) + " grid has non-finite entries");
        if (i > 0 && !(v[i] > v[i - 1]))
            fail(ErrorKind::InvalidConfig, std::string(name) + " grid must be strictly increasing");
    }
}

}  // namespace detail

/// I(x, t) = |psi(x, t)|^2 on the tensor grid ts x xs.
template <AmplitudeSource S>
FieldMap intensity_map(const FieldParams& f, const S& source, std::vector<double> xs, std::vector<double> ts) {
    detail::require_increasing(xs, "x");
    detail::require_increasing(ts, "t");
    if (ts.front() < 0.0) fail(ErrorKind::InvalidConfig, "t grid must be non-negative");
    FieldMap map;
    map.xs = std::move(xs);
    map.ts = std::move(ts);
    map.psi.resize(map.xs.size() * map.ts.size());
    map.intensity.resize(map.psi.size());
    for (std::size_t it = 0; it < map.ts.size(); ++it) {
        for (std::size_t ix = 0; ix < map.xs.size(); ++ix) {
            const cplx v = field_amplitude(f, source, map.xs[ix], map.ts[it]);
            map.psi[it * map.xs.size() + ix] = v;
            map.intensity[it * map.xs.size() + ix] = std::norm(v);
        }
    }
    return map;
}

inline constexpr std::size_t default_x_points = 1024;
inline constexpr double default_x_extent = 4.0;

/// 1024 points spanning [-4d, 4d].
inline std::vector<double> default_x_grid(double d, std::size_t points = default_x_points) {
    if (!(d > 0) || points < 2) fail(ErrorKind::InvalidConfig, "x grid needs d > 0 and at least two points");
    std::vector<double> xs(points);
    const double lo = -default_x_extent * d;
    const double step = 2.0 * default_x_extent * d / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) xs[i] = lo + step * static_cast<double>(i);
    xs.back() = default_x_extent * d;
    return xs;
}

/// Uniform grid of `points` values on [a, b].
inline std::vector<double> linear_grid(double a, double b, std::size_t points) {
    if (points == 0) fail(ErrorKind::InvalidConfig, "grid needs at least one point");
    if (points == 1) return {a};
    if (!(b > a)) fail(ErrorKind::InvalidConfig, "grid bounds must be increasing");
    std::vector<double> v(points);
    const double step = (b - a) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) v[i] = a + step * static_cast<double>(i);
    v.back() = b;
    return v;
}

}  // namespace chiralqed
