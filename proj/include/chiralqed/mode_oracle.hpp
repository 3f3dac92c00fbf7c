#pragma once

// Brute-force reference: the waveguide continuum replaced by a finite comb of
// left- and right-moving modes, integrated together with both emitters in the
// single-excitation sector.
//
// Mode wavenumbers are stored as offsets q from the resonant wavenumber of each
// direction, so after moving to the frame rotating at omega_e a right mover has
// energy vR q and a left mover -vL q. The resonant carriers exp(i k_res x)
// reappear only when the real-space field is assembled. The coupling phases
// reduce to exp(i thetaR x_j / d) and exp(-i thetaL x_j / d), which keeps the
// oracle consistent with directly specified propagation phases.
//
// Time stepping uses the (2,2) Pade approximant of exp(-i H dt), i.e. the
// two-stage Gauss-Legendre collocation method. It is fourth order and exactly
// unitary; each stage is a shifted solve of an arrowhead matrix done through
// the 2x2 emitter Schur complement.

#include "chiralqed/core_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace chiralqed {

inline constexpr double bandwidth_rule = 50.0;
inline constexpr double recurrence_margin = 3.0;
inline constexpr double default_bandwidth_factor = 100.0;
inline constexpr double max_phase_per_step = 0.1;

struct ModeGrid {
    double K = 0.0;
    double dk = 0.0;
    std::size_t modes_per_direction = 0;
    std::vector<double> q;  // shared offsets, symmetric about 0
    double vL = 1.0;
    double vR = 1.0;
    double x1 = 0.0;
    double x2 = 0.0;
    // g_alpha_j times the propagation-phase factor at x_j
    std::array<cplx, 2> gL{};
    std::array<cplx, 2> gR{};
    // emitter energies in the simulation frame
    std::array<double, 2> emitter_energy{};
    // rotating frame = omega_e + frame_shift
    double frame_shift = 0.0;
    // physical resonant wavenumbers (field carriers)
    double kL_res = 0.0;
    double kR_res = 0.0;
    double horizon = 0.0;

    std::size_t mode_count() const { return 2 * modes_per_direction; }
    double max_energy() const {
        return std::max(vL, vR) * K + std::abs(frame_shift) +
               std::max(std::abs(emitter_energy[0]), std::abs(emitter_energy[1]));
    }
    double box_half_width() const { return std::numbers::pi / dk; }
    double recurrence_time() const { return two_pi / (std::max(vL, vR) * dk); }
};

struct ModeState {
    Amplitudes emitters;     // frame rotating at omega_e, directly comparable to C_j
    std::vector<cplx> cL;    // amplitude densities c_L(q)
    std::vector<cplx> cR;
    double time = 0.0;

    double norm(double dk) const {
        double s = emitters.population();
        for (const cplx& c : cL) s += std::norm(c) * dk;
        for (const cplx& c : cR) s += std::norm(c) * dk;
        return s;
    }
};

inline ModeGrid build_grid(const PhysicalConfig& raw, double K, double dk, double horizon, double frame_shift = 0.0) {
    const PhysicalConfig cfg = normalized(raw);
    if (!(K > 0) || !(dk > 0) || !(horizon > 0)) fail(ErrorKind::InvalidConfig, "K, dk and horizon must be positive");
    const EngineParams p = derive_engine_params(cfg);
    const double vmin = std::min(cfg.vL, cfg.vR);
    const double vmax = std::max(cfg.vL, cfg.vR);
    const double gmax = std::max(p.gamma1, p.gamma2);
    if (K * vmin < bandwidth_rule * gmax)
        fail(ErrorKind::BandwidthTooSmall, "K vmin = " + std::to_string(K * vmin) + " < 50 max(gamma)");

    ModeGrid g;
    const auto half = static_cast<std::size_t>(std::ceil(K / dk - 1e-9));
    g.K = K;
    g.dk = K / static_cast<double>(half);
    g.modes_per_direction = 2 * half + 1;
    if (g.recurrence_time() <= recurrence_margin * horizon)
        fail(ErrorKind::RecurrenceTooShort, "recurrence time " + std::to_string(two_pi / (vmax * g.dk)) +
                                                " <= 3 x horizon");
    g.q.resize(g.modes_per_direction);
    for (std::size_t n = 0; n < g.modes_per_direction; ++n)
        g.q[n] = (static_cast<double>(n) - static_cast<double>(half)) * g.dk;
    g.vL = cfg.vL;
    g.vR = cfg.vR;
    g.x1 = cfg.x1();
    g.x2 = cfg.x2();
    g.horizon = horizon;
    g.frame_shift = frame_shift;
    const double xs[2] = {g.x1, g.x2};
    const double gammaL[2] = {cfg.gammaL1, cfg.gammaL2};
    const double gammaR[2] = {cfg.gammaR1, cfg.gammaR2};
    const double phiL[2] = {cfg.phiL1, cfg.phiL2};
    const double phiR[2] = {cfg.phiR1, cfg.phiR2};
    for (int j = 0; j < 2; ++j) {
        g.gL[j] = std::polar(coupling_from_rate(gammaL[j], cfg.vL), phiL[j] - p.thetaL * xs[j] / cfg.d);
        g.gR[j] = std::polar(coupling_from_rate(gammaR[j], cfg.vR), phiR[j] + p.thetaR * xs[j] / cfg.d);
    }
    g.emitter_energy = {cfg.omega1 - p.omegaE - frame_shift, cfg.omega2 - p.omegaE - frame_shift};
    g.kR_res = (p.omegaE - cfg.omega0) / cfg.vR;
    g.kL_res = (cfg.omega0 - p.omegaE) / cfg.vL;
    return g;
}

/// K = 100 max(gamma)/vmin and dk leaving a 4x recurrence margin over the horizon.
inline ModeGrid default_grid(const PhysicalConfig& cfg, double horizon, double frame_shift = 0.0) {
    validate(cfg);
    const double gref = std::max({cfg.gamma1(), cfg.gamma2(), 1e-3});
    const double K = default_bandwidth_factor * gref / std::min(cfg.vL, cfg.vR);
    const double dk = two_pi / (4.0 * std::max(cfg.vL, cfg.vR) * horizon);
    return build_grid(cfg, K, dk, horizon, frame_shift);
}

/// Largest step allowed on a grid, with t_end an integer multiple of it.
inline double default_oracle_step(const ModeGrid& g, double t_end) {
    const double dt_max = 0.8 * max_phase_per_step / g.max_energy();
    const double n = std::ceil(t_end / dt_max);
    return t_end / n;
}

struct OracleRun {
    std::vector<double> times;
    std::vector<Amplitudes> emitters;
    std::vector<ModeState> snapshots;
    double max_norm_drift = 0.0;
};

namespace detail {

// One Pade stage (z + r)/(z - r) with z = -i dt H, for fixed dt. With
// x = (H - sigma)^-1 i y / dt the stage maps each mode to
//   y_m <- diag_m y_m - b1_m x1 - b2_m x2,
// where (x1, x2) comes from the 2x2 emitter Schur complement.
struct PadeStage {
    cplx two_r{};
    // split real/imaginary parts, one entry per coupled mode
    std::vector<double> diag_re, diag_im;
    std::array<std::vector<double>, 2> b_re, b_im;  // 2 r conj(G_jm) / (Omega_m - sigma)
    std::array<std::vector<double>, 2> w_re, w_im;  // G_jm / (Omega_m - sigma)
    std::array<std::array<cplx, 2>, 2> s_inv{};
};

class ArrowheadPropagator {
public:
    // Modes with zero coupling to both emitters stay in vacuum and are dropped.
    ArrowheadPropagator(const ModeGrid& g, double dt) : dt_(dt) {
        const std::size_t N = g.modes_per_direction;
        const double sq = std::sqrt(g.dk);
        const double xs[2] = {g.x1, g.x2};
        for (std::size_t m = 0; m < 2 * N; ++m) {
            const bool left = m < N;
            const std::size_t n = left ? m : m - N;
            const std::array<cplx, 2>& gd = left ? g.gL : g.gR;
            if (gd[0] == 0.0 && gd[1] == 0.0) continue;
            index_.push_back(m);
            energy_.push_back(left ? -g.vL * g.q[n] - g.frame_shift : g.vR * g.q[n] - g.frame_shift);
            for (int j = 0; j < 2; ++j) G_[j].push_back(gd[j] * std::polar(sq, g.q[n] * xs[j]));
        }
        emitter_energy_ = g.emitter_energy;
        const double root3 = std::sqrt(3.0);
        stages_[0] = make_stage(cplx(3.0, root3));
        stages_[1] = make_stage(cplx(3.0, -root3));
        const std::size_t M = index_.size();
        y_re_.assign(M, 0.0);
        y_im_.assign(M, 0.0);
    }

    const std::vector<std::size_t>& mode_index() const { return index_; }

    void step(cplx& e1, cplx& e2) {
        // the accumulation for stage 0 was fused into the previous step
        if (!primed_) {
            acc_ = accumulate(stages_[0]);
            primed_ = true;
        }
        acc_ = apply(stages_[0], stages_[1], e1, e2, acc_);
        acc_ = apply(stages_[1], stages_[0], e1, e2, acc_);
    }

    cplx mode(std::size_t k) const { return {y_re_[k], y_im_[k]}; }

    double mode_norm() const {
        double s = 0.0;
        for (std::size_t k = 0; k < y_re_.size(); ++k) s += y_re_[k] * y_re_[k] + y_im_[k] * y_im_[k];
        return s;
    }

private:
    PadeStage make_stage(cplx r) const {
        PadeStage st;
        st.two_r = 2.0 * r;
        const cplx sigma = cplx(0.0, 1.0) * r / dt_;
        const cplx scale = cplx(0.0, 1.0) / dt_;
        const std::size_t M = energy_.size();
        st.diag_re.resize(M);
        st.diag_im.resize(M);
        for (int j = 0; j < 2; ++j) {
            st.b_re[j].resize(M);
            st.b_im[j].resize(M);
            st.w_re[j].resize(M);
            st.w_im[j].resize(M);
        }
        std::array<std::array<cplx, 2>, 2> S{};
        S[0][0] = emitter_energy_[0] - sigma;
        S[1][1] = emitter_energy_[1] - sigma;
        for (std::size_t m = 0; m < M; ++m) {
            const cplx inv = 1.0 / (energy_[m] - sigma);
            const cplx diag = 1.0 + st.two_r * scale * inv;
            st.diag_re[m] = diag.real();
            st.diag_im[m] = diag.imag();
            for (int j = 0; j < 2; ++j) {
                const cplx w = G_[j][m] * inv;
                const cplx b = st.two_r * inv * std::conj(G_[j][m]);
                st.w_re[j][m] = w.real();
                st.w_im[j][m] = w.imag();
                st.b_re[j][m] = b.real();
                st.b_im[j][m] = b.imag();
                for (int k = 0; k < 2; ++k) S[j][k] -= w * std::conj(G_[k][m]);
            }
        }
        const cplx det = S[0][0] * S[1][1] - S[0][1] * S[1][0];
        st.s_inv = {{{S[1][1] / det, -S[0][1] / det}, {-S[1][0] / det, S[0][0] / det}}};
        return st;
    }

    std::array<cplx, 2> accumulate(const PadeStage& st) const {
        double a[4] = {0, 0, 0, 0};
        for (std::size_t m = 0; m < y_re_.size(); ++m) {
            const double yr = y_re_[m], yi = y_im_[m];
            a[0] += st.w_re[0][m] * yr - st.w_im[0][m] * yi;
            a[1] += st.w_re[0][m] * yi + st.w_im[0][m] * yr;
            a[2] += st.w_re[1][m] * yr - st.w_im[1][m] * yi;
            a[3] += st.w_re[1][m] * yi + st.w_im[1][m] * yr;
        }
        return {cplx(a[0], a[1]), cplx(a[2], a[3])};
    }

    // Apply `st` given its accumulated sums and return the sums needed by `next`.
    std::array<cplx, 2> apply(const PadeStage& st, const PadeStage& next, cplx& e1, cplx& e2,
                              const std::array<cplx, 2>& acc) {
        const cplx scale = cplx(0.0, 1.0) / dt_;
        const cplx rhs1 = scale * (e1 - acc[0]);
        const cplx rhs2 = scale * (e2 - acc[1]);
        const cplx x1 = st.s_inv[0][0] * rhs1 + st.s_inv[0][1] * rhs2;
        const cplx x2 = st.s_inv[1][0] * rhs1 + st.s_inv[1][1] * rhs2;
        e1 += st.two_r * x1;
        e2 += st.two_r * x2;
        const double x1r = x1.real(), x1i = x1.imag(), x2r = x2.real(), x2i = x2.imag();
        const double* dr = st.diag_re.data();
        const double* di = st.diag_im.data();
        const double* b1r = st.b_re[0].data();
        const double* b1i = st.b_im[0].data();
        const double* b2r = st.b_re[1].data();
        const double* b2i = st.b_im[1].data();
        const double* w1r = next.w_re[0].data();
        const double* w1i = next.w_im[0].data();
        const double* w2r = next.w_re[1].data();
        const double* w2i = next.w_im[1].data();
        double* yr = y_re_.data();
        double* yi = y_im_.data();
        // two interleaved partial sums per component keep the loop vectorizable
        double a[8] = {0, 0, 0, 0, 0, 0, 0, 0};
        const std::size_t M = y_re_.size();
        const std::size_t M2 = M - M % 2;
        auto body = [&](std::size_t m, double* acc) {
            const double ur = dr[m] * yr[m] - di[m] * yi[m] - (b1r[m] * x1r - b1i[m] * x1i) - (b2r[m] * x2r - b2i[m] * x2i);
            const double ui = dr[m] * yi[m] + di[m] * yr[m] - (b1r[m] * x1i + b1i[m] * x1r) - (b2r[m] * x2i + b2i[m] * x2r);
            yr[m] = ur;
            yi[m] = ui;
            acc[0] += w1r[m] * ur - w1i[m] * ui;
            acc[2] += w1r[m] * ui + w1i[m] * ur;
            acc[4] += w2r[m] * ur - w2i[m] * ui;
            acc[6] += w2r[m] * ui + w2i[m] * ur;
        };
        for (std::size_t m = 0; m < M2; m += 2) {
            body(m, a);
            body(m + 1, a + 1);
        }
        if (M2 < M) body(M2, a);
        a[0] += a[1];
        a[1] = a[2] + a[3];
        a[2] = a[4] + a[5];
        a[3] = a[6] + a[7];
        return {cplx(a[0], a[1]), cplx(a[2], a[3])};
    }

    double dt_;
    std::vector<std::size_t> index_;  // position in the full [left | right] mode list
    std::vector<double> energy_;
    std::array<std::vector<cplx>, 2> G_;
    std::array<double, 2> emitter_energy_{};
    std::array<PadeStage, 2> stages_;
    std::vector<double> y_re_, y_im_;  // sqrt(dk) times the mode density
    std::array<cplx, 2> acc_{};
    bool primed_ = false;
};

}  // namespace detail

/// Full single-excitation evolution. Emitter amplitudes are recorded every step;
/// complete mode states at the steps nearest to `snapshot_times`.
inline OracleRun integrate_full(const ModeGrid& g, const InitialState& init, double t_end, double dt,
                                std::span<const double> snapshot_times = {}) {
    if (!(t_end > 0) || !(dt > 0)) fail(ErrorKind::InvalidConfig, "t_end and dt must be positive");
    if (dt * g.max_energy() >= max_phase_per_step)
        fail(ErrorKind::StepTooLarge, "dt * max energy = " + std::to_string(dt * g.max_energy()) + " >= 0.1");
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    const double h = t_end / static_cast<double>(steps);
    const std::size_t N = g.modes_per_direction;

    detail::ArrowheadPropagator prop(g, h);
    // simulation-frame emitter amplitudes; the propagator holds the modes
    cplx e1 = init.c1, e2 = init.c2;
    const double norm0 = init.amplitudes().population();

    std::vector<std::size_t> snap_steps;
    for (double ts : snapshot_times) {
        if (ts < 0 || ts > t_end * (1 + 1e-12)) fail(ErrorKind::OutOfRange, "snapshot time outside [0, t_end]");
        snap_steps.push_back(static_cast<std::size_t>(std::llround(ts / h)));
    }

    OracleRun run;
    run.times.reserve(steps + 1);
    run.emitters.reserve(steps + 1);
    const double inv_sq = 1.0 / std::sqrt(g.dk);
    const auto& index = prop.mode_index();
    auto record = [&](std::size_t k) {
        const double t = static_cast<double>(k) * h;
        const cplx back = std::polar(1.0, -g.frame_shift * t);  // to the omega_e frame
        run.times.push_back(t);
        run.emitters.push_back({back * e1, back * e2});
        const double norm = std::norm(e1) + std::norm(e2) + prop.mode_norm();
        if (!std::isfinite(norm)) fail(ErrorKind::NonFiniteValue, "oracle state not finite at t = " + std::to_string(t));
        run.max_norm_drift = std::max(run.max_norm_drift, std::abs(norm - norm0));
        for (std::size_t s = 0; s < snap_steps.size(); ++s) {
            if (snap_steps[s] != k) continue;
            ModeState st;
            st.time = t;
            st.emitters = run.emitters.back();
            st.cL.assign(N, cplx{});
            st.cR.assign(N, cplx{});
            for (std::size_t a = 0; a < index.size(); ++a) {
                const cplx v = back * prop.mode(a) * inv_sq;
                if (index[a] < N)
                    st.cL[index[a]] = v;
                else
                    st.cR[index[a] - N] = v;
            }
            run.snapshots.push_back(std::move(st));
        }
    };
    record(0);
    for (std::size_t k = 1; k <= steps; ++k) {
        prop.step(e1, e2);
        record(k);
    }
    return run;
}

/// psi(x) = sum_alpha sqrt(v_alpha / 2 pi) sum_k exp(i k x) c_alpha(k) dk.
inline cplx oracle_field(const ModeState& state, const ModeGrid& g, double x) {
    if (!(std::abs(x) < g.box_half_width()))
        fail(ErrorKind::OutOfBox, "|x| = " + std::to_string(std::abs(x)) + " outside the mode box");
    cplx sumL{}, sumR{};
    const cplx step = std::polar(1.0, g.dk * x);
    cplx ph = std::polar(1.0, g.q.front() * x);
    // incremental phase; renormalized periodically against drift
    for (std::size_t n = 0; n < g.modes_per_direction; ++n) {
        if (n % 256 == 0) ph = std::polar(1.0, g.q[n] * x);
        sumL += ph * state.cL[n];
        sumR += ph * state.cR[n];
        ph *= step;
    }
    return (std::sqrt(g.vL / two_pi) * std::polar(1.0, g.kL_res * x) * sumL +
            std::sqrt(g.vR / two_pi) * std::polar(1.0, g.kR_res * x) * sumR) *
           g.dk;
}

}  // namespace chiralqed
