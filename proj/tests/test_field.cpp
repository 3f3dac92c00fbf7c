#include "chiralqed/field.hpp"
#include "chiralqed/mode_oracle.hpp"
#include "chiralqed/presets.hpp"
#include "support/oracles.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numbers>
#include <random>

using namespace chiralqed;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::InvalidConfig;
}

// inside the union of the light cones from (x1, 0) and (x2, 0)
bool inside_cones(const PhysicalConfig& c, double x, double t) {
    auto in = [&](double xj) { return (x <= xj && xj - x < c.vL * t) || (x >= xj && x - xj < c.vR * t); };
    return (in(c.x1()) && (c.gammaL1 > 0 || c.gammaR1 > 0)) || (in(c.x2()) && (c.gammaL2 > 0 || c.gammaR2 > 0));
}

// photon probability carried by the field: sum over channels of int |psi_alpha|^2 / v_alpha dx
template <class S>
double field_probability(const FieldParams& f, const S& src, double t, double lo, double hi, std::size_t n) {
    const double h = (hi - lo) / static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = lo + (static_cast<double>(i) + 0.5) * h;
        const FieldChannels c = field_channels(f, src, x, t);
        acc += std::norm(c.left) / f.vL + std::norm(c.right) / f.vR;
    }
    return acc * h;
}

}  // namespace

TEST_CASE("vacuum start and causal fronts on the grid") {
    std::mt19937_64 rng(29);
    for (int k = 0; k < 10; ++k) {
        const PhysicalConfig c = oracle::random_config(rng);
        const EngineParams p = derive_engine_params(c);
        const InitialState init = oracle::random_initial(rng);
        const FieldParams f = make_field_params(c);
        const TrajectorySource src(integrate(p, init, 4.0));
        const FieldMap map = intensity_map(f, src, default_x_grid(c.d, 257), linear_grid(0.0, 4.0, 41));
        for (std::size_t ix = 0; ix < map.xs.size(); ++ix) CHECK(map.psi_at(0, ix) == cplx{});
        for (std::size_t it = 0; it < map.ts.size(); ++it)
            for (std::size_t ix = 0; ix < map.xs.size(); ++ix)
                if (!inside_cones(c, map.xs[ix], map.ts[it])) CHECK(map.intensity_at(it, ix) == 0.0);
    }
    const PhysicalConfig c = revival_config();
    const EngineParams p = derive_engine_params(c);
    const SeriesSource src(p, caption_initial_state(p.gamma1, p.gamma2));
    const FieldParams f = make_field_params(c);
    // just beyond the right emitter before its right-moving front arrives
    CHECK(field_amplitude(f, src, c.d, 0.99 * (c.d - c.x2()) / c.vR) == cplx{});
    CHECK(std::abs(field_amplitude(f, src, c.d, 1.01 * (c.d - c.x2()) / c.vR)) > 0.0);
}

TEST_CASE("uncoupled emitters radiate nothing") {
    PhysicalConfig c = revival_config();
    c.gammaL1 = c.gammaR1 = c.gammaL2 = c.gammaR2 = 0.0;
    const FieldParams f = make_field_params(c);
    const TrajectorySource src(integrate(derive_engine_params(c), InitialState{}, 5.0));
    const FieldMap map = intensity_map(f, src, default_x_grid(c.d, 128), linear_grid(0.0, 5.0, 11));
    CHECK(std::all_of(map.intensity.begin(), map.intensity.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("a single radiating channel carries the retarded emitter population") {
    PhysicalConfig c = revival_config();
    c.gammaR1 = 0.0;
    c.gammaL2 = c.gammaR2 = 0.0;
    const EngineParams p = derive_engine_params(c);
    const InitialState init{1.0, 0.0};
    const SeriesSource src(p, init);
    const FieldParams f = make_field_params(c);
    const double t = 3.0;
    for (double x = c.x1() - c.vL * t + 0.01; x <= c.x1(); x += 0.05) {
        const double r = t - (c.x1() - x) / c.vL;
        CHECK_THAT(std::norm(field_amplitude(f, src, x, t)), WithinRel(c.gammaL1 * std::exp(-c.gammaL1 * r), 1e-12));
    }
    CHECK(field_amplitude(f, src, c.x1() + 0.1, t) == cplx{});
}

TEST_CASE("carrier phases") {
    FieldParams f;
    f.omegaE = 500.0;
    f.omega0 = 100.0;
    f.vL = 0.9;
    f.vR = 0.8;
    f.thetaL = 1.0;
    f.thetaR = 2.0;
    f.phiL1 = 0.3;
    f.phiL2 = -0.4;
    f.phiR1 = 0.1;
    f.phiR2 = 0.7;
    const PhaseSet a = field_phases(f, 0.25, 1.5);
    CHECK_THAT(a.fL2 - a.fL1, WithinAbs(f.thetaL + f.phiL1 - f.phiL2, 1e-12));
    CHECK_THAT(a.fR1 - a.fR2, WithinAbs(f.thetaR + f.phiR2 - f.phiR1, 1e-12));
    // left movers advance as x + vL t, right movers as x - vR t
    const PhaseSet b = field_phases(f, 0.25 - f.vL * 0.1, 1.6);
    const PhaseSet c = field_phases(f, 0.25 + f.vR * 0.1, 1.6);
    CHECK_THAT(b.fL1 - a.fL1, WithinAbs(-f.omega0 * f.vL * 0.1 / f.vL, 1e-9));
    CHECK_THAT(c.fR1 - a.fR1, WithinAbs(-f.omega0 * f.vR * 0.1 / f.vR, 1e-9));
}

TEST_CASE("standing-wave wavenumber") {
    FieldParams f;
    f.omegaE = f.omega0 = 300.0;
    CHECK(standing_wave_wavenumber(f) == 0.0);
    const PhysicalConfig c = bic_config();
    CHECK_THAT(standing_wave_wavenumber(c), WithinRel(500.0 * (1.0 / 0.950 + 1.0 / 0.785), 1e-15));
}

TEST_CASE("cascaded emitters: the left-moving wavefront matches the mode oracle") {
    PhysicalConfig c = revival_config();
    c.gammaL2 = 0.0;
    c.gammaR2 = 1.0;
    const EngineParams p = derive_engine_params(c);
    REQUIRE(p.beta1 == 0.0);
    const InitialState init = caption_initial_state(p.gamma1, p.gamma2);
    const double t = 6.0;
    const ModeGrid g = default_grid(c, t);
    const std::vector<double> snap = {t};
    const OracleRun run = integrate_full(g, init, t, default_oracle_step(g, t), snap);
    const SeriesSource src(p, init);
    const FieldParams f = make_field_params(c);
    double worst = 0.0;
    // away from the front and from the emitter, where the truncated mode sum rings
    for (double x = c.x1() - c.vL * t + 0.3; x < c.x1() - 0.3; x += 0.01)
        worst = std::max(worst, std::abs(std::norm(oracle_field(run.snapshots[0], g, x)) -
                                         std::norm(field_amplitude(f, src, x, t))));
    INFO("worst " << worst);
    CHECK(worst < 5e-3);
}

TEST_CASE("coarse-grained intensity matches the mode oracle on the revival configuration") {
    const PhysicalConfig c = revival_config();
    const EngineParams p = derive_engine_params(c);
    const InitialState init = caption_initial_state(p.gamma1, p.gamma2);
    const double t = 10.0;
    const ModeGrid g = default_grid(c, t);
    const std::vector<double> snap = {t};
    const OracleRun run = integrate_full(g, init, t, default_oracle_step(g, t), snap);
    const HybridSource src(p, init, t);
    const FieldParams f = make_field_params(c);
    const double cell = 0.25;
    const int sub = 100;
    double worst = 0.0;
    for (double a = -4.0 * c.d; a < 4.0 * c.d - 1e-9; a += cell) {
        double io = 0.0, ir = 0.0;
        for (int k = 0; k < sub; ++k) {
            const double x = a + (k + 0.5) * cell / sub;
            io += std::norm(oracle_field(run.snapshots[0], g, x));
            ir += std::norm(field_amplitude(f, src, x, t));
        }
        worst = std::max(worst, std::abs(io - ir) / sub);
    }
    INFO("worst " << worst);
    CHECK(worst < 5e-3);
}

TEST_CASE("radiation between decaying emitters dies out") {
    const PhysicalConfig c = revival_config();
    const EngineParams p = derive_engine_params(c);
    const InitialState init = caption_initial_state(p.gamma1, p.gamma2);
    const TrajectorySource src(integrate(p, init, 200.0));
    const FieldParams f = make_field_params(c);
    auto peak = [&](double t) {
        double m = 0.0;
        for (double x : linear_grid(c.x1(), c.x2(), 401)) m = std::max(m, std::norm(field_amplitude(f, src, x, t)));
        return m;
    };
    const double early = peak(10.0), mid = peak(100.0), late = peak(200.0);
    INFO(early << " " << mid << " " << late);
    CHECK(mid < 1e-3 * early);
    CHECK(late < mid);
}

TEST_CASE("bound-state field settles to a stationary profile") {
    const PhysicalConfig c = bic_config();
    const EngineParams p = derive_engine_params(c);
    const TrajectorySource src(integrate(p, caption_initial_state(p.gamma1, p.gamma2), 200.0));
    const FieldParams f = make_field_params(c);
    const std::vector<double> xs = linear_grid(c.x1(), c.x2(), 4096);
    double worst = 0.0, peak = 0.0;
    for (double x : xs) {
        const double ref = std::norm(field_amplitude(f, src, x, 200.0));
        peak = std::max(peak, ref);
        for (double t : {150.0, 170.0, 190.0}) worst = std::max(worst, std::abs(std::norm(field_amplitude(f, src, x, t)) - ref));
    }
    CHECK(peak > 1e-3);
    CHECK(worst < 1e-4);
}

TEST_CASE("emitter population plus radiated probability is conserved") {
    for (const PhysicalConfig& c : {revival_config(), bic_config()}) {
        const EngineParams p = derive_engine_params(c);
        const InitialState init = caption_initial_state(p.gamma1, p.gamma2);
        const TrajectorySource src(integrate(p, init, 40.0));
        const FieldParams f = make_field_params(c);
        for (double t : {3.0, 10.0, 40.0}) {
            const double lo = c.x1() - c.vL * t - 0.1, hi = c.x2() + c.vR * t + 0.1;
            const double total =
                src.amplitudes(t).population() + field_probability(f, src, t, lo, hi, static_cast<std::size_t>((hi - lo) / 2e-3));
            INFO("t " << t << " total " << total);
            CHECK_THAT(total, WithinAbs(1.0, 1e-3));
        }
    }
}

TEST_CASE("field evaluation outside the source coverage is refused") {
    const PhysicalConfig c = revival_config();
    const EngineParams p = derive_engine_params(c);
    const TrajectorySource src(integrate(p, InitialState{}, 5.0));
    const FieldParams f = make_field_params(c);
    CHECK(kind_of([&] { field_amplitude(f, src, c.x1(), 6.0); }) == ErrorKind::SourceRangeExceeded);
    CHECK_NOTHROW(field_amplitude(f, src, c.x1() - 2.0, 6.0));
}

TEST_CASE("grid validation") {
    const PhysicalConfig c = revival_config();
    const EngineParams p = derive_engine_params(c);
    const SeriesSource src(p, caption_initial_state(p.gamma1, p.gamma2));
    const FieldParams f = make_field_params(c);
    CHECK(kind_of([&] { intensity_map(f, src, {}, {1.0}); }) == ErrorKind::InvalidConfig);
    CHECK(kind_of([&] { intensity_map(f, src, {0.0, 0.0}, {1.0}); }) == ErrorKind::InvalidConfig);
    CHECK(kind_of([&] { intensity_map(f, src, {0.0, 1.0}, {2.0, 1.0}); }) == ErrorKind::InvalidConfig);
    CHECK(kind_of([&] { intensity_map(f, src, {0.0, 1.0}, {-1.0}); }) == ErrorKind::InvalidConfig);
    const std::vector<double> xs = default_x_grid(c.d);
    CHECK(xs.size() == 1024);
    CHECK(xs.front() == -4.0 * c.d);
    CHECK(xs.back() == 4.0 * c.d);
}

TEST_CASE("map values do not depend on evaluation order") {
    const PhysicalConfig c = revival_config();
    const EngineParams p = derive_engine_params(c);
    const HybridSource src(p, caption_initial_state(p.gamma1, p.gamma2), 10.0);
    const FieldParams f = make_field_params(c);
    const std::vector<double> xs = default_x_grid(c.d, 200);
    const std::vector<double> ts = linear_grid(0.0, 10.0, 21);
    const FieldMap map = intensity_map(f, src, xs, ts);
    std::mt19937_64 rng(31);
    for (int k = 0; k < 500; ++k) {
        const std::size_t it = rng() % ts.size(), ix = rng() % xs.size();
        CHECK(field_amplitude(f, src, xs[ix], ts[it]) == map.psi_at(it, ix));
    }
}
