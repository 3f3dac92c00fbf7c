#pragma once

// Parameter sets of the published population and photon-density figures.
// Rates in units of gamma2, speeds in units of c, omega0 = 0, omega_e = 500.
// Integer multiples of pi in the captions are resolved to phases mod 2pi.

#include "chiralqed/core_model.hpp"

#include <array>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace chiralqed {

enum class FigureKind { Populations, IntensityMap, IntensityProfile };

struct FigureSeries {
    std::string label;
    PhysicalConfig config;
};

struct FigurePreset {
    std::string tag;
    FigureKind kind = FigureKind::Populations;
    std::vector<FigureSeries> series;
    double t_end = 10.0;
    // profile snapshot time for IntensityProfile
    double profile_time = 0.0;
};

inline constexpr double caption_omega_e = 500.0;
inline constexpr double caption_distance_ratio = 1.0526;

namespace detail {

inline constexpr double pi = std::numbers::pi;

// gamma_j = gamma_Lj: both emitters radiate into left movers only.
inline PhysicalConfig left_only_config(double vL, double vR, double d_over_L2L, double phiL) {
    PhysicalConfig c;
    c.omega1 = c.omega2 = caption_omega_e;
    c.gammaL1 = 1.5;
    c.gammaL2 = 1.0;
    c.vL = vL;
    c.vR = vR;
    c.d = d_over_L2L * characteristic_length(vL, c.gammaL2);
    c.phiL1 = phiL;
    c.thetaL = 1.5 * pi;
    c.thetaR = 0.5 * pi;
    return c;
}

// gamma1 = 3 gamma2 / 2 split evenly between the two directions, d = 1.0526 L_2L.
inline PhysicalConfig symmetric_config(double vR, double thetaR, double phiL) {
    PhysicalConfig c;
    c.omega1 = c.omega2 = caption_omega_e;
    c.gammaL1 = c.gammaR1 = 0.75;
    c.gammaL2 = c.gammaR2 = 0.5;
    c.vL = 0.950;
    c.vR = vR;
    c.d = caption_distance_ratio * characteristic_length(c.vL, c.gammaL2);
    c.phiL1 = phiL;
    c.thetaL = 1.5 * pi;
    c.thetaR = thetaR;
    return c;
}

}  // namespace detail

/// Enhanced decay of both emitters.
inline PhysicalConfig enhanced_config() { return detail::symmetric_config(0.774, 0.5 * detail::pi, detail::pi); }
/// Bound-state (dark-state trapping) configuration.
inline PhysicalConfig bic_config() { return detail::symmetric_config(0.785, 0.5 * detail::pi, 0.0); }
/// One emitter accelerated, the other slowed, with a revival.
inline PhysicalConfig revival_config() { return detail::symmetric_config(0.774, 1.5 * detail::pi, 0.0); }

inline const std::array<std::string_view, 12>& figure_tags() {
    static const std::array<std::string_view, 12> tags = {"fig1a", "fig1b", "fig1c", "fig1d", "fig2a", "fig2b",
                                                          "fig2c", "fig2d", "fig3a", "fig3b", "fig3c", "fig3d"};
    return tags;
}

inline FigurePreset figure_preset(std::string_view tag) {
    using detail::pi;
    FigurePreset f;
    f.tag = std::string(tag);
    auto fig1 = [&](double vL, double vR, double ratio) {
        f.kind = FigureKind::Populations;
        f.series = {{"phiL_2pi", detail::left_only_config(vL, vR, ratio, 2 * pi)},
                    {"phiL_pi", detail::left_only_config(vL, vR, ratio, pi)}};
        f.t_end = 10.0;
    };
    if (tag == "fig1a") {
        fig1(0.909, 0.740, 0.1);
    } else if (tag == "fig1b") {
        fig1(0.950, 0.789, caption_distance_ratio);
    } else if (tag == "fig1c") {
        fig1(0.950, 0.789, 2.0);
    } else if (tag == "fig1d") {
        fig1(0.953, 0.795, 10.0);
        f.t_end = 40.0;
    } else if (tag == "fig2a") {
        f.series = {{"revival", revival_config()}};
    } else if (tag == "fig2b") {
        f.series = {{"enhanced", enhanced_config()}};
    } else if (tag == "fig2c") {
        f.series = {{"inhibited", bic_config()}};
    } else if (tag == "fig2d") {
        f.series = {{"trapped", bic_config()}};
        f.t_end = 200.0;
    } else if (tag == "fig3a" || tag == "fig3b") {
        f.series = {{"decaying", revival_config()}};
    } else if (tag == "fig3c" || tag == "fig3d") {
        f.series = {{"bound", bic_config()}};
    } else {
        fail(ErrorKind::UnknownTag, "unknown figure tag '" + std::string(tag) + "'");
    }
    if (tag == "fig3a" || tag == "fig3c") {
        f.kind = FigureKind::IntensityMap;
        f.t_end = 10.0;
    } else if (tag == "fig3b" || tag == "fig3d") {
        f.kind = FigureKind::IntensityProfile;
        f.t_end = 200.0;
        f.profile_time = 200.0;
    }
    return f;
}

}  // namespace chiralqed
