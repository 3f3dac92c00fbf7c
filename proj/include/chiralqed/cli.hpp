#pragma once

// Run configurations, deterministic artifact writers and figure reproduction.
//
// A run configuration is a strict JSON document with the sections physical,
// engine, initial, grids, tolerances and output; unknown keys are errors. Data
// files are CSV with a '#'-prefixed header carrying the resolved parameters and
// numbers printed with 17 significant digits, so identical inputs give
// byte-identical files. Every run also writes a JSON manifest.

#include "chiralqed/analytic_series.hpp"
#include "chiralqed/core_model.hpp"
#include "chiralqed/dde_engine.hpp"
#include "chiralqed/field.hpp"
#include "chiralqed/mode_oracle.hpp"
#include "chiralqed/presets.hpp"
#include "chiralqed/steady_state.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chiralqed {

inline constexpr std::string_view tool_name = "chiralqed";
inline constexpr std::string_view tool_version = "1.0.0";

enum class RunMode { Simulate, Series, Field, Steady, Oracle, Compare };
enum class EngineKind { Auto, Dde, Series, Oracle };

inline std::string_view to_string(RunMode m) {
    switch (m) {
        case RunMode::Simulate: return "simulate";
        case RunMode::Series: return "series";
        case RunMode::Field: return "field";
        case RunMode::Steady: return "steady";
        case RunMode::Oracle: return "oracle";
        case RunMode::Compare: return "compare";
    }
    return "simulate";
}

inline std::string_view to_string(EngineKind e) {
    switch (e) {
        case EngineKind::Auto: return "auto";
        case EngineKind::Dde: return "dde";
        case EngineKind::Series: return "series";
        case EngineKind::Oracle: return "oracle";
    }
    return "auto";
}

inline RunMode parse_run_mode(std::string_view s) {
    for (RunMode m : {RunMode::Simulate, RunMode::Series, RunMode::Field, RunMode::Steady, RunMode::Oracle,
                      RunMode::Compare})
        if (s == to_string(m)) return m;
    fail(ErrorKind::InvalidConfig, "unknown mode '" + std::string(s) +
                                       "' (expected simulate, series, field, steady, oracle or compare)");
}

inline EngineKind parse_engine_kind(std::string_view s) {
    for (EngineKind e : {EngineKind::Auto, EngineKind::Dde, EngineKind::Series, EngineKind::Oracle})
        if (s == to_string(e)) return e;
    fail(ErrorKind::InvalidConfig, "unknown engine '" + std::string(s) + "' (expected dde, series or oracle)");
}

struct GridSpec {
    double t_end = 10.0;
    std::size_t t_points = 1001;
    std::optional<double> step;  // DDE step, or dt for the oracle
    std::size_t x_points = default_x_points;
    std::optional<double> x_min;
    std::optional<double> x_max;
    std::vector<double> field_times;  // empty: derived from the integration nodes
    std::optional<std::size_t> field_t_points;
    std::optional<double> oracle_K;
    std::optional<double> oracle_dk;
};

struct ToleranceSpec {
    BicTolerances bic;
    double series_switch = series_switch_tolerance;
    // largest rounding bound accepted from the series engine
    double series_rounding = 1e-8;
};

struct RunConfig {
    RunMode mode = RunMode::Simulate;
    EngineKind engine = EngineKind::Auto;
    std::pair<EngineKind, EngineKind> compare{EngineKind::Dde, EngineKind::Series};
    std::optional<PhysicalConfig> physical;
    std::optional<EngineParams> params_override;
    InitialState initial;
    bool caption_initial = false;
    GridSpec grids;
    ToleranceSpec tolerances;
    std::string output_prefix = "out/run";

    EngineParams engine_params() const { return physical ? derive_engine_params(*physical) : *params_override; }
};

/// Command-line overrides applied on top of a configuration.
struct RunOverrides {
    std::optional<EngineKind> engine;
    std::optional<double> step;
    std::optional<double> t_end;
    std::optional<std::string> x_grid;  // "N" or "xmin:xmax:N"
};

namespace detail {

using json = nlohmann::json;

inline std::string line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// Typed, strict access to one JSON object; every key must be consumed.
class Section {
public:
    Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) bad("", "expected an object");
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    const json& raw(const std::string& key) {
        if (!has(key)) bad(key, "missing required key");
        seen_.insert(key);
        return obj_.at(key);
    }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) bad(key, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) bad(key, "must be finite");
        return d;
    }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }
    std::optional<double> optional_number(const std::string& key) {
        if (!has(key) || obj_.at(key).is_null()) {
            if (has(key)) seen_.insert(key);
            return std::nullopt;
        }
        return number(key);
    }

    std::size_t count(const std::string& key, std::size_t fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_number_integer() || v.get<long long>() < 1) bad(key, "expected a positive integer");
        return static_cast<std::size_t>(v.get<long long>());
    }

    std::string text(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_string()) bad(key, "expected a string");
        return v.get<std::string>();
    }

    cplx complex(const std::string& key) {
        const json& v = raw(key);
        if (v.is_number()) return {v.get<double>(), 0.0};
        if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
            return {v[0].get<double>(), v[1].get<double>()};
        bad(key, "expected a number or a [re, im] pair");
    }

    std::vector<double> numbers(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) bad(key, "expected an array of numbers");
        std::vector<double> out;
        for (const json& e : v) {
            if (!e.is_number()) bad(key, "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    Section sub(const std::string& key) {
        seen_.insert(key);
        return Section(obj_.at(key), join(key));
    }

    // Reject keys that were never read.
    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) bad(it.key(), "unknown key");
    }

    [[noreturn]] void bad(const std::string& key, const std::string& what) const {
        fail(ErrorKind::InvalidConfig, "config field '" + join(key) + "': " + what);
    }

private:
    std::string join(const std::string& key) const {
        if (key.empty()) return path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

inline PhysicalConfig parse_physical(Section s) {
    PhysicalConfig c;
    c.omega1 = s.number("omega1");
    c.omega2 = s.number("omega2");
    c.gammaL1 = s.number("gammaL1");
    c.gammaR1 = s.number("gammaR1");
    c.gammaL2 = s.number("gammaL2");
    c.gammaR2 = s.number("gammaR2");
    c.phiL1 = s.number("phiL1", 0.0);
    c.phiR1 = s.number("phiR1", 0.0);
    c.phiL2 = s.number("phiL2", 0.0);
    c.phiR2 = s.number("phiR2", 0.0);
    c.vL = s.number("vL");
    c.vR = s.number("vR");
    c.omega0 = s.number("omega0", 0.0);
    c.kL0 = s.number("kL0", 0.0);
    c.kR0 = s.number("kR0", 0.0);
    c.d = s.number("d");
    c.thetaL = s.optional_number("thetaL");
    c.thetaR = s.optional_number("thetaR");
    s.finish();
    validate(c);
    return c;
}

inline EngineParams parse_engine_params(Section s) {
    EngineParams p;
    p.delta = s.number("delta");
    p.omegaE = s.number("omegaE", 0.0);
    p.gamma1 = s.number("gamma1");
    p.gamma2 = s.number("gamma2");
    p.tauL = s.number("tauL");
    p.tauR = s.number("tauR");
    p.thetaL = s.number("thetaL");
    p.thetaR = s.number("thetaR");
    p.phiL = s.number("phiL");
    p.phiR = s.number("phiR");
    p.beta1 = s.complex("beta1");
    p.beta2 = s.complex("beta2");
    p.xi1 = cplx(-p.delta, 0.5 * p.gamma1);
    p.xi2 = cplx(p.delta, 0.5 * p.gamma2);
    // derived entries are accepted when consistent so a manifest can be fed back verbatim
    if (s.has("xi1") && s.complex("xi1") != p.xi1) s.bad("xi1", "inconsistent with delta and gamma1");
    if (s.has("xi2") && s.complex("xi2") != p.xi2) s.bad("xi2", "inconsistent with delta and gamma2");
    s.finish();
    if (!(p.gamma1 >= 0) || !(p.gamma2 >= 0)) fail(ErrorKind::InvalidConfig, "engine_params: rates must be >= 0");
    if (!(p.tauL > 0) || !(p.tauR > 0)) fail(ErrorKind::InvalidConfig, "engine_params: delays must be positive");
    if (std::abs(p.beta1) > 0.5 * p.gamma1 + 0.5 * p.gamma2 || std::abs(p.beta2) > 0.5 * p.gamma1 + 0.5 * p.gamma2)
        fail(ErrorKind::InvalidConfig, "engine_params: |beta| exceeds what the rates allow");
    auto phase_ok = [](cplx beta, double phase) {
        return std::abs(beta) == 0.0 || std::abs(wrap_phase(std::arg(beta) - phase)) <= 1e-9;
    };
    if (!phase_ok(p.beta1, p.thetaL + p.phiL))
        fail(ErrorKind::InvalidConfig, "engine_params: arg(beta1) must equal thetaL + phiL");
    if (!phase_ok(p.beta2, p.thetaR - p.phiR))
        fail(ErrorKind::InvalidConfig, "engine_params: arg(beta2) must equal thetaR - phiR");
    return p;
}

}  // namespace detail

/// Parse a configuration document; `origin` names it in diagnostics.
inline RunConfig parse_run_config(std::string_view text, const std::string& origin = "config") {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        fail(ErrorKind::InvalidConfig, origin + ": JSON syntax error at " + detail::line_col(text, e.byte) + ": " +
                                           e.what());
    }
    RunConfig rc;
    detail::Section root(doc, "");
    if (!root.has("physical")) root.bad("physical", "missing section");

    {
        detail::Section phys = root.sub("physical");
        if (phys.has("engine_params")) {
            rc.params_override = detail::parse_engine_params(phys.sub("engine_params"));
            phys.finish();
        } else {
            rc.physical = detail::parse_physical(std::move(phys));
        }
    }
    if (root.has("engine")) {
        detail::Section e = root.sub("engine");
        rc.mode = parse_run_mode(e.text("mode", "simulate"));
        rc.engine = parse_engine_kind(e.text("kind", "auto"));
        if (e.has("compare")) {
            const json& pair = e.raw("compare");
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
                e.bad("compare", "expected two engine names");
            rc.compare = {parse_engine_kind(pair[0].get<std::string>()),
                          parse_engine_kind(pair[1].get<std::string>())};
        }
        e.finish();
    }
    const EngineParams p = rc.engine_params();
    if (root.has("initial")) {
        detail::Section s = root.sub("initial");
        if (s.has("preset")) {
            const std::string preset = s.text("preset", "");
            if (preset != "caption") s.bad("preset", "only 'caption' is known");
            rc.initial = caption_initial_state(p.gamma1, p.gamma2);
            rc.caption_initial = true;
        } else {
            rc.initial = make_initial_state(s.complex("c1"), s.complex("c2"));
        }
        s.finish();
    }
    if (root.has("grids")) {
        detail::Section s = root.sub("grids");
        GridSpec& g = rc.grids;
        g.t_end = s.number("t_end", g.t_end);
        g.t_points = s.count("t_points", g.t_points);
        g.step = s.optional_number("step");
        g.x_points = s.count("x_points", g.x_points);
        g.x_min = s.optional_number("x_min");
        g.x_max = s.optional_number("x_max");
        if (s.has("field_times")) g.field_times = s.numbers("field_times");
        if (s.has("field_t_points")) g.field_t_points = s.count("field_t_points", 1);
        g.oracle_K = s.optional_number("oracle_K");
        g.oracle_dk = s.optional_number("oracle_dk");
        s.finish();
    }
    if (root.has("tolerances")) {
        detail::Section s = root.sub("tolerances");
        ToleranceSpec& t = rc.tolerances;
        t.bic.phase = s.number("bic_phase", t.bic.phase);
        t.bic.amplitude = s.number("bic_amplitude", t.bic.amplitude);
        t.bic.detuning = s.number("bic_detuning", t.bic.detuning);
        t.series_switch = s.number("series_switch", t.series_switch);
        t.series_rounding = s.number("series_rounding", t.series_rounding);
        s.finish();
    }
    if (root.has("output")) {
        detail::Section s = root.sub("output");
        rc.output_prefix = s.text("prefix", rc.output_prefix);
        s.finish();
    }
    root.finish();

    if (!(rc.grids.t_end > 0)) fail(ErrorKind::InvalidConfig, "config field 'grids.t_end': must be positive");
    if (rc.grids.step && !(*rc.grids.step > 0))
        fail(ErrorKind::InvalidConfig, "config field 'grids.step': must be positive");
    if (rc.output_prefix.empty()) fail(ErrorKind::InvalidConfig, "config field 'output.prefix': must not be empty");
    if (!rc.physical && (rc.mode == RunMode::Field || rc.mode == RunMode::Oracle || rc.engine == EngineKind::Oracle))
        fail(ErrorKind::InvalidConfig, "mode '" + std::string(to_string(rc.mode)) +
                                           "' needs the physical section (engine_params lack the geometry)");
    return rc;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::InvalidConfig, "cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path);
}

namespace detail {

// "N" or "xmin:xmax:N"
inline void apply_x_grid(GridSpec& g, const std::string& spec) {
    auto parse_double = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || !std::isfinite(v)) fail(ErrorKind::InvalidConfig, "bad --x-grid value '" + spec + "'");
        return v;
    };
    auto parse_count = [&](const std::string& s) {
        const double v = parse_double(s);
        if (v < 2 || v != std::floor(v)) fail(ErrorKind::InvalidConfig, "--x-grid needs an integer count >= 2");
        return static_cast<std::size_t>(v);
    };
    const auto first = spec.find(':');
    if (first == std::string::npos) {
        g.x_points = parse_count(spec);
        return;
    }
    const auto second = spec.find(':', first + 1);
    if (second == std::string::npos) fail(ErrorKind::InvalidConfig, "--x-grid expects N or xmin:xmax:N");
    g.x_min = parse_double(spec.substr(0, first));
    g.x_max = parse_double(spec.substr(first + 1, second - first - 1));
    g.x_points = parse_count(spec.substr(second + 1));
    if (!(*g.x_max > *g.x_min)) fail(ErrorKind::InvalidConfig, "--x-grid needs xmin < xmax");
}

}  // namespace detail

inline void apply_overrides(RunConfig& rc, const RunOverrides& o) {
    if (o.engine) rc.engine = *o.engine;
    if (o.step) {
        if (!(*o.step > 0)) fail(ErrorKind::InvalidConfig, "--step must be positive");
        rc.grids.step = *o.step;
    }
    if (o.t_end) {
        if (!(*o.t_end > 0)) fail(ErrorKind::InvalidConfig, "--t-end must be positive");
        rc.grids.t_end = *o.t_end;
    }
    if (o.x_grid) detail::apply_x_grid(rc.grids, *o.x_grid);
    if (!rc.physical && rc.engine == EngineKind::Oracle)
        fail(ErrorKind::InvalidConfig, "the oracle engine needs the physical section");
}

// ---------------------------------------------------------------------------
// Output formatting

/// 17 significant digits: doubles survive a text round trip exactly.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header_lines) : header_(std::move(header_lines)) {}

    void columns(std::initializer_list<std::string_view> names) {
        std::string line;
        for (std::string_view n : names) {
            if (!line.empty()) line += ',';
            line += n;
        }
        body_ += line + '\n';
    }

    void row(std::initializer_list<double> values) {
        std::string line;
        for (double v : values) {
            if (!line.empty()) line += ',';
            line += format_number(v);
        }
        body_ += line + '\n';
    }

    // A row whose first cell is a label.
    void labelled_row(std::string_view label, std::initializer_list<double> values) {
        std::string line(label);
        for (double v : values) line += ',' + format_number(v);
        body_ += line + '\n';
    }

    std::string str() const {
        std::string out;
        for (const std::string& h : header_) out += "# " + h + '\n';
        return out + body_;
    }

private:
    std::vector<std::string> header_;
    std::string body_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::InvalidConfig, "cannot write '" + path.string() + "'");
    out << content;
    if (!out) fail(ErrorKind::InvalidConfig, "write to '" + path.string() + "' failed");
}

inline nlohmann::json complex_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

inline nlohmann::json engine_params_json(const EngineParams& p) {
    return {{"delta", p.delta},   {"omegaE", p.omegaE}, {"gamma1", p.gamma1},
            {"gamma2", p.gamma2}, {"xi1", complex_json(p.xi1)}, {"xi2", complex_json(p.xi2)},
            {"tauL", p.tauL},     {"tauR", p.tauR},     {"thetaL", p.thetaL},
            {"thetaR", p.thetaR}, {"phiL", p.phiL},     {"phiR", p.phiR},
            {"beta1", complex_json(p.beta1)}, {"beta2", complex_json(p.beta2)}};
}

inline nlohmann::json physical_json(const PhysicalConfig& c) {
    nlohmann::json j = {{"omega1", c.omega1}, {"omega2", c.omega2}, {"gammaL1", c.gammaL1}, {"gammaR1", c.gammaR1},
                        {"gammaL2", c.gammaL2}, {"gammaR2", c.gammaR2}, {"phiL1", c.phiL1}, {"phiR1", c.phiR1},
                        {"phiL2", c.phiL2}, {"phiR2", c.phiR2}, {"vL", c.vL}, {"vR", c.vR},
                        {"omega0", c.omega0}, {"kL0", c.kL0}, {"kR0", c.kR0}, {"d", c.d}};
    if (c.thetaL) j["thetaL"] = *c.thetaL;
    if (c.thetaR) j["thetaR"] = *c.thetaR;
    return j;
}

namespace detail {

inline std::vector<std::string> data_header(std::string_view mode, std::string_view engine, const EngineParams& p,
                                            const InitialState& init) {
    return {std::string(tool_name) + " " + std::string(tool_version),
            "mode: " + std::string(mode),
            "engine: " + std::string(engine),
            "engine_params: " + engine_params_json(p).dump(),
            "initial: " + nlohmann::json{{"c1", complex_json(init.c1)}, {"c2", complex_json(init.c2)}}.dump()};
}

// Per-engine amplitude evaluation on a list of times.
struct EngineSamples {
    std::vector<double> times;
    std::vector<Amplitudes> amps;
    nlohmann::json info = nlohmann::json::object();
};

inline EngineSamples sample_dde(const EngineParams& p, const InitialState& init, const GridSpec& g,
                                const std::vector<double>& times) {
    const Trajectory traj = integrate(p, init, g.t_end, g.step ? *g.step : default_step(p));
    EngineSamples s;
    s.times = times;
    for (double t : times) s.amps.push_back(traj.evaluate(std::min(t, traj.end_time())));
    s.info["step"] = g.step ? *g.step : default_step(p);
    s.info["nodes"] = traj.size();
    return s;
}

inline EngineSamples sample_series(const EngineParams& p, const InitialState& init, const ToleranceSpec& tol,
                                   const std::vector<double>& times) {
    EngineSamples s;
    s.times = times;
    double worst = 0.0;
    for (double t : times) {
        const SeriesResult r = series_evaluate(p, init, t);
        worst = std::max(worst, r.rounding_bound());
        if (r.rounding_bound() > tol.series_rounding)
            fail(ErrorKind::PrecisionLoss, "series rounding bound " + format_number(r.rounding_bound()) +
                                               " exceeds " + format_number(tol.series_rounding) + " at t = " +
                                               format_number(t) + "; use the dde engine");
        s.amps.push_back(r.amps);
    }
    s.info["max_rounding_bound"] = worst;
    return s;
}

inline ModeGrid oracle_grid(const PhysicalConfig& cfg, const GridSpec& g) {
    if (g.oracle_K || g.oracle_dk) {
        const ModeGrid def = default_grid(cfg, g.t_end);
        return build_grid(cfg, g.oracle_K ? *g.oracle_K : def.K, g.oracle_dk ? *g.oracle_dk : def.dk, g.t_end);
    }
    return default_grid(cfg, g.t_end);
}

// Oracle samples land on its own step grid; requested times are rounded to the nearest step.
inline EngineSamples sample_oracle(const PhysicalConfig& cfg, const InitialState& init, const GridSpec& g,
                                   const std::vector<double>& times, OracleRun* keep = nullptr,
                                   std::span<const double> snapshots = {}) {
    const ModeGrid grid = oracle_grid(cfg, g);
    const double dt = g.step ? *g.step : default_oracle_step(grid, g.t_end);
    OracleRun run = integrate_full(grid, init, g.t_end, dt, snapshots);
    EngineSamples s;
    const double h = run.times.size() > 1 ? run.times[1] : g.t_end;
    for (double t : times) {
        const auto k = std::min(static_cast<std::size_t>(std::llround(t / h)), run.times.size() - 1);
        s.times.push_back(run.times[k]);
        s.amps.push_back(run.emitters[k]);
    }
    s.info = {{"K", grid.K}, {"dk", grid.dk}, {"modes_per_direction", grid.modes_per_direction},
              {"dt", h}, {"max_norm_drift", run.max_norm_drift}};
    if (keep) *keep = std::move(run);
    return s;
}

}  // namespace detail

struct RunResult {
    std::vector<std::string> files;
    nlohmann::json manifest;
};

namespace detail {

inline std::string populations_csv(const std::vector<std::string>& header, const EngineSamples& s) {
    CsvWriter w(header);
    w.columns({"t", "re_c1", "im_c1", "re_c2", "im_c2", "pop1", "pop2"});
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        const Amplitudes& a = s.amps[i];
        w.row({s.times[i], a.c1.real(), a.c1.imag(), a.c2.real(), a.c2.imag(), std::norm(a.c1), std::norm(a.c2)});
    }
    return w.str();
}

inline std::string field_csv(const std::vector<std::string>& header, const FieldMap& m) {
    CsvWriter w(header);
    w.columns({"t", "x", "re_psi", "im_psi", "intensity"});
    for (std::size_t it = 0; it < m.ts.size(); ++it)
        for (std::size_t ix = 0; ix < m.xs.size(); ++ix) {
            const cplx v = m.psi_at(it, ix);
            w.row({m.ts[it], m.xs[ix], v.real(), v.imag(), m.intensity_at(it, ix)});
        }
    return w.str();
}

inline EngineSamples sample_engine(EngineKind kind, const RunConfig& rc, const EngineParams& p,
                                   const std::vector<double>& times) {
    switch (kind) {
        case EngineKind::Series: return sample_series(p, rc.initial, rc.tolerances, times);
        case EngineKind::Oracle: return sample_oracle(*rc.physical, rc.initial, rc.grids, times);
        default: return sample_dde(p, rc.initial, rc.grids, times);
    }
}

inline std::vector<double> x_grid_for(const GridSpec& g, double d) {
    if (g.x_min || g.x_max) {
        const double lo = g.x_min ? *g.x_min : -default_x_extent * d;
        const double hi = g.x_max ? *g.x_max : default_x_extent * d;
        return linear_grid(lo, hi, g.x_points);
    }
    return default_x_grid(d, g.x_points);
}

inline constexpr std::size_t max_default_field_times = 256;

// Explicit times, a uniform grid, or every k-th integration node (at most 256 rows).
inline std::vector<double> field_times_for(const GridSpec& g, const EngineParams& p) {
    if (!g.field_times.empty()) return g.field_times;
    if (g.field_t_points) return linear_grid(0.0, g.t_end, *g.field_t_points);
    const Trajectory traj = integrate(p, InitialState{}, g.t_end, g.step ? *g.step : default_step(p));
    const std::vector<double>& nodes = traj.times();
    const std::size_t stride = (nodes.size() + max_default_field_times - 1) / max_default_field_times;
    std::vector<double> ts;
    for (std::size_t i = 0; i < nodes.size(); i += std::max<std::size_t>(stride, 1)) ts.push_back(nodes[i]);
    return ts;
}

// Amplitude source of the requested kind, or oracle snapshots when kind == Oracle.
inline FieldMap compute_field(const RunConfig& rc, EngineKind kind, const std::vector<double>& xs,
                              const std::vector<double>& ts, nlohmann::json& info) {
    const PhysicalConfig& cfg = *rc.physical;
    const EngineParams p = derive_engine_params(cfg);
    const FieldParams f = make_field_params(cfg);
    const double t_end = std::max(rc.grids.t_end, ts.back());
    switch (kind) {
        case EngineKind::Series: {
            info["source"] = "series";
            return intensity_map(f, SeriesSource(p, rc.initial), xs, ts);
        }
        case EngineKind::Dde: {
            info["source"] = "dde";
            const double step = rc.grids.step ? *rc.grids.step : default_step(p);
            return intensity_map(f, TrajectorySource(integrate(p, rc.initial, t_end, step)), xs, ts);
        }
        case EngineKind::Oracle: {
            info["source"] = "oracle";
            GridSpec g = rc.grids;
            g.t_end = t_end;
            OracleRun run;
            const EngineSamples s = sample_oracle(cfg, rc.initial, g, {}, &run, ts);
            info["oracle"] = s.info;
            const ModeGrid grid = oracle_grid(cfg, g);
            FieldMap m;
            m.xs = xs;
            for (const ModeState& st : run.snapshots) m.ts.push_back(st.time);
            // the oracle frame rotates at omega_e; restore the lab-frame phase exp(-i omega_e t)
            for (const ModeState& st : run.snapshots) {
                const cplx back = std::polar(1.0, -p.omegaE * st.time);
                for (double x : xs) {
                    const cplx v = back * oracle_field(st, grid, x);
                    m.psi.push_back(v);
                    m.intensity.push_back(std::norm(v));
                }
            }
            return m;
        }
        default: {
            const HybridSource src(p, rc.initial, t_end, rc.tolerances.series_switch);
            info["source"] = "series+dde";
            info["series_until"] = src.switch_time();
            return intensity_map(f, src, xs, ts);
        }
    }
}

}  // namespace detail

/// Execute one configuration and write its artifacts under output_prefix.
inline RunResult run(const RunConfig& rc) {
    const EngineParams p = rc.engine_params();
    const std::string& prefix = rc.output_prefix;
    RunResult res;
    nlohmann::json& man = res.manifest;
    man["tool"] = tool_name;
    man["version"] = tool_version;
    man["mode"] = to_string(rc.mode);
    man["engine_params"] = engine_params_json(p);
    if (rc.physical) man["physical"] = physical_json(*rc.physical);
    man["initial"] = {{"c1", complex_json(rc.initial.c1)}, {"c2", complex_json(rc.initial.c2)}};
    man["grids"] = {{"t_end", rc.grids.t_end}, {"t_points", rc.grids.t_points}};
    if (rc.grids.step) man["grids"]["step"] = *rc.grids.step;

    const std::vector<double> times = linear_grid(0.0, rc.grids.t_end, rc.grids.t_points);
    auto emit = [&](const std::string& suffix, const std::string& content) {
        const std::string path = prefix + suffix;
        write_file(path, content);
        res.files.push_back(path);
    };

    switch (rc.mode) {
        case RunMode::Simulate:
        case RunMode::Series:
        case RunMode::Oracle: {
            EngineKind kind = rc.engine;
            if (rc.mode == RunMode::Series) kind = EngineKind::Series;
            if (rc.mode == RunMode::Oracle) kind = EngineKind::Oracle;
            if (kind == EngineKind::Auto) kind = EngineKind::Dde;
            if (rc.mode != RunMode::Simulate && rc.engine != EngineKind::Auto && rc.engine != kind)
                fail(ErrorKind::InvalidConfig, "mode '" + std::string(to_string(rc.mode)) +
                                                   "' conflicts with engine '" +
                                                   std::string(to_string(rc.engine)) + "'");
            const detail::EngineSamples s = detail::sample_engine(kind, rc, p, times);
            man["engine"] = to_string(kind);
            man["engine_info"] = s.info;
            emit("_populations.csv",
                 detail::populations_csv(detail::data_header(to_string(rc.mode), to_string(kind), p, rc.initial), s));
            break;
        }
        case RunMode::Compare: {
            auto [a, b] = rc.compare;
            if (a == EngineKind::Auto) a = EngineKind::Dde;
            if (b == EngineKind::Auto) b = EngineKind::Dde;
            if ((a == EngineKind::Oracle || b == EngineKind::Oracle) && !rc.physical)
                fail(ErrorKind::InvalidConfig, "the oracle engine needs the physical section");
            // with the oracle involved both engines are sampled on its step grid
            std::vector<double> ts = times;
            detail::EngineSamples sa, sb;
            if (a == EngineKind::Oracle) {
                sa = detail::sample_engine(a, rc, p, ts);
                ts = sa.times;
                sb = detail::sample_engine(b, rc, p, ts);
            } else if (b == EngineKind::Oracle) {
                sb = detail::sample_engine(b, rc, p, ts);
                ts = sb.times;
                sa = detail::sample_engine(a, rc, p, ts);
            } else {
                sa = detail::sample_engine(a, rc, p, ts);
                sb = detail::sample_engine(b, rc, p, ts);
            }
            const std::string label = std::string(to_string(a)) + "-" + std::string(to_string(b));
            CsvWriter w(detail::data_header("compare", label, p, rc.initial));
            w.columns({"t", "abs_dc1", "abs_dc2"});
            double m1 = 0.0, m2 = 0.0;
            for (std::size_t i = 0; i < ts.size(); ++i) {
                const double d1 = std::abs(sa.amps[i].c1 - sb.amps[i].c1);
                const double d2 = std::abs(sa.amps[i].c2 - sb.amps[i].c2);
                m1 = std::max(m1, d1);
                m2 = std::max(m2, d2);
                w.row({ts[i], d1, d2});
            }
            w.labelled_row("max", {m1, m2});
            man["engine"] = label;
            man["engine_info"] = {{std::string(to_string(a)), sa.info}, {std::string(to_string(b)), sb.info}};
            man["max_abs_dc"] = {m1, m2};
            emit("_compare.csv", w.str());
            break;
        }
        case RunMode::Steady: {
            const BicReport r = analyze_steady_state(p, rc.initial, rc.tolerances.bic);
            const Amplitudes s = r.stationary.value_or(Amplitudes{});
            CsvWriter w(detail::data_header("steady", "closed-form", p, rc.initial));
            w.columns({"phase_residual", "amplitude_residual", "satisfied", "closed_form", "re_c1s", "im_c1s",
                       "re_c2s", "im_c2s", "trapped_probability", "dark_fidelity"});
            w.row({r.phase_residual, r.amplitude_residual, r.satisfied ? 1.0 : 0.0, r.stationary ? 1.0 : 0.0,
                   s.c1.real(), s.c1.imag(), s.c2.real(), s.c2.imag(), r.trapped_probability, r.dark_fidelity});
            man["engine"] = "closed-form";
            man["bic_satisfied"] = r.satisfied;
            emit("_steady.csv", w.str());
            break;
        }
        case RunMode::Field: {
            const EngineKind kind = rc.engine;
            const std::vector<double> xs = detail::x_grid_for(rc.grids, rc.physical->d);
            const std::vector<double> ts = detail::field_times_for(rc.grids, p);
            nlohmann::json info;
            const FieldMap m = detail::compute_field(rc, kind, xs, ts, info);
            man["engine"] = to_string(kind);
            man["engine_info"] = info;
            man["grids"]["x_points"] = xs.size();
            man["grids"]["x_range"] = {xs.front(), xs.back()};
            man["grids"]["field_times"] = m.ts.size();
            emit("_intensity.csv",
                 detail::field_csv(detail::data_header("field", to_string(kind), p, rc.initial), m));
            break;
        }
    }
    man["files"] = res.files;
    const std::string manifest_path = prefix + "_manifest.json";
    write_file(manifest_path, man.dump(2) + "\n");
    res.files.push_back(manifest_path);
    return res;
}

// ---------------------------------------------------------------------------
// Figure reproduction

inline constexpr std::size_t default_profile_points = 16384;

/// Regenerate the data behind one published figure into `out_dir`.
inline RunResult reproduce_figure(std::string_view tag, const std::string& out_dir, const RunOverrides& o = {}) {
    const FigurePreset fig = figure_preset(tag);
    RunResult res;
    nlohmann::json& man = res.manifest;
    man["tool"] = tool_name;
    man["version"] = tool_version;
    man["tag"] = fig.tag;
    man["series"] = nlohmann::json::array();
    const std::filesystem::path dir(out_dir);

    for (const FigureSeries& series : fig.series) {
        RunConfig rc;
        rc.physical = series.config;
        const EngineParams p = derive_engine_params(series.config);
        rc.initial = caption_initial_state(p.gamma1, p.gamma2);
        rc.caption_initial = true;
        rc.grids.t_end = fig.t_end;
        double profile_time = fig.profile_time;
        if (fig.kind == FigureKind::IntensityProfile) rc.grids.x_points = default_profile_points;
        const bool t_end_given = o.t_end.has_value();
        apply_overrides(rc, o);
        if (t_end_given && fig.kind == FigureKind::IntensityProfile) profile_time = rc.grids.t_end;
        const std::string stem = (dir / (fig.tag + "_" + series.label)).string();

        nlohmann::json entry = {{"label", series.label},
                                {"physical", physical_json(series.config)},
                                {"engine_params", engine_params_json(p)},
                                {"initial", {{"c1", complex_json(rc.initial.c1)}, {"c2", complex_json(rc.initial.c2)}}},
                                {"t_end", rc.grids.t_end}};
        if (fig.kind == FigureKind::Populations) {
            const EngineKind kind = rc.engine == EngineKind::Auto ? EngineKind::Dde : rc.engine;
            const auto times = linear_grid(0.0, rc.grids.t_end, rc.grids.t_points);
            const detail::EngineSamples s = detail::sample_engine(kind, rc, p, times);
            const std::string path = stem + "_populations.csv";
            write_file(path, detail::populations_csv(detail::data_header("simulate", to_string(kind), p, rc.initial), s));
            res.files.push_back(path);
            entry["engine"] = to_string(kind);
            entry["engine_info"] = s.info;
            entry["file"] = path;
        } else {
            const std::vector<double> xs = detail::x_grid_for(rc.grids, series.config.d);
            std::vector<double> ts;
            if (fig.kind == FigureKind::IntensityProfile)
                ts = {profile_time};
            else
                ts = detail::field_times_for(rc.grids, p);
            nlohmann::json info;
            const FieldMap m = detail::compute_field(rc, rc.engine, xs, ts, info);
            const std::string path =
                stem + (fig.kind == FigureKind::IntensityProfile ? "_profile.csv" : "_intensity.csv");
            write_file(path, detail::field_csv(detail::data_header("field", to_string(rc.engine), p, rc.initial), m));
            res.files.push_back(path);
            entry["engine"] = to_string(rc.engine);
            entry["engine_info"] = info;
            entry["x_points"] = xs.size();
            entry["x_range"] = {xs.front(), xs.back()};
            entry["field_times"] = m.ts.size();
            entry["file"] = path;
        }
        man["series"].push_back(entry);
    }
    man["kind"] = fig.kind == FigureKind::Populations        ? "populations"
                  : fig.kind == FigureKind::IntensityMap     ? "intensity_map"
                                                             : "intensity_profile";
    const std::string manifest_path = (dir / (fig.tag + "_manifest.json")).string();
    write_file(manifest_path, man.dump(2) + "\n");
    res.files.push_back(manifest_path);
    return res;
}

}  // namespace chiralqed
