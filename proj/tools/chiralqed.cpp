// Command-line driver: `chiralqed run --config <file>` and
// `chiralqed reproduce <tag> --out <dir>`.

#include "chiralqed/cli.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <exception>
#include <iostream>

namespace {

void add_overrides(CLI::App* cmd, std::string& engine, double& step, double& t_end, std::string& x_grid) {
    cmd->add_option("--engine", engine, "dde, series or oracle")->check(CLI::IsMember({"dde", "series", "oracle"}));
    cmd->add_option("--step", step, "integration step (DDE step or oracle dt)");
    cmd->add_option("--t-end", t_end, "final time");
    cmd->add_option("--x-grid", x_grid, "N or xmin:xmax:N");
}

void collect(CLI::App* cmd, const std::string& engine, double step, double t_end, const std::string& x_grid,
             chiralqed::RunOverrides& o) {
    if (cmd->count("--engine")) o.engine = chiralqed::parse_engine_kind(engine);
    if (cmd->count("--step")) o.step = step;
    if (cmd->count("--t-end")) o.t_end = t_end;
    if (cmd->count("--x-grid")) o.x_grid = x_grid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two emitters on a chiral waveguide with retardation"};
    app.set_version_flag("--version", std::string(chiralqed::tool_version));
    app.require_subcommand(1);

    std::string config_path;
    std::string run_engine, run_grid;
    double run_step = 0.0, run_t_end = 0.0;
    chiralqed::RunOverrides run_o;
    CLI::App* run_cmd = app.add_subcommand("run", "run one configuration file");
    run_cmd->add_option("--config", config_path, "JSON run configuration")->required();
    add_overrides(run_cmd, run_engine, run_step, run_t_end, run_grid);

    std::string tag, out_dir;
    std::string rep_engine, rep_grid;
    double rep_step = 0.0, rep_t_end = 0.0;
    chiralqed::RunOverrides rep_o;
    CLI::App* rep_cmd = app.add_subcommand("reproduce", "regenerate the data of a published figure");
    rep_cmd->add_option("tag", tag, "fig1a..fig1d, fig2a..fig2d, fig3a..fig3d")->required();
    rep_cmd->add_option("--out", out_dir, "output directory")->required();
    add_overrides(rep_cmd, rep_engine, rep_step, rep_t_end, rep_grid);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        chiralqed::RunResult res;
        if (*run_cmd) {
            collect(run_cmd, run_engine, run_step, run_t_end, run_grid, run_o);
            chiralqed::RunConfig rc = chiralqed::load_run_config(config_path);
            chiralqed::apply_overrides(rc, run_o);
            res = chiralqed::run(rc);
        } else {
            collect(rep_cmd, rep_engine, rep_step, rep_t_end, rep_grid, rep_o);
            res = chiralqed::reproduce_figure(tag, out_dir, rep_o);
        }
        for (const std::string& f : res.files) std::cout << f << '\n';
        return 0;
    } catch (const chiralqed::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return chiralqed::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
