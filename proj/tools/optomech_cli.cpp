// Command-line front end: simulate, sweep, kickmap, compare.

#include "optomech/cycle_analysis.hpp"
#include "optomech/error.hpp"
#include "optomech/integrator.hpp"
#include "optomech/io.hpp"
#include "optomech/kickmap.hpp"
#include "optomech/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace optomech;

namespace {

constexpr const char* tool_version = "1.0.0";

enum Exit { ok = 0, usage = 1, config = 2, numerical = 3, not_converged = 4 };

struct Common {
    std::string config_path;
    std::string out_dir = ".";
    std::map<std::string, std::optional<std::string>> overrides;
    unsigned workers = 0;
};

struct SeedOptions {
    int n_seeds = 12;
    double seed_min_um = 0.25;
    double seed_max_um = 6.0;
    double transient_periods = 200.0;
    double window_periods = 20.0;
    int stride = 10;

    EnsembleSpec spec(unsigned workers) const
    {
        EnsembleSpec s;
        s.n_seeds = n_seeds;
        s.a_lo = seed_min_um * 1e-6;
        s.a_hi = seed_max_um * 1e-6;
        s.transient_periods = transient_periods;
        s.window_periods = window_periods;
        s.sample_stride = stride;
        s.workers = workers;
        return s;
    }
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("-c,--config", c.config_path, "key = value config file (built-in defaults if omitted)");
    app->add_option("-o,--out", c.out_dir, "output directory")->capture_default_str();
    app->add_option("--workers", c.workers, "worker threads (0 = all cores)");
    for (const auto& key : config_keys()) {
        std::string flag = "--" + key;
        for (auto& ch : flag) {
            if (ch == '_') ch = '-';
        }
        c.overrides[key];
        app->add_option(flag, c.overrides[key], "override config key " + key);
    }
}

void add_seeds(CLI::App* app, SeedOptions& s)
{
    app->add_option("--seeds", s.n_seeds, "seed count")->capture_default_str();
    app->add_option("--seed-min-um", s.seed_min_um, "smallest equivalent seed amplitude [um]")->capture_default_str();
    app->add_option("--seed-max-um", s.seed_max_um, "largest equivalent seed amplitude [um]")->capture_default_str();
    app->add_option("--transient-periods", s.transient_periods, "discarded periods")->capture_default_str();
    app->add_option("--window-periods", s.window_periods, "convergence window [periods]")->capture_default_str();
    app->add_option("--stride", s.stride, "keep every n-th step in the window")->capture_default_str();
}

RunConfig resolve(const Common& c)
{
    RunConfig cfg = c.config_path.empty() ? default_config() : load_config(c.config_path);
    std::map<std::string, std::string> given;
    for (const auto& [key, value] : c.overrides) {
        if (value) given[key] = *value;
    }
    apply_overrides(cfg, given);
    cfg.params.validate();
    return cfg;
}

json params_json(const RunConfig& cfg)
{
    const auto& p = cfg.params;
    const auto& ic = cfg.integrator;
    return {
        {"omega_m_rad_s", p.omega_m},
        {"mass_kg", p.mass},
        {"gamma_per_s", p.gamma},
        {"kappa_per_s", p.kappa},
        {"lambda_m", p.lambda_l},
        {"n_order", p.n_order},
        {"L0_m", p.L0()},
        {"power_w", p.power},
        {"duffing_alpha_per_m2", p.duffing_alpha},
        {"hbar_Js", SystemParams::hbar},
        {"c_m_s", SystemParams::c},
        {"integrator",
         {{"dt_base", ic.dt_base},
          {"refine_factor", ic.refine_factor},
          {"dt_fine", ic.dt_fine()},
          {"refine_halfwidth_m", ic.refine_halfwidth},
          {"window_margin", ic.window_margin},
          {"ringdown_tolerance", ic.ringdown_tolerance},
          {"ringdown_reach", ic.ringdown_reach}}},
    };
}

json seeds_json(const EnsembleSpec& s)
{
    return {{"n_seeds", s.n_seeds},          {"seed_min_m", s.a_lo},
            {"seed_max_m", s.a_hi},          {"transient_periods", s.transient_periods},
            {"window_periods", s.window_periods}, {"max_extensions", s.max_extensions},
            {"sample_stride", s.sample_stride},   {"rel_tol", s.rel_tol}};
}

class Outputs {
public:
    Outputs(const std::string& dir, std::string command) : dir_(dir), start_(std::chrono::steady_clock::now())
    {
        fs::create_directories(dir_);
        manifest_["tool"] = "optomech";
        manifest_["version"] = tool_version;
        manifest_["command"] = std::move(command);
        manifest_["outputs"] = json::array();
        manifest_["runs"] = json::array();
        manifest_["partial"] = false;
    }

    template <class Fn>
    void write(const std::string& name, Fn&& fn)
    {
        const fs::path path = dir_ / name;
        std::ofstream out(path);
        if (!out) throw Error("cannot write " + path.string());
        fn(out);
        manifest_["outputs"].push_back(name);
    }

    json& manifest() { return manifest_; }

    void finish()
    {
        manifest_["wall_clock_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        std::ofstream out(dir_ / "manifest.json");
        out << manifest_.dump(2) << '\n';
    }

private:
    fs::path dir_;
    std::chrono::steady_clock::time_point start_;
    json manifest_;
};

int exit_for(const std::vector<CycleStatus>& statuses)
{
    for (auto s : statuses) {
        if (s == CycleStatus::NotConverged || s == CycleStatus::Failed) return Exit::not_converged;
    }
    return Exit::ok;
}

int run_simulate(const Common& c, double periods, int stride, double seed_um, std::optional<double> x0,
                 std::optional<double> p0, bool dump_modes, double window_periods)
{
    const RunConfig cfg = resolve(c);
    IntegratorConfig ic = cfg.integrator;
    ic.t_end = periods * 2.0 * std::numbers::pi;
    ic.sample_stride = stride;
    ic.dump_modes = dump_modes;
    const Integrator integ(cfg.params, ic);
    const MirrorState start{x0.value_or(0.0),
                            p0.value_or(cfg.params.mass * cfg.params.omega_m * seed_um * 1e-6)};

    Outputs out(c.out_dir, "simulate");
    out.manifest()["params"] = params_json(cfg);
    out.manifest()["initial_state"] = {{"x_m", start.x}, {"p_kgms", start.p}};
    out.manifest()["periods"] = periods;
    for (const auto& w : cfg.params.warnings()) std::cerr << "warning: " << w << '\n';

    Trajectory traj;
    try {
        traj = integ.integrate(integ.initial_state(start));
    } catch (const NumericalBlowup& e) {
        out.manifest()["partial"] = true;
        out.manifest()["runs"].push_back({{"status", "failed"}, {"detail", e.what()}});
        out.finish();
        throw;
    }

    out.write("trajectory.csv", [&](std::ostream& o) { csv::write_trajectory(o, traj); });
    out.write("photons.csv", [&](std::ostream& o) { csv::write_photons(o, traj); });
    if (dump_modes) out.write("modes.csv", [&](std::ostream& o) { csv::write_mode_dump(o, traj); });

    DetectionOptions opts;
    opts.window_periods = std::min(window_periods, periods);
    const CycleDetection det = detect_limit_cycle(traj, opts);
    if (det.status == CycleStatus::Converged)
        out.write("limit_cycle.csv", [&](std::ostream& o) { csv::write_limit_cycle(o, det.cycle); });
    out.manifest()["runs"].push_back({{"status", to_string(det.status)},
                                      {"detail", det.detail},
                                      {"a_min_m", det.cycle.a_min},
                                      {"a_max_m", det.cycle.a_max},
                                      {"a_bar_m", det.cycle.a_bar},
                                      {"period_s", det.cycle.period},
                                      {"equilibrium_shift_m", equilibrium_shift(det.cycle)},
                                      {"ledger_residual", ledger_residual(traj)},
                                      {"steps", traj.steps},
                                      {"fine_steps", traj.fine_steps}});
    out.finish();
    std::cout << "status " << to_string(det.status) << "  a_bar " << format_double(det.cycle.a_bar) << " m\n";
    return exit_for({det.status});
}

int run_sweep(const Common& c, const SeedOptions& so, const std::string& variable, double from, double to,
              double step, const std::string& mode)
{
    const RunConfig cfg = resolve(c);
    SweepPlan plan;
    if (variable == "power") plan.variable = SweepVariable::Power;
    else if (variable == "duffing_alpha") plan.variable = SweepVariable::DuffingAlpha;
    else throw ConfigError("unknown sweep variable '" + variable + "'", "variable", 0);
    if (mode == "independent") plan.mode = SweepMode::Independent;
    else if (mode == "continue-up") plan.mode = SweepMode::ContinueUp;
    else if (mode == "continue-down") plan.mode = SweepMode::ContinueDown;
    else throw ConfigError("unknown sweep mode '" + mode + "'", "mode", 0);
    plan.values = SweepPlan::grid(from, to, step);
    plan.seeds = so.spec(c.workers);
    plan.validate();

    Outputs out(c.out_dir, "sweep");
    out.manifest()["params"] = params_json(cfg);
    out.manifest()["plan"] = {{"variable", to_string(plan.variable)},
                              {"mode", to_string(plan.mode)},
                              {"values", plan.values},
                              {"gap_factor", plan.gap_factor},
                              {"branch_jump_threshold", plan.jump_threshold},
                              {"seeds", seeds_json(plan.seeds)}};

    std::vector<CycleStatus> statuses;
    if (plan.mode == SweepMode::Independent) {
        const SweepResult result = plan.variable == SweepVariable::Power
                                       ? power_sweep(plan, cfg.params, cfg.integrator)
                                       : duffing_sweep(plan, cfg.params, cfg.integrator);
        out.write(plan.variable == SweepVariable::Power ? "attractor.csv" : "duffing.csv",
                  [&](std::ostream& o) { csv::write_attractor(o, result); });
        if (plan.variable == SweepVariable::Power)
            out.write("branches.csv", [&](std::ostream& o) { csv::write_branch_table(o, result); });
        for (const auto& pt : result.points) {
            for (const auto& s : pt.ensemble.seeds) {
                statuses.push_back(s.status);
                out.manifest()["runs"].push_back({{"value", pt.value},
                                                  {"seed_amplitude_m", s.seed_amplitude},
                                                  {"status", to_string(s.status)},
                                                  {"detail", s.detail},
                                                  {"a_bar_m", s.cycle.a_bar}});
            }
        }
    } else {
        const BranchTrace trace = continuation_sweep(plan, cfg.params, cfg.integrator);
        out.write("trace.csv", [&](std::ostream& o) { csv::write_trace(o, trace); });
        for (const auto& e : trace.entries) {
            statuses.push_back(e.status == CycleStatus::Rest ? CycleStatus::Converged : e.status);
            out.manifest()["runs"].push_back({{"value", e.value},
                                              {"status", to_string(e.status)},
                                              {"branch_jump", e.branch_jump},
                                              {"a_bar_m", e.a_bar}});
        }
        out.manifest()["terminated"] = trace.terminated;
        out.manifest()["termination"] = trace.termination;
    }
    const int code = exit_for(statuses);
    out.manifest()["partial"] = code != Exit::ok;
    out.finish();
    return code;
}

int run_kickmap(const Common& c, bool audit, double grid_min_um, double grid_max_um, int grid_points)
{
    const RunConfig cfg = resolve(c);
    if (grid_points < 2 || !(grid_max_um > grid_min_um))
        throw ConfigError("kickmap grid needs >= 2 points and an increasing range", "grid", 0);
    std::vector<double> grid;
    for (int i = 0; i < grid_points; ++i)
        grid.push_back((grid_min_um + (grid_max_um - grid_min_um) * i / (grid_points - 1)) * 1e-6);
    const KickMap km(cfg.params);
    const auto cycles = km.find_fixed_cycles(grid);

    Outputs out(c.out_dir, "kickmap");
    out.manifest()["params"] = params_json(cfg);
    out.manifest()["grid"] = {{"min_m", grid.front()}, {"max_m", grid.back()}, {"points", grid_points}};
    out.manifest()["stability_criterion"] = "return-map slope |d a_min_out / d a_min_in| < 1";
    out.write("fixed_cycles.csv",
              [&](std::ostream& o) { csv::write_fixed_cycles(o, cfg.params.power, km, cycles, audit); });
    int stable = 0;
    for (const auto& f : cycles) stable += f.stable ? 1 : 0;
    out.manifest()["runs"].push_back({{"roots", cycles.size()}, {"stable_roots", stable}});
    out.finish();
    std::cout << cycles.size() << " roots, " << stable << " stable\n";
    return Exit::ok;
}

int run_compare(const Common& c, const SeedOptions& so, const std::vector<double>& powers, double tolerance)
{
    const RunConfig cfg = resolve(c);
    const EnsembleSpec spec = so.spec(c.workers);
    const ComparisonReport report = compare_oracles(powers, cfg.params, cfg.integrator, spec, tolerance);

    Outputs out(c.out_dir, "compare");
    out.manifest()["params"] = params_json(cfg);
    out.manifest()["powers"] = powers;
    out.manifest()["tolerance"] = tolerance;
    out.manifest()["seeds"] = seeds_json(spec);
    out.manifest()["full_branch_counts"] = report.full_counts;
    out.manifest()["kickmap_stable_counts"] = report.kickmap_counts;
    out.write("comparison.csv", [&](std::ostream& o) { csv::write_comparison(o, report); });
    out.finish();
    return Exit::ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multimode cavity optomechanics in the extremely-large-amplitude regime"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    Common common;

    auto* sim = app.add_subcommand("simulate", "integrate one trajectory and extract its limit cycle");
    add_common(sim, common);
    double periods = 220.0, seed_um = 0.25, window = 20.0;
    int stride = 10;
    std::optional<double> x0, p0;
    bool dump_modes = false;
    sim->add_option("--periods", periods, "duration [mechanical periods]")->capture_default_str();
    sim->add_option("--stride", stride, "keep every n-th step")->capture_default_str();
    sim->add_option("--seed-um", seed_um, "start at x = 0 with p = m omega_m a")->capture_default_str();
    sim->add_option("--x0-m", x0, "initial position [m]");
    sim->add_option("--p0-kgms", p0, "initial momentum [kg m/s]");
    sim->add_option("--window-periods", window, "limit-cycle window [periods]")->capture_default_str();
    sim->add_flag("--dump-modes", dump_modes, "write per-mode amplitudes");

    auto* sweep = app.add_subcommand("sweep", "power or Duffing-constant scan");
    Common sweep_common;
    add_common(sweep, sweep_common);
    SeedOptions sweep_seeds;
    add_seeds(sweep, sweep_seeds);
    std::string variable = "power", mode = "independent";
    double from = 0.5, to = 18.0, step = 0.5;
    sweep->add_option("--variable", variable, "power | duffing_alpha")->capture_default_str();
    sweep->add_option("--from", from, "first value (W or 1/m^2)")->capture_default_str();
    sweep->add_option("--to", to, "last value")->capture_default_str();
    sweep->add_option("--step", step, "increment")->capture_default_str();
    sweep->add_option("--mode", mode, "independent | continue-up | continue-down")->capture_default_str();

    auto* kick = app.add_subcommand("kickmap", "fixed cycles of the kick map");
    Common kick_common;
    add_common(kick, kick_common);
    bool audit = false;
    double grid_min = 0.1, grid_max = 6.0;
    int grid_points = 60;
    kick->add_flag("--audit", audit, "add energy-balance columns");
    kick->add_option("--grid-min-um", grid_min, "smallest a_min on the root grid [um]")->capture_default_str();
    kick->add_option("--grid-max-um", grid_max, "largest a_min on the root grid [um]")->capture_default_str();
    kick->add_option("--grid-points", grid_points, "root grid size")->capture_default_str();

    auto* cmp = app.add_subcommand("compare", "kick-map roots against full-simulation branches");
    Common cmp_common;
    add_common(cmp, cmp_common);
    SeedOptions cmp_seeds;
    add_seeds(cmp, cmp_seeds);
    std::vector<double> powers{7.0, 11.0, 15.0};
    double tolerance = 0.10;
    cmp->add_option("--powers", powers, "powers [W]")->delimiter(',')->capture_default_str();
    cmp->add_option("--tolerance", tolerance, "relative a_bar match tolerance")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Exit::ok : Exit::config;
    }

    try {
        if (*sim) return run_simulate(common, periods, stride, seed_um, x0, p0, dump_modes, window);
        if (*sweep) return run_sweep(sweep_common, sweep_seeds, variable, from, to, step, mode);
        if (*kick) return run_kickmap(kick_common, audit, grid_min, grid_max, grid_points);
        if (*cmp) return run_compare(cmp_common, cmp_seeds, powers, tolerance);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return Exit::config;
    } catch (const InvalidParameter& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return Exit::config;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return Exit::numerical;
    } catch (const GeometryError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return Exit::numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Exit::usage;
    }
    return Exit::usage;
}
