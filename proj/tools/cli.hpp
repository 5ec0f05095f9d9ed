#ifndef SKROCK_TOOLS_CLI_HPP
#define SKROCK_TOOLS_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skrock/chebyshev.hpp"
#include "skrock/experiments.hpp"
#include "skrock/integrators.hpp"
#include "skrock/io.hpp"
#include "skrock/spatial.hpp"
#include "skrock/verify.hpp"

namespace skrock::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNumerical = 2, kIo = 3 };

/// Resolved command line. Unset optionals fall back to the experiment plan
/// defaults or to the subcommand's own defaults.
struct RunConfig {
    std::string subcommand;
    std::string preset = "heat-additive";
    std::uint64_t seed = ExperimentPlan{}.master_seed;
    int samples = ExperimentPlan{}.samples;
    int grid = ExperimentPlan{}.n;
    double eta = kDefaultEta;
    std::vector<std::string> methods;
    std::string out = "out";
    int threads = ExperimentPlan{}.threads;
    std::optional<double> tau;
    std::optional<double> t_final;
    std::optional<double> sigma;
    std::optional<int> stages;
    int j_min = ExperimentPlan{}.j_min;
    int j_max = ExperimentPlan{}.j_max;
    int j_ref = ExperimentPlan{}.j_ref;
    std::string reference = "skrock";
    std::string study;  ///< "time" or "space"; empty picks by preset name
    int snapshots = 100;
    int s_max = ScanOptions{}.s_max;
    std::optional<int> points;  ///< scan default 10000, curve default 2001
};

namespace detail {

inline std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
    return out;
}

inline Metadata echo(const RunConfig& c) {
    Metadata m{{"command", c.subcommand},
               {"preset", c.preset},
               {"seed", std::to_string(c.seed)},
               {"samples", std::to_string(c.samples)},
               {"grid", std::to_string(c.grid)},
               {"eta", format_double(c.eta)},
               {"methods", join(c.methods)},
               {"threads", std::to_string(c.threads)}};
    if (c.tau) m.emplace_back("tau", format_double(*c.tau));
    if (c.t_final) m.emplace_back("t_final", format_double(*c.t_final));
    if (c.sigma) m.emplace_back("sigma", format_double(*c.sigma));
    if (c.stages) m.emplace_back("stages_requested", std::to_string(*c.stages));
    return m;
}

inline std::vector<MethodKind> parse_methods(const std::vector<std::string>& names,
                                             std::vector<MethodKind> fallback) {
    if (names.empty()) return fallback;
    std::vector<MethodKind> out;
    for (const auto& n : names) out.push_back(parse_method(n));
    return out;
}

inline std::filesystem::path out_file(const RunConfig& c, const std::string& name) {
    return std::filesystem::path(c.out) / name;
}

}  // namespace detail

inline int cmd_simulate(RunConfig c, std::ostream& out) {
    const Preset preset = parse_preset(c.preset);
    const auto methods = detail::parse_methods(
        c.methods, {MethodKind::SkRock, MethodKind::Variant, MethodKind::ImplicitEuler});
    c.methods.clear();
    for (auto m : methods) c.methods.emplace_back(to_string(m));

    ExperimentPlan plan;
    plan.preset = preset;
    if (c.sigma) plan.sigma = *c.sigma;
    const NoiseSpec spec = plan.noise();
    const PresetDrift drift = preset_drift(preset);
    const DiscreteOperator op = assemble_laplacian(c.grid);

    SolveConfig cfg;
    cfg.tau = c.tau.value_or(1.0 / c.grid);
    cfg.t_final = c.t_final.value_or(1.0);
    cfg.eta = c.eta;
    cfg.master_seed = c.seed;
    cfg.trajectory = 0;
    cfg.initial_condition = preset_initial_condition;
    if (c.stages) cfg.stage_policy = FixedStages{*c.stages};
    const auto steps = step_count(cfg.t_final, cfg.tau);
    cfg.snapshot_every = static_cast<int>(std::max<std::int64_t>(1, steps / std::max(1, c.snapshots)));

    const auto nodes = op.nodes();
    const Metadata meta = detail::echo(c);
    std::vector<std::string> names;
    std::vector<std::vector<double>> finals;
    for (MethodKind m : methods) {
        cfg.method = m;
        const Trajectory traj = integrate(cfg, op, spec, drift);
        const std::string name(to_string(m));
        const auto path = detail::out_file(c, "trajectory_" + name + ".csv");
        write_atomic(path, to_string(trajectory_document(traj, nodes, meta)));
        out << name << ": s=" << traj.stages << " steps=" << traj.steps << " -> " << path.string()
            << '\n';
        names.push_back(name);
        finals.push_back(traj.states.back());
    }
    const auto path = detail::out_file(c, "final_profile.csv");
    write_atomic(path, to_string(profile_document(nodes, names, finals, meta)));
    out << "final profiles -> " << path.string() << '\n';
    return kOk;
}

inline int cmd_converge(RunConfig c, std::ostream& out) {
    ExperimentPlan plan;
    plan.preset = parse_preset(c.preset);
    plan.n = c.grid;
    plan.samples = c.samples;
    plan.master_seed = c.seed;
    plan.eta = c.eta;
    plan.threads = c.threads;
    plan.j_min = c.j_min;
    plan.j_max = c.j_max;
    plan.j_ref = c.j_ref;
    plan.reference = parse_method(c.reference);
    plan.methods = detail::parse_methods(c.methods, plan.methods);
    if (c.t_final) plan.t_final = *c.t_final;
    if (c.sigma) plan.sigma = *c.sigma;
    if (c.tau) plan.space_tau = *c.tau;
    c.methods.clear();
    for (auto m : plan.methods) c.methods.emplace_back(to_string(m));

    std::string study = c.study;
    if (study.empty()) study = c.preset == "det-space" ? "space" : "time";
    if (study != "time" && study != "space")
        throw std::invalid_argument("study must be 'time' or 'space'");

    ConvergenceReport report;
    if (study == "space")
        report = run_spatial_convergence(plan);
    else if (plan.preset == Preset::RegularNoise)
        report = run_regular_noise(plan);
    else
        report = run_strong_convergence(plan);

    Metadata meta = detail::echo(c);
    set_meta(meta, "reference", c.reference);
    set_meta(meta, "ladder", study == "space"
                                    ? "h=2^-k, k=" + std::to_string(plan.space_k_min) + ".." +
                                          std::to_string(plan.space_k_max) +
                                          ", ref k=" + std::to_string(plan.space_k_ref)
                                    : "tau=T*2^-j, j=" + std::to_string(plan.j_min) + ".." +
                                          std::to_string(plan.j_max) +
                                          ", ref j=" + std::to_string(plan.j_ref));
    const auto path =
        detail::out_file(c, "converge_" + std::string(to_string(plan.preset)) + "_" + study + ".csv");
    write_atomic(path, to_string(convergence_document(report, meta)));

    for (const auto& row : report.slopes) {
        out << std::left << std::setw(16) << to_string(row.method) << " slope ";
        if (row.fit)
            out << std::setprecision(4) << row.fit->slope << "  r2 " << row.fit->r2;
        else
            out << "undefined";
        out << '\n';
    }
    out << "report -> " << path.string() << '\n';
    if (report.failed()) {
        out << "abort fraction " << report.abort_fraction() << " exceeds 1%\n";
        return kNumerical;
    }
    return kOk;
}

inline int cmd_verify(RunConfig c, std::ostream& out) {
    if (c.methods.empty())
        c.methods = {"skrock", "variant", "implicit-euler", "explicit-euler", "crank-nicolson"};
    ScanOptions opt;
    opt.s_max = c.s_max;
    opt.grid_points = c.points.value_or(opt.grid_points);
    SemigroupOptions sg;
    sg.s_max = std::min(sg.s_max, c.s_max);

    std::vector<ConditionReport> reports;
    for (const auto& name : c.methods) {
        const auto family = StabilityFamily::from_name(name, c.eta);
        for (auto& r : check_all(family, {1.0, 1e-1, 1e-2, 1e-3}, opt, sg)) {
            out << std::left << std::setw(16) << r.family << std::setw(14) << r.condition_id
                << (r.pass ? "pass" : "FAIL") << "  sup " << std::setprecision(6) << r.sup_value
                << '\n';
            reports.push_back(std::move(r));
        }
    }
    const auto path = detail::out_file(c, "verify.csv");
    write_atomic(path, to_string(verify_document(reports, detail::echo(c))));
    out << "report -> " << path.string() << '\n';
    return kOk;
}

inline int cmd_stability_curve(RunConfig c, std::ostream& out) {
    const int s = c.stages.value_or(7);
    const auto curve = stability_curve(s, c.eta, c.points.value_or(2001));
    Metadata meta = detail::echo(c);
    set_meta(meta, "s", std::to_string(s));
    set_meta(meta, "l_s", format_double(make_params(s, c.eta).l_s));
    const auto path = detail::out_file(c, "stability_curve_s" + std::to_string(s) + ".csv");
    write_atomic(path, to_string(curve_document(curve, meta)));
    out << curve.size() << " points -> " << path.string() << '\n';
    return kOk;
}

/// Parses the arguments and runs one subcommand. Returns the process exit
/// code; diagnostics go to `err`.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Stabilized Chebyshev integrators for stiff stochastic heat equations", "skrock"};
    app.require_subcommand(1);
    app.fallthrough();
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "Flat key = value file with option defaults");

    app.add_option("--preset", c.preset,
                   "heat-additive | fig2a, heat-multiplicative | fig2b, det-time, det-space, "
                   "regular-noise")
        ->capture_default_str();
    app.add_option("--seed", c.seed, "Master seed")->capture_default_str();
    app.add_option("--samples", c.samples, "Monte Carlo trajectories")->capture_default_str();
    app.add_option("--grid", c.grid, "Grid intervals N (h = 1/N)")->capture_default_str();
    app.add_option("--eta", c.eta, "Damping parameter")->capture_default_str();
    app.add_option("--methods", c.methods, "Comma-separated method list")->delimiter(',');
    app.add_option("--out", c.out, "Output directory")->capture_default_str();
    app.add_option("--threads", c.threads, "Worker threads")->capture_default_str();
    app.add_option("--tau", c.tau,
                   "Time step (simulate; default 1/N) or spatial-study step (converge)");
    app.add_option("--t-final", c.t_final, "Final time (simulate 1, converge 0.1)");
    app.add_option("--sigma", c.sigma, "Noise amplitude (default 1)");
    app.add_option("--stages", c.stages, "Stage count (simulate: fixed s; stability-curve: 7)");
    app.add_option("--j-min", c.j_min, "Coarsest ladder level")->capture_default_str();
    app.add_option("--j-max", c.j_max, "Finest ladder level")->capture_default_str();
    app.add_option("--j-ref", c.j_ref, "Reference level")->capture_default_str();
    app.add_option("--reference", c.reference, "Reference method")->capture_default_str();
    app.add_option("--study", c.study, "time or space (default from preset)");
    app.add_option("--snapshots", c.snapshots, "Snapshots per trajectory file")
        ->capture_default_str();
    app.add_option("--s-max", c.s_max, "Largest stage count scanned")->capture_default_str();
    app.add_option("--points", c.points, "Grid points per scan (10000) or curve (2001)");

    app.add_subcommand("simulate", "Write sample trajectories, one file per method");
    app.add_subcommand("converge", "Run a convergence study and write the error table");
    app.add_subcommand("verify", "Scan the stability conditions of each method");
    app.add_subcommand("stability-curve", "Write A_s and B_s samples along the real axis");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    c.subcommand = app.get_subcommands().front()->get_name();

    try {
        if (c.subcommand == "simulate") return cmd_simulate(c, out);
        if (c.subcommand == "converge") return cmd_converge(c, out);
        if (c.subcommand == "verify") return cmd_verify(c, out);
        return cmd_stability_curve(c, out);
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const NumericalFailure& e) {
        err << "numerical failure at step " << e.step() << ": " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
}

}  // namespace skrock::cli

#endif
