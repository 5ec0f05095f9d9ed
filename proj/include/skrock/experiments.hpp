#ifndef SKROCK_EXPERIMENTS_HPP
#define SKROCK_EXPERIMENTS_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "skrock/chebyshev.hpp"
#include "skrock/integrators.hpp"
#include "skrock/noise.hpp"
#include "skrock/spatial.hpp"

namespace skrock {

/// Equation presets of the convergence studies, all on (0,1) with a = 1,
/// homogeneous Dirichlet conditions and u0 = sin(2 pi x).
enum class Preset {
    AdditiveHeat,        ///< f(u) = -u - sin u, g = 1, white noise
    MultiplicativeHeat,  ///< f(u) = -u - sin u, g(u) = u, white noise
    Deterministic,       ///< f(u) = -u - sin u, sigma = 0
    RegularNoise,        ///< f = 0, g = 1, spectral decay q_m = lambda_m^{-r}
};

inline std::string_view to_string(Preset p) {
    switch (p) {
        case Preset::AdditiveHeat: return "heat-additive";
        case Preset::MultiplicativeHeat: return "heat-multiplicative";
        case Preset::Deterministic: return "deterministic";
        case Preset::RegularNoise: return "regular-noise";
    }
    return "unknown";
}

inline Preset parse_preset(std::string_view name) {
    if (name == "heat-additive" || name == "fig2a" || name == "additive") return Preset::AdditiveHeat;
    if (name == "heat-multiplicative" || name == "fig2b" || name == "multiplicative")
        return Preset::MultiplicativeHeat;
    if (name == "deterministic" || name == "det-time" || name == "det-space")
        return Preset::Deterministic;
    if (name == "regular-noise" || name == "regular") return Preset::RegularNoise;
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

inline double preset_initial_condition(double x) { return std::sin(2.0 * std::numbers::pi * x); }

/// Pointwise drift of a preset.
struct PresetDrift {
    bool zero = false;
    double operator()(double u) const { return zero ? 0.0 : -u - std::sin(u); }
};

inline PresetDrift preset_drift(Preset p) { return PresetDrift{p == Preset::RegularNoise}; }

struct ExperimentPlan {
    Preset preset = Preset::AdditiveHeat;
    int n = 100;  ///< grid intervals
    double t_final = 0.1;
    int j_min = 4;  ///< ladder tau_j = t_final * 2^-j, j in [j_min, j_max]
    int j_max = 9;
    int j_ref = 12;
    int samples = 2000;
    std::vector<MethodKind> methods = {MethodKind::SkRock, MethodKind::Variant,
                                       MethodKind::ImplicitEuler};
    MethodKind reference = MethodKind::SkRock;
    std::uint64_t master_seed = 20200101;
    double eta = kDefaultEta;
    double sigma = 1.0;
    double spectral_r = 1.0;
    int threads = 1;
    /// Adds a ladder level at j_ref, which must reproduce the reference exactly.
    bool include_reference_level = false;

    // Spatial study: h = 2^-k, k in [k_min, k_max], reference at k_ref.
    int space_k_min = 4;
    int space_k_max = 7;
    int space_k_ref = 10;
    double space_tau = 1e-5;

    void validate() const {
        if (n < 2) throw std::invalid_argument("plan: grid needs n >= 2");
        if (!(t_final > 0.0) || t_final > 1.0) throw std::invalid_argument("plan: t_final in (0,1]");
        if (j_min < 0 || j_min > j_max) throw std::invalid_argument("plan: need 0 <= j_min <= j_max");
        if (j_ref <= j_max) throw std::invalid_argument("plan: reference level must exceed j_max");
        if (j_ref > 30) throw std::invalid_argument("plan: j_ref too large");
        if (samples < 1) throw std::invalid_argument("plan: need at least one sample");
        if (methods.empty()) throw std::invalid_argument("plan: no methods");
        if (threads < 1) throw std::invalid_argument("plan: threads must be >= 1");
        if (sigma < 0.0) throw std::invalid_argument("plan: sigma must be >= 0");
        make_params(1, eta);
        if (space_k_min < 1 || space_k_min > space_k_max || space_k_ref <= space_k_max)
            throw std::invalid_argument("plan: spatial ladder needs 1 <= k_min <= k_max < k_ref");
    }

    NoiseSpec noise() const {
        NoiseSpec spec;
        spec.sigma = preset == Preset::Deterministic ? 0.0 : sigma;
        spec.multiplicative = preset == Preset::MultiplicativeHeat;
        if (preset == Preset::RegularNoise) spec.structure = SpectralDecay{spectral_r};
        return spec;
    }

    double tau(int j) const { return std::ldexp(t_final, -j); }
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least-squares line through (log x, log y). Empty for fewer than two
/// points, non-positive values or identical abscissae.
inline std::optional<LineFit> fit_slope(std::span<const std::pair<double, double>> points) {
    if (points.size() < 2) return std::nullopt;
    double sx = 0, sy = 0;
    for (const auto& [x, y] : points) {
        if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) return std::nullopt;
        sx += std::log(x);
        sy += std::log(y);
    }
    const double k = static_cast<double>(points.size());
    const double mx = sx / k, my = sy / k;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& [x, y] : points) {
        const double dx = std::log(x) - mx, dy = std::log(y) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) return std::nullopt;
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

struct ConvergenceCell {
    MethodKind method = MethodKind::SkRock;
    double tau = 0.0;
    double h = 0.0;
    int stages = 1;
    double rms_error = 0.0;
    double mc_stderr = 0.0;
    int n_samples = 0;
    int n_aborts = 0;
    double wall_seconds = 0.0;
};

struct SlopeRow {
    MethodKind method = MethodKind::SkRock;
    std::optional<LineFit> fit;
};

struct ConvergenceReport {
    std::string study;  ///< "time" or "space"
    Preset preset = Preset::AdditiveHeat;
    std::vector<ConvergenceCell> cells;
    std::vector<SlopeRow> slopes;
    int trajectories = 0;
    int reference_aborts = 0;

    /// Trajectories lost in any cell, as a fraction of the total.
    double abort_fraction() const {
        int worst = reference_aborts;
        for (const auto& c : cells) worst = std::max(worst, c.n_aborts);
        return trajectories > 0 ? static_cast<double>(worst) / trajectories : 0.0;
    }
    bool failed() const { return abort_fraction() > 0.01; }

    const SlopeRow* slope(MethodKind m) const {
        for (const auto& row : slopes)
            if (row.method == m) return &row;
        return nullptr;
    }
};

namespace detail {

/// rms = sqrt(mean e^2), standard error by the delta method.
inline void summarize(const std::vector<double>& squared, ConvergenceCell& cell) {
    const double m = static_cast<double>(squared.size());
    cell.n_samples = static_cast<int>(squared.size());
    if (squared.empty()) return;
    double mean = 0.0;
    for (double v : squared) mean += v;
    mean /= m;
    double var = 0.0;
    for (double v : squared) var += (v - mean) * (v - mean);
    var = squared.size() > 1 ? var / (m - 1.0) : 0.0;
    cell.rms_error = std::sqrt(mean);
    cell.mc_stderr = cell.rms_error > 0.0 ? std::sqrt(var / m) / (2.0 * cell.rms_error) : 0.0;
}

inline double grid_distance_squared(std::span<const double> a, std::span<const double> b, double h) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return h * acc;
}

/// Fits each method's cells; cells at `skip_tau` (the reference level) are
/// left out of the fit.
inline void fit_by_method(ConvergenceReport& report, const std::vector<MethodKind>& methods,
                          bool against_h, double skip_tau = -1.0) {
    for (MethodKind m : methods) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& c : report.cells)
            if (c.method == m && c.tau != skip_tau)
                pts.emplace_back(against_h ? c.h : c.tau, c.rms_error);
        report.slopes.push_back({m, fit_slope(pts)});
    }
}

}  // namespace detail

/// Strong errors E|u_ref(T) - u_tau(T)|^2)^{1/2} over the step ladder.
///
/// Each trajectory draws one fine path at tau_ref; every ladder level sees the
/// exact dyadic sums of that path, so reference and test solutions share one
/// Brownian realization. Per-trajectory results are reduced in trajectory
/// order, making the report independent of the thread count.
inline ConvergenceReport run_strong_convergence(const ExperimentPlan& plan) {
    plan.validate();
    const DiscreteOperator op = assemble_laplacian(plan.n);
    const NoiseSpec spec = plan.noise();
    const PresetDrift drift = preset_drift(plan.preset);
    const bool noisy = spec.sigma != 0.0;
    const int width = op.n_interior;
    const int samples = noisy ? plan.samples : 1;

    std::vector<int> ladder;
    for (int j = plan.j_min; j <= plan.j_max; ++j) ladder.push_back(j);
    if (plan.include_reference_level) ladder.push_back(plan.j_ref);
    const int max_level = plan.j_ref - plan.j_min;
    const std::int64_t fine_steps = std::int64_t{1} << plan.j_ref;
    const double tau_ref = plan.tau(plan.j_ref);

    const NoiseShaper shaper(spec, op);
    std::vector<double> u0(width);
    for (int i = 0; i < width; ++i) u0[i] = preset_initial_condition(op.node(i));

    // Cell c = method index * ladder size + ladder index.
    const int n_methods = static_cast<int>(plan.methods.size());
    const int n_cells = n_methods * static_cast<int>(ladder.size());
    std::vector<int> stages(n_cells);
    for (int mi = 0; mi < n_methods; ++mi)
        for (std::size_t li = 0; li < ladder.size(); ++li)
            stages[mi * ladder.size() + li] =
                resolve_stages(plan.methods[mi], AutoStages{}, plan.tau(ladder[li]), op, plan.eta);
    const int ref_stages = resolve_stages(plan.reference, AutoStages{}, tau_ref, op, plan.eta);

    std::vector<double> squared(static_cast<std::size_t>(samples) * n_cells, 0.0);
    std::vector<char> cell_ok(static_cast<std::size_t>(samples) * n_cells, 1);
    std::vector<char> ref_ok(samples, 1);
    std::vector<double> seconds(static_cast<std::size_t>(samples) * n_cells, 0.0);

    auto worker_state = [&] {
        struct State {
            Stepper reference;
            std::vector<Stepper> steppers;
        };
        State st{Stepper(op, plan.reference, tau_ref, ref_stages, plan.eta), {}};
        st.steppers.reserve(n_cells);
        for (int mi = 0; mi < n_methods; ++mi)
            for (std::size_t li = 0; li < ladder.size(); ++li)
                st.steppers.emplace_back(op, plan.methods[mi], plan.tau(ladder[li]),
                                         stages[mi * ladder.size() + li], plan.eta);
        return st;
    };

    auto run_trajectory = [&](int traj, auto& st) {
        NoisePath path(plan.master_seed, static_cast<std::uint64_t>(traj), tau_ref, fine_steps, width);
        CoarseningStream stream(max_level, width);
        std::vector<double> raw(width, 0.0), dW(width), g(width);
        std::vector<double> u_ref = u0;
        std::vector<std::vector<double>> u(n_cells, u0);
        std::vector<int> level_to_ladder(max_level + 1, -1);
        for (std::size_t li = 0; li < ladder.size(); ++li)
            level_to_ladder[plan.j_ref - ladder[li]] = static_cast<int>(li);
        double* cell_seconds = seconds.data() + static_cast<std::size_t>(traj) * n_cells;

        auto on_window = [&](int level, std::span<const double> inc) {
            const bool is_ref = level == 0;
            const int li = level_to_ladder[level];
            if (!is_ref && li < 0) return;
            std::span<const double> noise;
            if (noisy) {
                shaper.shape(inc, dW);
                noise = dW;
            }
            if (is_ref) {
                assemble_forcing(drift, spec, tau_ref, u_ref, noise, g);
                st.reference.advance(u_ref, g);
            }
            if (li < 0) return;
            const double tau = plan.tau(ladder[li]);
            for (int mi = 0; mi < n_methods; ++mi) {
                const int c = mi * static_cast<int>(ladder.size()) + li;
                const auto start = std::chrono::steady_clock::now();
                assemble_forcing(drift, spec, tau, u[c], noise, g);
                st.steppers[c].advance(u[c], g);
                cell_seconds[c] +=
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            }
        };

        for (std::int64_t k = 0; k < fine_steps; ++k) {
            if (noisy) path.fine_increment(k, raw);
            stream.push(raw, on_window);
        }

        const std::size_t base = static_cast<std::size_t>(traj) * n_cells;
        ref_ok[traj] = all_finite(u_ref);
        for (int c = 0; c < n_cells; ++c) {
            const bool ok = ref_ok[traj] && all_finite(u[c]);
            cell_ok[base + c] = ok;
            squared[base + c] = ok ? detail::grid_distance_squared(u[c], u_ref, op.h) : 0.0;
        }
    };

    const int threads = std::max(1, std::min(plan.threads, samples));
    if (threads == 1) {
        auto st = worker_state();
        for (int traj = 0; traj < samples; ++traj) run_trajectory(traj, st);
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                auto st = worker_state();
                for (int traj = t; traj < samples; traj += threads) run_trajectory(traj, st);
            });
    }

    ConvergenceReport report;
    report.study = "time";
    report.preset = plan.preset;
    report.trajectories = samples;
    for (int traj = 0; traj < samples; ++traj) report.reference_aborts += ref_ok[traj] ? 0 : 1;
    for (int mi = 0; mi < n_methods; ++mi) {
        for (std::size_t li = 0; li < ladder.size(); ++li) {
            const int c = mi * static_cast<int>(ladder.size()) + static_cast<int>(li);
            ConvergenceCell cell;
            cell.method = plan.methods[mi];
            cell.tau = plan.tau(ladder[li]);
            cell.h = op.h;
            cell.stages = stages[c];
            std::vector<double> values;
            values.reserve(samples);
            for (int traj = 0; traj < samples; ++traj) {
                const std::size_t idx = static_cast<std::size_t>(traj) * n_cells + c;
                cell.wall_seconds += seconds[idx];
                if (cell_ok[idx])
                    values.push_back(squared[idx]);
                else
                    ++cell.n_aborts;
            }
            detail::summarize(values, cell);
            report.cells.push_back(cell);
        }
    }
    detail::fit_by_method(report, plan.methods, false, plan.include_reference_level ? tau_ref : -1.0);
    return report;
}

/// Spatial errors of the deterministic preset at fixed tiny tau, against the
/// finest grid sampled at the shared coarse nodes.
inline ConvergenceReport run_spatial_convergence(const ExperimentPlan& plan) {
    plan.validate();
    if (plan.preset != Preset::Deterministic)
        throw std::invalid_argument("spatial convergence runs on the deterministic preset");
    const PresetDrift drift = preset_drift(plan.preset);
    const NoiseSpec spec = plan.noise();

    // Every grid reuses the reference's method, tau and stage count, so the
    // time-discretization error cancels against the reference.
    auto solve = [&](MethodKind method, int k, StagePolicy policy) {
        const DiscreteOperator op = assemble_laplacian(1 << k);
        SolveConfig cfg;
        cfg.method = method;
        cfg.tau = plan.space_tau;
        cfg.eta = plan.eta;
        cfg.t_final = plan.t_final;
        cfg.stage_policy = policy;
        cfg.initial_condition = preset_initial_condition;
        const auto start = std::chrono::steady_clock::now();
        auto traj = integrate(cfg, op, spec, drift);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return std::make_tuple(std::move(traj.states.back()), traj.stages, secs);
    };

    ConvergenceReport report;
    report.study = "space";
    report.preset = plan.preset;
    report.trajectories = 1;
    for (MethodKind method : plan.methods) {
        std::vector<double> reference;
        int ref_stages = 1;
        try {
            auto [u, s, secs] = solve(method, plan.space_k_ref, AutoStages{});
            (void)secs;
            reference = std::move(u);
            ref_stages = s;
        } catch (const NumericalFailure&) {
            ++report.reference_aborts;
        }
        for (int k = plan.space_k_min; k <= plan.space_k_max; ++k) {
            ConvergenceCell cell;
            cell.method = method;
            cell.tau = plan.space_tau;
            cell.h = std::ldexp(1.0, -k);
            cell.stages = ref_stages;
            if (reference.empty()) {
                cell.n_aborts = 1;
                report.cells.push_back(cell);
                continue;
            }
            try {
                const auto [u, s, secs] = solve(method, k, FixedStages{ref_stages});
                const int stride = 1 << (plan.space_k_ref - k);
                std::vector<double> ref_at_nodes(u.size());
                for (std::size_t i = 0; i < u.size(); ++i)
                    ref_at_nodes[i] = reference[(i + 1) * stride - 1];
                detail::summarize({detail::grid_distance_squared(u, ref_at_nodes, cell.h)}, cell);
                cell.stages = s;
                cell.wall_seconds = secs;
            } catch (const NumericalFailure&) {
                cell.n_aborts = 1;
            }
            report.cells.push_back(cell);
        }
    }
    detail::fit_by_method(report, plan.methods, true);
    return report;
}

/// Strong convergence for additive spatially regular noise with F = 0.
inline ConvergenceReport run_regular_noise(ExperimentPlan plan) {
    plan.preset = Preset::RegularNoise;
    return run_strong_convergence(plan);
}

}  // namespace skrock

#endif
