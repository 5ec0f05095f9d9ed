#ifndef SKROCK_INTEGRATORS_HPP
#define SKROCK_INTEGRATORS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "skrock/chebyshev.hpp"
#include "skrock/noise.hpp"
#include "skrock/spatial.hpp"

namespace skrock {

/// Stage recursion coefficients, indexed 1..s (index 0 unused).
struct StageCoefficients {
    ChebyshevParams params;
    MethodKind kind = MethodKind::SkRock;
    std::vector<double> mu, nu, kappa;

    int stages() const { return params.s; }
};

/// mu_1 = w1/w0 and, for i >= 2,
///   mu_i = 2 w1 T_{i-1}(w0)/T_i(w0), nu_i = 2 w0 T_{i-1}(w0)/T_i(w0), kappa_i = 1 - nu_i.
/// SK-ROCK additionally uses nu_1 = s w1/2 and kappa_1 = s mu_1.
inline StageCoefficients stage_coefficients(const ChebyshevParams& p, MethodKind kind) {
    if (kind != MethodKind::SkRock && kind != MethodKind::Variant)
        throw std::invalid_argument("stage_coefficients: not a Chebyshev method");
    const int s = p.s;
    StageCoefficients c;
    c.params = p;
    c.kind = kind;
    c.mu.assign(s + 1, 0.0);
    c.nu.assign(s + 1, 0.0);
    c.kappa.assign(s + 1, 0.0);

    std::vector<double> t(s + 1);
    t[0] = 1.0;
    t[1] = p.omega0;
    for (int i = 2; i <= s; ++i) t[i] = 2.0 * p.omega0 * t[i - 1] - t[i - 2];

    c.mu[1] = p.omega1 / p.omega0;
    if (kind == MethodKind::SkRock) {
        c.nu[1] = s * p.omega1 / 2.0;
        c.kappa[1] = s * c.mu[1];
    }
    for (int i = 2; i <= s; ++i) {
        c.mu[i] = 2.0 * p.omega1 * t[i - 1] / t[i];
        c.nu[i] = 2.0 * p.omega0 * t[i - 1] / t[i];
        c.kappa[i] = 1.0 - c.nu[i];
    }
    return c;
}

/// Smallest s with tau * lambda_max <= l_s(eta).
inline int select_stages(double tau, double lambda_max, double eta) {
    if (!(tau > 0.0) || !(lambda_max > 0.0))
        throw std::invalid_argument("select_stages: tau and lambda_max must be positive");
    const double target = tau * lambda_max;
    // l_s <= 2 s^2, so no s below sqrt(target / 2) can qualify.
    int s = std::max(1, static_cast<int>(std::floor(std::sqrt(target / 2.0))));
    while (make_params(s, eta).l_s < target) ++s;
    return s;
}

/// One-step map u <- A(tau M) u + B(tau M) g for a fixed operator, method,
/// step size and stage count. Owns its scratch space; not thread-safe.
class Stepper {
public:
    /// Chebyshev stepper from precomputed stage coefficients.
    Stepper(DiscreteOperator op, StageCoefficients coeffs, double tau)
        : op_(std::move(op)), kind_(coeffs.kind), tau_(tau), coeffs_(std::move(coeffs)) {
        init_buffers();
    }

    /// Any method; `stages` and `eta` are ignored by the Euler schemes.
    Stepper(DiscreteOperator op, MethodKind kind, double tau, int stages = 1,
            double eta = kDefaultEta)
        : op_(std::move(op)), kind_(kind), tau_(tau) {
        if (kind == MethodKind::SkRock || kind == MethodKind::Variant)
            coeffs_ = stage_coefficients(make_params(stages, eta), kind);
        init_buffers();
        if (kind == MethodKind::ImplicitEuler) factorize();
    }

    MethodKind kind() const { return kind_; }
    double tau() const { return tau_; }
    int stages() const {
        return (kind_ == MethodKind::SkRock || kind_ == MethodKind::Variant) ? coeffs_.stages() : 1;
    }
    const DiscreteOperator& op() const { return op_; }

    void advance(std::span<double> u, std::span<const double> g) {
        const auto n = static_cast<std::size_t>(op_.n_interior);
        if (u.size() != n || g.size() != n)
            throw std::invalid_argument("Stepper: expected vectors of length " + std::to_string(n));
        switch (kind_) {
            case MethodKind::SkRock: skrock(u, g); break;
            case MethodKind::Variant: variant(u, g); break;
            case MethodKind::ImplicitEuler: implicit_euler(u, g); break;
            case MethodKind::ExplicitEuler: explicit_euler(u, g); break;
        }
    }

private:
    void init_buffers() {
        const auto n = static_cast<std::size_t>(op_.n_interior);
        k0_.assign(n, 0.0);
        k1_.assign(n, 0.0);
        k2_.assign(n, 0.0);
        work_.assign(n, 0.0);
    }

    // K1 = K0 + tau mu1 M (K0 + nu1 G) + kappa1 G
    // Ki = mu_i tau M K_{i-1} + nu_i K_{i-1} + kappa_i K_{i-2}
    void skrock(std::span<double> u, std::span<const double> g) {
        const auto& c = coeffs_;
        const std::size_t n = u.size();
        auto& km2 = k0_;
        auto& km1 = k1_;
        auto& next = k2_;
        for (std::size_t i = 0; i < n; ++i) work_[i] = u[i] + c.nu[1] * g[i];
        apply(op_, work_, next);
        for (std::size_t i = 0; i < n; ++i) {
            km2[i] = u[i];
            km1[i] = u[i] + c.mu[1] * (tau_ * next[i]) + c.kappa[1] * g[i];
        }
        three_term_tail(std::span<const double>{});
        std::copy(k1_.begin(), k1_.end(), u.begin());
    }

    // K1 = K0 + mu1 (tau M K0 + G)
    // Ki = mu_i (tau M K_{i-1} + G) + nu_i K_{i-1} + kappa_i K_{i-2}
    void variant(std::span<double> u, std::span<const double> g) {
        const auto& c = coeffs_;
        const std::size_t n = u.size();
        std::copy(u.begin(), u.end(), k0_.begin());
        apply(op_, k0_, work_);
        for (std::size_t i = 0; i < n; ++i) k1_[i] = k0_[i] + c.mu[1] * (tau_ * work_[i] + g[i]);
        three_term_tail(g);
        std::copy(k1_.begin(), k1_.end(), u.begin());
    }

    // Stages 2..s; on entry k0_ = K0, k1_ = K1, on exit k1_ = K_s. A non-empty
    // g is added inside the mu_i bracket. Both branches round mu (tau M K) the
    // same way, so with G = 0 the two Chebyshev methods agree bitwise.
    void three_term_tail(std::span<const double> g) {
        const auto& c = coeffs_;
        const std::size_t n = k0_.size();
        const bool forced = !g.empty();
        for (int stage = 2; stage <= c.stages(); ++stage) {
            apply(op_, k1_, work_);
            const double mu = c.mu[stage], nu = c.nu[stage], kappa = c.kappa[stage];
            if (forced) {
                for (std::size_t i = 0; i < n; ++i)
                    k2_[i] = mu * (tau_ * work_[i] + g[i]) + nu * k1_[i] + kappa * k0_[i];
            } else {
                for (std::size_t i = 0; i < n; ++i)
                    k2_[i] = mu * (tau_ * work_[i]) + nu * k1_[i] + kappa * k0_[i];
            }
            std::swap(k0_, k1_);
            std::swap(k1_, k2_);
        }
    }

    // Thomas elimination for (I - tau M), factored once.
    void factorize() {
        const int m = op_.n_interior;
        upper_.assign(m, 0.0);
        inv_pivot_.assign(m, 0.0);
        double pivot = 1.0 - tau_ * op_.diag[0];
        inv_pivot_[0] = 1.0 / pivot;
        for (int i = 1; i < m; ++i) {
            upper_[i - 1] = -tau_ * op_.super[i - 1] * inv_pivot_[i - 1];
            pivot = 1.0 - tau_ * op_.diag[i] - (-tau_ * op_.sub[i - 1]) * upper_[i - 1];
            inv_pivot_[i] = 1.0 / pivot;
        }
    }

    void implicit_euler(std::span<double> u, std::span<const double> g) {
        const int m = op_.n_interior;
        work_[0] = (u[0] + g[0]) * inv_pivot_[0];
        for (int i = 1; i < m; ++i)
            work_[i] = (u[i] + g[i] + tau_ * op_.sub[i - 1] * work_[i - 1]) * inv_pivot_[i];
        for (int i = m - 2; i >= 0; --i) work_[i] -= upper_[i] * work_[i + 1];
        std::copy(work_.begin(), work_.end(), u.begin());
    }

    void explicit_euler(std::span<double> u, std::span<const double> g) {
        apply(op_, u, work_);
        for (std::size_t i = 0; i < u.size(); ++i) u[i] += tau_ * work_[i] + g[i];
    }

    DiscreteOperator op_;
    MethodKind kind_;
    double tau_;
    StageCoefficients coeffs_;
    std::vector<double> k0_, k1_, k2_, work_;
    std::vector<double> upper_, inv_pivot_;
};

inline std::vector<double> step_skrock(const DiscreteOperator& op, const StageCoefficients& coeffs,
                                       std::span<const double> u_n, std::span<const double> g_n,
                                       double tau) {
    if (coeffs.kind != MethodKind::SkRock)
        throw std::invalid_argument("step_skrock: coefficients are not SK-ROCK coefficients");
    Stepper stepper(op, coeffs, tau);
    std::vector<double> u(u_n.begin(), u_n.end());
    stepper.advance(u, g_n);
    return u;
}

inline std::vector<double> step_variant(const DiscreteOperator& op, const StageCoefficients& coeffs,
                                        std::span<const double> u_n, std::span<const double> g_n,
                                        double tau) {
    if (coeffs.kind != MethodKind::Variant)
        throw std::invalid_argument("step_variant: coefficients are not variant coefficients");
    Stepper stepper(op, coeffs, tau);
    std::vector<double> u(u_n.begin(), u_n.end());
    stepper.advance(u, g_n);
    return u;
}

inline std::vector<double> step_implicit_euler(const DiscreteOperator& op,
                                               std::span<const double> u_n,
                                               std::span<const double> g_n, double tau) {
    Stepper stepper(op, MethodKind::ImplicitEuler, tau);
    std::vector<double> u(u_n.begin(), u_n.end());
    stepper.advance(u, g_n);
    return u;
}

inline std::vector<double> step_explicit_euler(const DiscreteOperator& op,
                                               std::span<const double> u_n,
                                               std::span<const double> g_n, double tau) {
    Stepper stepper(op, MethodKind::ExplicitEuler, tau);
    std::vector<double> u(u_n.begin(), u_n.end());
    stepper.advance(u, g_n);
    return u;
}

// ---------------------------------------------------------------------------
// Trajectories

struct AutoStages {};
struct FixedStages {
    int s = 1;
};
using StagePolicy = std::variant<AutoStages, FixedStages>;

struct SolveConfig {
    MethodKind method = MethodKind::SkRock;
    double tau = 0.01;
    double eta = kDefaultEta;
    double t_final = 1.0;
    StagePolicy stage_policy = AutoStages{};
    std::uint64_t master_seed = 0;
    std::uint64_t trajectory = 0;
    std::function<double(double)> initial_condition = [](double) { return 0.0; };
    int snapshot_every = 0;  ///< 0: keep only the initial and final states
};

struct Trajectory {
    int stages = 1;
    std::int64_t steps = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> states;
};

/// Raised when a trajectory produces a non-finite value.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(std::int64_t step, const std::string& what)
        : std::runtime_error(what), step_(step) {}
    std::int64_t step() const { return step_; }

private:
    std::int64_t step_;
};

/// Stage count implied by the policy, the method and the operator.
inline int resolve_stages(MethodKind method, const StagePolicy& policy, double tau,
                          const DiscreteOperator& op, double eta) {
    if (method != MethodKind::SkRock && method != MethodKind::Variant) return 1;
    if (const auto* fixed = std::get_if<FixedStages>(&policy)) {
        if (fixed->s < 1) throw std::invalid_argument("fixed stage count must be >= 1");
        return fixed->s;
    }
    return select_stages(tau, op.lambda_max_bound, eta);
}

/// Number of steps n with n * tau == t_final up to rounding.
inline std::int64_t step_count(double t_final, double tau) {
    const double ratio = t_final / tau;
    const auto n = static_cast<std::int64_t>(std::llround(ratio));
    if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument("t_final must be a positive integer multiple of tau");
    return n;
}

inline bool all_finite(std::span<const double> u) {
    for (double v : u)
        if (!std::isfinite(v)) return false;
    return true;
}

/// Sets g = tau f(u) + sigma g(u) dW, the stabilized forcing slot.
template <class Drift>
void assemble_forcing(Drift& f, const NoiseSpec& spec, double tau, std::span<const double> u,
                      std::span<const double> dW, std::span<double> g) {
    if (dW.empty()) {
        for (std::size_t i = 0; i < u.size(); ++i) g[i] = tau * f(u[i]);
        return;
    }
    apply_diffusion(spec, u, dW, g);
    for (std::size_t i = 0; i < u.size(); ++i) g[i] += tau * f(u[i]);
}

/// Integrates du = (M u + f(u)) dt + sigma g(u) dW from the initial condition
/// to t_final with a constant step, using the noise path keyed by
/// (master_seed, trajectory) at fine step tau.
template <class Drift>
Trajectory integrate(const SolveConfig& config, const DiscreteOperator& op, const NoiseSpec& spec,
                     Drift&& f) {
    if (!(config.tau > 0.0) || config.tau > 1.0)
        throw std::invalid_argument("integrate: tau must lie in (0, 1]");
    const std::int64_t steps = step_count(config.t_final, config.tau);
    const int stages = resolve_stages(config.method, config.stage_policy, config.tau, op, config.eta);
    Stepper stepper(op, config.method, config.tau, stages, config.eta);

    const int n = op.n_interior;
    std::vector<double> u(n), g(n), dW(n), raw(n);
    for (int i = 0; i < n; ++i) u[i] = config.initial_condition(op.node(i));

    const bool noisy = spec.sigma != 0.0;
    NoisePath path(config.master_seed, config.trajectory, config.tau, steps, n);
    std::optional<NoiseShaper> shaper;
    if (noisy) shaper.emplace(spec, op);

    Trajectory out;
    out.stages = stages;
    out.steps = steps;
    out.times.push_back(0.0);
    out.states.push_back(u);

    for (std::int64_t step = 0; step < steps; ++step) {
        if (noisy) {
            path.fine_increment(step, raw);
            shaper->shape(raw, dW);
            assemble_forcing(f, spec, config.tau, u, dW, g);
        } else {
            assemble_forcing(f, spec, config.tau, u, std::span<const double>{}, g);
        }
        stepper.advance(u, g);
        if (!all_finite(u))
            throw NumericalFailure(step, "non-finite state at step " + std::to_string(step) +
                                             " (" + std::string(to_string(config.method)) +
                                             ", tau=" + std::to_string(config.tau) +
                                             ", s=" + std::to_string(stages) +
                                             "); check the stability condition");
        const bool last = step + 1 == steps;
        if (last || (config.snapshot_every > 0 && (step + 1) % config.snapshot_every == 0)) {
            out.times.push_back(static_cast<double>(step + 1) * config.tau);
            out.states.push_back(u);
        }
    }
    return out;
}

}  // namespace skrock

#endif
