#ifndef SKROCK_VERIFY_HPP
#define SKROCK_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "skrock/chebyshev.hpp"

namespace skrock {

/// Stability-function pair (A_s, B_s) with its interval length L_s, covering
/// the Chebyshev methods and the classical one-stage reference schemes.
class StabilityFamily {
public:
    enum class Kind { SkRock, Variant, ImplicitEuler, ExplicitEuler, CrankNicolson };

    /// Infinite stability intervals are scanned up to this length.
    static constexpr double kTruncation = 1e8;

    static StabilityFamily chebyshev(MethodKind kind, double eta) {
        if (kind != MethodKind::SkRock && kind != MethodKind::Variant)
            throw std::invalid_argument("StabilityFamily::chebyshev: not a Chebyshev method");
        make_params(1, eta);  // validates eta
        return StabilityFamily(kind == MethodKind::SkRock ? Kind::SkRock : Kind::Variant, eta, 0.0);
    }
    static StabilityFamily implicit_euler() { return StabilityFamily(Kind::ImplicitEuler, 0.0, 0.0); }
    /// Explicit Euler with a fixed L_s < 2.
    static StabilityFamily explicit_euler(double length = 1.9) {
        if (!(length > 0.0) || !(length < 2.0))
            throw std::invalid_argument("explicit Euler needs 0 < L_s < 2");
        return StabilityFamily(Kind::ExplicitEuler, 0.0, length);
    }
    static StabilityFamily crank_nicolson() { return StabilityFamily(Kind::CrankNicolson, 0.0, 0.0); }

    static StabilityFamily from_method(MethodKind kind, double eta) {
        switch (kind) {
            case MethodKind::SkRock:
            case MethodKind::Variant: return chebyshev(kind, eta);
            case MethodKind::ImplicitEuler: return implicit_euler();
            case MethodKind::ExplicitEuler: return explicit_euler();
        }
        throw std::invalid_argument("unknown method");
    }

    /// Accepts the method names of parse_method plus "crank-nicolson".
    static StabilityFamily from_name(std::string_view name, double eta) {
        if (name == "crank-nicolson" || name == "cn") return crank_nicolson();
        return from_method(parse_method(name), eta);
    }

    Kind kind() const { return kind_; }
    double eta() const { return eta_; }
    bool is_chebyshev() const { return kind_ == Kind::SkRock || kind_ == Kind::Variant; }
    /// True when A_s, B_s and L_s actually depend on s.
    bool depends_on_stages() const { return is_chebyshev(); }
    bool infinite_length() const {
        return kind_ == Kind::ImplicitEuler || kind_ == Kind::CrankNicolson;
    }

    std::string name() const {
        switch (kind_) {
            case Kind::SkRock: return "skrock";
            case Kind::Variant: return "variant";
            case Kind::ImplicitEuler: return "implicit-euler";
            case Kind::ExplicitEuler: return "explicit-euler";
            case Kind::CrankNicolson: return "crank-nicolson";
        }
        return "unknown";
    }

    /// Radius of the complex disc on which A_s and B_s are bounded; the
    /// implicit Euler pole at z = 1 rules out the unit disc.
    double disc_radius() const { return kind_ == Kind::ImplicitEuler ? 0.5 : 1.0; }

    struct Member {
        int s = 1;
        double length = 0.0;  ///< L_s, truncated for infinite intervals
        ChebyshevParams params;
    };

    Member member(int s) const {
        Member m;
        m.s = s;
        switch (kind_) {
            case Kind::SkRock:
            case Kind::Variant:
                m.params = make_params(s, eta_);
                m.length = m.params.l_s;
                break;
            case Kind::ExplicitEuler: m.length = fixed_length_; break;
            case Kind::ImplicitEuler:
            case Kind::CrankNicolson: m.length = kTruncation; break;
        }
        return m;
    }

    template <class T>
    T a(const Member& m, T z) const {
        switch (kind_) {
            case Kind::SkRock:
            case Kind::Variant: return stability_a(m.params, z);
            case Kind::ImplicitEuler: return T(1) / (T(1) - z);
            case Kind::ExplicitEuler: return T(1) + z;
            case Kind::CrankNicolson: return (T(1) + z / T(2)) / (T(1) - z / T(2));
        }
        return T(0);
    }

    template <class T>
    T b(const Member& m, T z) const {
        switch (kind_) {
            case Kind::SkRock: return stability_b(m.params, MethodKind::SkRock, z);
            case Kind::Variant: return stability_b(m.params, MethodKind::Variant, z);
            case Kind::ImplicitEuler: return T(1) / (T(1) - z);
            case Kind::ExplicitEuler: return T(1);
            case Kind::CrankNicolson: return T(1) / (T(1) - z / T(2));
        }
        return T(0);
    }

private:
    StabilityFamily(Kind kind, double eta, double fixed_length)
        : kind_(kind), eta_(eta), fixed_length_(fixed_length) {}

    Kind kind_;
    double eta_;
    double fixed_length_;
};

/// Outcome of one numerical condition scan. `pass` is always
/// `statistic <= threshold`; `sup_value` is the raw empirical supremum.
struct ConditionReport {
    std::string condition_id;
    std::string family;
    int s_min = 1;
    int s_max = 1;
    int grid_points = 0;
    double sup_value = 0.0;
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
    int witness_s = 1;
    double witness_z = 0.0;
    std::optional<double> comparator;
    std::string note;
};

struct ScanOptions {
    int s_max = 200;
    int grid_points = 10000;
};

namespace detail {

inline void finish(ConditionReport& r) { r.pass = r.statistic <= r.threshold; }

/// Scan points in [-length, -gap]: half log-spaced in |z| (resolving the
/// origin), half cosine-spaced (resolving the oscillations near -length).
inline std::vector<double> real_grid(double length, double gap, int points) {
    std::vector<double> z;
    if (length <= gap) return z;
    z.reserve(points + 2);
    const int n_log = points / 2;
    const int n_cos = points - n_log;
    const double lo = gap > 0.0 ? gap : std::min(1e-8, length * 1e-8);
    const double log_lo = std::log(lo), log_hi = std::log(length);
    for (int k = 0; k < n_log; ++k) {
        const double t = n_log > 1 ? static_cast<double>(k) / (n_log - 1) : 0.0;
        z.push_back(-std::exp(log_lo + t * (log_hi - log_lo)));
    }
    for (int k = 0; k < n_cos; ++k) {
        const double theta = std::numbers::pi * (k + 0.5) / n_cos;
        const double v = -gap - (length - gap) * (1.0 - std::cos(theta)) / 2.0;
        z.push_back(v);
    }
    z.push_back(-length);
    if (gap == 0.0) z.push_back(0.0);
    return z;
}

/// Largest value over s in the upper half of [1, s_max] against the largest
/// over the lower quarter; a bounded family keeps the ratio below 2.
inline void growth_in_s(const std::vector<double>& per_s, ConditionReport& r) {
    const int s_max = static_cast<int>(per_s.size()) - 1;
    double lo = 0.0, hi = 0.0;
    for (int s = 1; s <= s_max; ++s) {
        if (s <= std::max(1, s_max / 4)) lo = std::max(lo, per_s[s]);
        if (s >= std::max(1, s_max / 2)) hi = std::max(hi, per_s[s]);
    }
    r.statistic = hi;
    r.threshold = 2.0 * lo;
}

/// For truncated infinite intervals: the supremum over the full scan against
/// the supremum over |z| <= truncation * 1e-4.
inline void growth_in_z(double full, double inner, ConditionReport& r) {
    r.statistic = full;
    r.threshold = 2.0 * inner;
}

/// Operationalized "finite supremum": growth in s for the Chebyshev families,
/// growth in |z| for truncated infinite intervals, finiteness otherwise.
template <class Family>
void bounded_trend(const Family& family, const std::vector<double>& per_s, double inner,
                   ConditionReport& r) {
    if (family.depends_on_stages()) {
        growth_in_s(per_s, r);
        r.note = "no growth in s: max over s>=s_max/2 <= 2 * max over s<=s_max/4";
    } else if (family.infinite_length()) {
        growth_in_z(r.sup_value, inner, r);
        r.note = "no growth in |z|: full scan <= 2 * scan over |z| <= 1e-4 L";
    } else {
        r.statistic = r.sup_value;
        r.threshold = std::numeric_limits<double>::max();
        r.note = "compact interval: supremum must be finite";
    }
}

inline double chebyshev_defect(int s, double x) {
    const double t = cheb_t(s, x);
    const double u = cheb_u(s - 1, x);
    return t * t + u * u * (1.0 - x * x) - 1.0;
}

}  // namespace detail

/// A_s(0) = A_s'(0) = B_s(0) = 1; A_s'(0) by a centered difference of step 1e-6.
inline ConditionReport check_values(const StabilityFamily& family, ScanOptions opt = {}) {
    ConditionReport r;
    r.condition_id = "C-values";
    r.family = family.name();
    r.s_max = opt.s_max;
    r.grid_points = 3;
    // Complex-step derivative: no subtractive cancellation, so the slope is
    // resolved to rounding even when A_s varies on a scale of 1/L_s.
    constexpr double step = 1e-20;
    double worst = 0.0;
    for (int s = 1; s <= opt.s_max; ++s) {
        const auto m = family.member(s);
        const double a0 = std::abs(family.a(m, 0.0) - 1.0);
        const double b0 = std::abs(family.b(m, 0.0) - 1.0);
        const double da = std::abs(family.a(m, std::complex<double>(0.0, step)).imag() / step - 1.0);
        const double scaled = std::max({a0 / 1e-12, b0 / 1e-12, da / 1e-6});
        r.sup_value = std::max({r.sup_value, a0, b0, da});
        if (scaled > worst) {
            worst = scaled;
            r.witness_s = s;
        }
    }
    r.statistic = worst;
    r.threshold = 1.0;
    r.note = "statistic = max(|A(0)-1|/1e-12, |B(0)-1|/1e-12, |A'(0)-1|/1e-6)";
    detail::finish(r);
    return r;
}

/// sup (1 + |z|) B_s(z)^2 over z in [-L_s, 0].
inline ConditionReport check_bound_b(const StabilityFamily& family, ScanOptions opt = {}) {
    ConditionReport r;
    r.condition_id = "C-boundB";
    r.family = family.name();
    r.s_max = opt.s_max;
    r.grid_points = opt.grid_points;
    std::vector<double> per_s(opt.s_max + 1, 0.0);
    double inner = 0.0;
    for (int s = 1; s <= opt.s_max; ++s) {
        const auto m = family.member(s);
        for (double z : detail::real_grid(m.length, 0.0, opt.grid_points)) {
            const double b = family.b(m, z);
            const double v = (1.0 + std::abs(z)) * b * b;
            if (v > per_s[s]) per_s[s] = v;
            if (std::abs(z) <= m.length * 1e-4) inner = std::max(inner, v);
            if (v > r.sup_value) {
                r.sup_value = v;
                r.witness_s = s;
                r.witness_z = z;
            }
        }
    }
    detail::bounded_trend(family, per_s, inner, r);
    detail::finish(r);
    return r;
}

/// Large-s limit of |A_s(-delta)| for the damped Chebyshev polynomial.
inline double damping_limit(double eta, double delta) {
    const double r = std::sqrt(2.0 * eta);
    const double w = r / std::tanh(r);  // lim omega1 s^2
    const double arg = 2.0 * (eta - delta * w);
    const double num = arg >= 0.0 ? std::cosh(std::sqrt(arg)) : std::cos(std::sqrt(-arg));
    return std::abs(num) / std::cosh(r);
}

/// sup |A_s(z)| over z in [-L_s, -delta]; passes with a margin of at least
/// delta / 100 below 1.
inline ConditionReport check_damping(const StabilityFamily& family, double delta,
                                     ScanOptions opt = {}) {
    if (!(delta > 0.0) || delta > 1.0) throw std::invalid_argument("check_damping: delta in (0,1]");
    ConditionReport r;
    r.condition_id = "C-damping";
    r.family = family.name();
    r.s_max = opt.s_max;
    r.grid_points = opt.grid_points;
    for (int s = 1; s <= opt.s_max; ++s) {
        const auto m = family.member(s);
        for (double z : detail::real_grid(m.length, delta, opt.grid_points)) {
            const double v = std::abs(family.a(m, z));
            if (v > r.sup_value) {
                r.sup_value = v;
                r.witness_s = s;
                r.witness_z = z;
            }
        }
    }
    r.statistic = r.sup_value;
    r.threshold = 1.0 - 1e-2 * delta;
    if (family.is_chebyshev()) r.comparator = damping_limit(family.eta(), delta);
    r.note = "delta=" + std::to_string(delta) + "; margin 1-sup=" + std::to_string(1.0 - r.sup_value);
    detail::finish(r);
    return r;
}

/// sup |A_s(z)| + |B_s(z)| on the circle |z| = radius (the disc supremum by
/// the maximum principle).
inline ConditionReport check_disc(const StabilityFamily& family, ScanOptions opt = {},
                                  int angles = 360) {
    ConditionReport r;
    r.condition_id = "C-disc";
    r.family = family.name();
    r.s_max = opt.s_max;
    r.grid_points = angles;
    const double radius = family.disc_radius();
    std::vector<double> per_s(opt.s_max + 1, 0.0);
    for (int s = 1; s <= opt.s_max; ++s) {
        const auto m = family.member(s);
        for (int k = 0; k < angles; ++k) {
            const std::complex<double> z =
                std::polar(radius, 2.0 * std::numbers::pi * k / angles);
            const double v = std::abs(family.a(m, z)) + std::abs(family.b(m, z));
            per_s[s] = std::max(per_s[s], v);
            if (v > r.sup_value) {
                r.sup_value = v;
                r.witness_s = s;
                r.witness_z = std::arg(z);
            }
        }
    }
    detail::growth_in_s(per_s, r);
    if (family.is_chebyshev()) r.comparator = std::exp(family.eta() + std::exp(family.eta()));
    r.note = "radius=" + std::to_string(radius) + "; witness_z holds the angle of the witness point";
    detail::finish(r);
    return r;
}

/// sup min(1, |z|) / (1 - A_s(z)^2) over z in [-L_s, -1e-6].
inline ConditionReport check_newassump(const StabilityFamily& family, ScanOptions opt = {}) {
    ConditionReport r;
    r.condition_id = "C-newassump";
    r.family = family.name();
    r.s_max = opt.s_max;
    r.grid_points = opt.grid_points;
    std::vector<double> per_s(opt.s_max + 1, 0.0);
    double inner = 0.0;
    for (int s = 1; s <= opt.s_max; ++s) {
        const auto m = family.member(s);
        for (double z : detail::real_grid(m.length, 1e-6, opt.grid_points)) {
            const double a = family.a(m, z);
            const double denom = 1.0 - a * a;
            const double v = denom > 0.0 ? std::min(1.0, std::abs(z)) / denom
                                         : std::numeric_limits<double>::infinity();
            per_s[s] = std::max(per_s[s], v);
            if (std::abs(z) <= m.length * 1e-4) inner = std::max(inner, v);
            if (v > r.sup_value) {
                r.sup_value = v;
                r.witness_s = s;
                r.witness_z = z;
            }
        }
    }
    detail::bounded_trend(family, per_s, inner, r);
    detail::finish(r);
    return r;
}

struct SemigroupOptions {
    int n_max = 1000;
    int s_max = 100;
    int grid_points = 2000;
};

/// sup n |A_s(z)^n - exp(n z)| over n <= n_max, s <= s_max, z in [-L_s, 0].
/// Passes when neither the large-s half nor the large-n half exceeds twice the
/// small-s / small-n supremum.
inline ConditionReport check_semigroup(const StabilityFamily& family, SemigroupOptions opt = {}) {
    ConditionReport r;
    r.condition_id = "C-semigroup";
    r.family = family.name();
    r.s_max = opt.s_max;
    r.grid_points = opt.grid_points;
    std::vector<double> per_s(opt.s_max + 1, 0.0);
    double small_n = 0.0, large_n = 0.0;
    for (int s = 1; s <= opt.s_max; ++s) {
        const auto m = family.member(s);
        for (double z : detail::real_grid(m.length, 0.0, opt.grid_points)) {
            const double a = family.a(m, z);
            const double ez = std::exp(z);
            double an = 1.0, en = 1.0;
            for (int n = 1; n <= opt.n_max; ++n) {
                an *= a;
                en *= ez;
                const double v = n * std::abs(an - en);
                per_s[s] = std::max(per_s[s], v);
                if (n <= std::max(1, opt.n_max / 10)) small_n = std::max(small_n, v);
                if (n >= opt.n_max / 2) large_n = std::max(large_n, v);
                if (v > r.sup_value) {
                    r.sup_value = v;
                    r.witness_s = s;
                    r.witness_z = z;
                }
            }
        }
    }
    ConditionReport s_trend;
    if (family.depends_on_stages()) {
        detail::growth_in_s(per_s, s_trend);
    } else {
        s_trend.statistic = 0.0;
        s_trend.threshold = 1.0;
    }
    // Combined as a ratio so that pass stays statistic <= threshold.
    const double ratio_s = s_trend.threshold > 0 ? s_trend.statistic / s_trend.threshold : 0.0;
    const double ratio_n = small_n > 0 ? large_n / (2.0 * small_n) : 0.0;
    r.statistic = std::max(ratio_s, ratio_n);
    r.threshold = 1.0;
    r.note = "n_max=" + std::to_string(opt.n_max) +
             "; statistic = max of large/(2*small) ratios over s and n";
    detail::finish(r);
    return r;
}

/// max |T_s(x)^2 + U_{s-1}(x)^2 (1 - x^2) - 1| over s <= s_max and a uniform
/// grid of x in [-1, 1].
inline ConditionReport check_identity(int s_max = 100, int points = 1000) {
    ConditionReport r;
    r.condition_id = "C-identity";
    r.family = "chebyshev";
    r.s_max = s_max;
    r.grid_points = points;
    for (int s = 1; s <= s_max; ++s) {
        for (int k = 0; k < points; ++k) {
            const double x = -1.0 + 2.0 * k / (points - 1);
            const double v = std::abs(detail::chebyshev_defect(s, x));
            if (v > r.sup_value) {
                r.sup_value = v;
                r.witness_s = s;
                r.witness_z = x;
            }
        }
    }
    r.statistic = r.sup_value;
    r.threshold = 1e-12;
    r.note = "witness_z holds the x coordinate";
    detail::finish(r);
    return r;
}

/// The full scan set for one family: values, boundB, damping at each delta,
/// disc, newassump, semigroup.
inline std::vector<ConditionReport> check_all(const StabilityFamily& family,
                                              const std::vector<double>& deltas = {1.0, 1e-1, 1e-2,
                                                                                   1e-3},
                                              ScanOptions opt = {}, SemigroupOptions sg = {}) {
    std::vector<ConditionReport> out;
    out.push_back(check_values(family, opt));
    out.push_back(check_bound_b(family, opt));
    for (double d : deltas) out.push_back(check_damping(family, d, opt));
    out.push_back(check_disc(family, opt));
    out.push_back(check_newassump(family, opt));
    out.push_back(check_semigroup(family, sg));
    return out;
}

/// One sample of the stability functions along the negative real axis.
struct CurvePoint {
    double z = 0.0;
    double a = 0.0;          ///< A_s(z)
    double b_skrock = 0.0;   ///< B_s(z), SK-ROCK
    double b_variant = 0.0;  ///< B_s(z), variant (A_s - 1)/z
    double implicit_euler = 0.0;  ///< 1/(1 - z)
};

/// Uniform samples over [-1.05 l_s, 0.5] plus the exact point z = 0.
inline std::vector<CurvePoint> stability_curve(int s, double eta, int points = 2001) {
    if (points < 2) throw std::invalid_argument("stability_curve: need at least 2 points");
    const auto p = make_params(s, eta);
    const double lo = -1.05 * p.l_s, hi = 0.5;
    std::vector<double> zs(points);
    for (int k = 0; k < points; ++k) zs[k] = lo + (hi - lo) * k / (points - 1);
    zs.push_back(0.0);
    std::sort(zs.begin(), zs.end());
    zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
    std::vector<CurvePoint> out;
    out.reserve(zs.size());
    for (double z : zs) {
        out.push_back({z, stability_a(p, z), stability_b(p, MethodKind::SkRock, z),
                       stability_b(p, MethodKind::Variant, z), 1.0 / (1.0 - z)});
    }
    return out;
}

}  // namespace skrock

#endif
