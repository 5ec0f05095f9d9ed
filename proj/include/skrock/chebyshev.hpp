#ifndef SKROCK_CHEBYSHEV_HPP
#define SKROCK_CHEBYSHEV_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace skrock {

/// Upper limit of admissible damping parameters. Beyond it the shifted
/// Chebyshev stability polynomial no longer yields a uniform damping margin.
inline constexpr double kEtaMax = 0.7001;

/// Damping used throughout the toolkit unless overridden.
inline constexpr double kDefaultEta = 0.05;

/// First-kind Chebyshev polynomial T_s(x) by forward three-term recursion.
///
/// Works for any field type closed under +,-,* (real or complex).
template <class T>
constexpr T cheb_t(int s, T x) {
    if (s == 0) return T(1);
    T prev = T(1);
    T cur = x;
    for (int k = 1; k < s; ++k) {
        T next = T(2) * x * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

/// Second-kind Chebyshev polynomial U_s(x); U_{-1} is taken as 0.
template <class T>
constexpr T cheb_u(int s, T x) {
    if (s < 0) return T(0);
    if (s == 0) return T(1);
    T prev = T(1);
    T cur = T(2) * x;
    for (int k = 1; k < s; ++k) {
        T next = T(2) * x * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

/// T_s'(x) = s U_{s-1}(x).
template <class T>
constexpr T cheb_t_prime(int s, T x) {
    return T(s) * cheb_u(s - 1, x);
}

/// k-th derivative of T_s at x, from the differentiated recursion
///   T_{j+1}^{(k)} = 2x T_j^{(k)} + 2k T_j^{(k-1)} - T_{j-1}^{(k)}.
inline double cheb_t_derivative(int s, int k, double x) {
    if (k < 0) throw std::invalid_argument("cheb_t_derivative: negative order");
    if (s == 0) return k == 0 ? 1.0 : 0.0;
    // prev[d], cur[d]: d-th derivatives of T_{j-1}, T_j.
    std::vector<double> prev(k + 1, 0.0), cur(k + 1, 0.0);
    prev[0] = 1.0;  // T_0
    cur[0] = x;  // T_1
    if (k >= 1) cur[1] = 1.0;
    for (int j = 1; j < s; ++j) {
        std::vector<double> next(k + 1);
        for (int d = 0; d <= k; ++d) {
            next[d] = 2.0 * x * cur[d] - prev[d];
            if (d > 0) next[d] += 2.0 * d * cur[d - 1];
        }
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur[k];
}

/// Stability function family of a time stepper.
enum class MethodKind { SkRock, Variant, ImplicitEuler, ExplicitEuler };

inline std::string_view to_string(MethodKind kind) {
    switch (kind) {
        case MethodKind::SkRock: return "skrock";
        case MethodKind::Variant: return "variant";
        case MethodKind::ImplicitEuler: return "implicit-euler";
        case MethodKind::ExplicitEuler: return "explicit-euler";
    }
    return "unknown";
}

inline MethodKind parse_method(std::string_view name) {
    if (name == "skrock" || name == "sk-rock") return MethodKind::SkRock;
    if (name == "variant") return MethodKind::Variant;
    if (name == "implicit-euler" || name == "ie") return MethodKind::ImplicitEuler;
    if (name == "explicit-euler" || name == "ee") return MethodKind::ExplicitEuler;
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

/// One member of the damped Chebyshev family: A_s(z) = T_s(w0 + w1 z) / T_s(w0).
struct ChebyshevParams {
    int s = 1;
    double eta = kDefaultEta;
    double omega0 = 1.0;
    double omega1 = 1.0;
    double l_s = 2.0;  ///< length of the real stability interval [-l_s, 0]
};

/// Builds the parameters for stage count s and damping eta.
///
/// omega0 = 1 + eta/s^2, omega1 = T_s(omega0)/T_s'(omega0), l_s = 2/omega1.
/// Throws std::domain_error for s < 1 or eta outside (0, kEtaMax).
inline ChebyshevParams make_params(int s, double eta) {
    if (s < 1) throw std::domain_error("make_params: stage count must be >= 1");
    if (!(eta > 0.0) || !(eta < kEtaMax))
        throw std::domain_error("make_params: damping must lie in (0, 0.7001), got " +
                                std::to_string(eta));
    ChebyshevParams p;
    p.s = s;
    p.eta = eta;
    p.omega0 = 1.0 + eta / (static_cast<double>(s) * s);
    p.omega1 = cheb_t(s, p.omega0) / cheb_t_prime(s, p.omega0);
    p.l_s = 2.0 / p.omega1;
    return p;
}

/// Limit of omega1 * s^2 as s grows: tanh(sqrt(2 eta)) / sqrt(2 eta).
inline double asymptotic_omega(double eta) {
    const double r = std::sqrt(2.0 * eta);
    return std::tanh(r) / r;
}

/// A_s(z), shared by SK-ROCK and the variant.
template <class T>
T stability_a(const ChebyshevParams& p, T z) {
    return cheb_t(p.s, T(p.omega0) + T(p.omega1) * z) / T(cheb_t(p.s, p.omega0));
}

/// (T_s(x) - T_s(y)) / (x - y), evaluated without cancellation; equals T_s'(y) at x = y.
template <class T>
T cheb_t_divided_difference(int s, T x, double y) {
    T d_prev(0), d(1), t_prev(1), t = T(y);
    if (s == 0) return d_prev;
    for (int k = 1; k < s; ++k) {
        const T d_next = T(2) * x * d + T(2) * t - d_prev;
        const T t_next = T(2 * y) * t - t_prev;
        d_prev = d;
        d = d_next;
        t_prev = t;
        t = t_next;
    }
    return d;
}

/// Noise stability function B_s for the two Chebyshev methods.
///
/// SkRock:  U_{s-1}(w0 + w1 z) / U_{s-1}(w0) * (1 + w1 z / 2)
/// Variant: (A_s(z) - 1) / z, via a divided difference so it is exact at z = 0.
template <class T>
T stability_b(const ChebyshevParams& p, MethodKind kind, T z) {
    switch (kind) {
        case MethodKind::SkRock: {
            const T x = T(p.omega0) + T(p.omega1) * z;
            return cheb_u(p.s - 1, x) / T(cheb_u(p.s - 1, p.omega0)) *
                   (T(1) + T(p.omega1 / 2.0) * z);
        }
        case MethodKind::Variant: {
            const T x = T(p.omega0) + T(p.omega1) * z;
            return T(p.omega1) * cheb_t_divided_difference(p.s, x, p.omega0) / T(cheb_t(p.s, p.omega0));
        }
        default:
            throw std::invalid_argument("stability_b: only SkRock and Variant are Chebyshev methods");
    }
}

}  // namespace skrock

#endif
