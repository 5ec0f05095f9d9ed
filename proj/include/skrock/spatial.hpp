#ifndef SKROCK_SPATIAL_HPP
#define SKROCK_SPATIAL_HPP

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

namespace skrock {

/// Tridiagonal finite-difference discretization of u -> (a(x) u')' on (0,1)
/// with homogeneous Dirichlet conditions. Only interior nodes x_i = i h,
/// i = 1..N-1, are stored.
struct DiscreteOperator {
    int n_interior = 0;
    double h = 0.0;
    std::vector<double> sub;    ///< sub[i] = M(i+1, i), length n_interior - 1
    std::vector<double> diag;   ///< length n_interior
    std::vector<double> super;  ///< super[i] = M(i, i+1), length n_interior - 1
    double lambda_max_bound = 0.0;  ///< Gershgorin bound on the spectral radius

    /// Coordinate of interior node i (0-based).
    double node(int i) const { return (i + 1) * h; }
    std::vector<double> nodes() const {
        std::vector<double> x(n_interior);
        for (int i = 0; i < n_interior; ++i) x[i] = node(i);
        return x;
    }
};

/// Discrete L^2(0,1) inner product h * sum u_i v_i.
inline double inner(std::span<const double> u, std::span<const double> v, double h) {
    if (u.size() != v.size()) throw std::invalid_argument("inner: dimension mismatch");
    return h * std::inner_product(u.begin(), u.end(), v.begin(), 0.0);
}

inline double norm(std::span<const double> u, double h) { return std::sqrt(inner(u, u, h)); }

/// Assembles the flux-form stencil
///   (a_{i+1/2}(u_{i+1} - u_i) - a_{i-1/2}(u_i - u_{i-1})) / h^2
/// with the coefficient sampled at half-integer nodes.
template <std::invocable<double> Coefficient>
DiscreteOperator assemble(int n, Coefficient&& a) {
    if (n < 2) throw std::invalid_argument("assemble: need at least 2 grid intervals");
    DiscreteOperator op;
    op.n_interior = n - 1;
    op.h = 1.0 / n;
    const double inv_h2 = 1.0 / (op.h * op.h);

    // a at x_{k+1/2}, k = 0..n-1
    std::vector<double> flux(n);
    for (int k = 0; k < n; ++k) {
        const double value = static_cast<double>(a((k + 0.5) * op.h));
        if (!(value > 0.0))
            throw std::invalid_argument("assemble: coefficient must be positive, got " +
                                        std::to_string(value) + " at x=" +
                                        std::to_string((k + 0.5) * op.h));
        flux[k] = value;
    }

    const int m = op.n_interior;
    op.diag.resize(m);
    op.sub.resize(m - 1);
    op.super.resize(m - 1);
    for (int i = 0; i < m; ++i) op.diag[i] = -(flux[i] + flux[i + 1]) * inv_h2;
    for (int i = 0; i + 1 < m; ++i) op.sub[i] = op.super[i] = flux[i + 1] * inv_h2;

    double bound = 0.0;
    for (int i = 0; i < m; ++i) {
        double radius = std::abs(op.diag[i]);
        if (i > 0) radius += std::abs(op.sub[i - 1]);
        if (i + 1 < m) radius += std::abs(op.super[i]);
        bound = std::max(bound, radius);
    }
    op.lambda_max_bound = bound;
    return op;
}

/// Laplacian on (0,1): a = 1.
inline DiscreteOperator assemble_laplacian(int n) {
    return assemble(n, [](double) { return 1.0; });
}

/// out = M u.
inline void apply(const DiscreteOperator& op, std::span<const double> u, std::span<double> out) {
    const auto m = static_cast<std::size_t>(op.n_interior);
    if (u.size() != m || out.size() != m)
        throw std::invalid_argument("apply: expected vectors of length " + std::to_string(m));
    if (m == 1) {
        out[0] = op.diag[0] * u[0];
        return;
    }
    out[0] = op.diag[0] * u[0] + op.super[0] * u[1];
    for (std::size_t i = 1; i + 1 < m; ++i)
        out[i] = op.sub[i - 1] * u[i - 1] + op.diag[i] * u[i] + op.super[i] * u[i + 1];
    out[m - 1] = op.sub[m - 2] * u[m - 2] + op.diag[m - 1] * u[m - 1];
}

inline std::vector<double> apply(const DiscreteOperator& op, std::span<const double> u) {
    std::vector<double> out(u.size());
    apply(op, u, out);
    return out;
}

/// Eigenpairs of -M: eigenvalues ascending, eigenvectors orthonormal in the
/// h-weighted inner product.
struct SpectralDecomposition {
    double h = 0.0;
    std::vector<double> eigenvalues;
    std::vector<std::vector<double>> eigenvectors;

    std::size_t size() const { return eigenvalues.size(); }
};

inline constexpr int kMaxDenseDecomposition = 2048;

/// Dense symmetric tridiagonal eigensolve. For oracles, the verifier and
/// spectrally colored noise; the steppers never need it.
inline SpectralDecomposition decompose(const DiscreteOperator& op) {
    const int m = op.n_interior;
    if (m > kMaxDenseDecomposition)
        throw std::length_error("decompose: " + std::to_string(m) +
                                " interior nodes exceed the dense budget of " +
                                std::to_string(kMaxDenseDecomposition));
    for (int i = 0; i + 1 < m; ++i)
        if (op.sub[i] != op.super[i])
            throw std::invalid_argument("decompose: operator is not symmetric");

    // Decompose -M so the eigenvalues come out ascending and positive.
    Eigen::VectorXd d(m);
    Eigen::VectorXd e(std::max(m - 1, 0));
    for (int i = 0; i < m; ++i) d[i] = -op.diag[i];
    for (int i = 0; i + 1 < m; ++i) e[i] = -op.sub[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("decompose: tridiagonal eigensolver did not converge");

    SpectralDecomposition dec;
    dec.h = op.h;
    dec.eigenvalues.resize(m);
    dec.eigenvectors.assign(m, std::vector<double>(m));
    const double scale = 1.0 / std::sqrt(op.h);
    for (int k = 0; k < m; ++k) {
        dec.eigenvalues[k] = solver.eigenvalues()[k];
        // Fix the sign so that the first nonzero component is positive.
        double sign = 1.0;
        for (int i = 0; i < m; ++i) {
            const double v = solver.eigenvectors()(i, k);
            if (std::abs(v) > 1e-12) {
                sign = v > 0 ? 1.0 : -1.0;
                break;
            }
        }
        for (int i = 0; i < m; ++i) dec.eigenvectors[k][i] = sign * scale * solver.eigenvectors()(i, k);
    }
    return dec;
}

/// phi(M) u = sum_m phi(-lambda_m) <u, e_m> e_m.
template <class Phi>
std::vector<double> apply_function(const SpectralDecomposition& dec, Phi&& phi,
                                   std::span<const double> u) {
    if (u.size() != dec.size()) throw std::invalid_argument("apply_function: dimension mismatch");
    std::vector<double> out(u.size(), 0.0);
    for (std::size_t k = 0; k < dec.size(); ++k) {
        const auto& e = dec.eigenvectors[k];
        const double coeff = static_cast<double>(phi(-dec.eigenvalues[k])) * inner(u, e, dec.h);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += coeff * e[i];
    }
    return out;
}

}  // namespace skrock

#endif
