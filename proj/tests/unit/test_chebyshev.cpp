#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <stdexcept>

#include "skrock/chebyshev.hpp"

using namespace skrock;
using Catch::Approx;

TEST_CASE("first kind values", "[chebyshev]") {
    CHECK(cheb_t(0, 0.7) == 1.0);
    CHECK(cheb_t(3, 0.5) == Approx(-1.0).margin(1e-15));
    CHECK(cheb_t(7, 1.0) == 1.0);
    CHECK(cheb_t(1, -0.3) == -0.3);
}

TEST_CASE("second kind values", "[chebyshev]") {
    CHECK(cheb_u(0, 0.3) == 1.0);
    CHECK(cheb_u(1, 0.3) == Approx(0.6));
    CHECK(cheb_u(6, 1.0) == Approx(7.0));
    CHECK(cheb_u(-1, 0.3) == 0.0);
}

TEST_CASE("recursion matches trigonometric and hyperbolic closed forms", "[chebyshev]") {
    for (int s : {1, 2, 5, 17, 60, 100}) {
        for (double theta = 0.05; theta < 3.1; theta += 0.137) {
            const double x = std::cos(theta);
            CHECK(cheb_t(s, x) == Approx(std::cos(s * theta)).margin(1e-11));
            CHECK(cheb_u(s - 1, x) ==
                  Approx(std::sin(s * theta) / std::sin(theta)).margin(1e-9 * s));
        }
        for (double t : {1e-3, 0.01, 0.05}) {
            const double x = std::cosh(t);
            CHECK(cheb_t(s, x) == Approx(std::cosh(s * t)).epsilon(1e-11));
        }
    }
}

TEST_CASE("derivative equals s U_{s-1}", "[chebyshev]") {
    for (int s = 1; s <= 100; s += 3) {
        for (double x = -1.0; x <= 1.01; x += 0.0137) {
            // Oracle: T_s'(x) from the differentiated recursion.
            double t0 = 1, t1 = x, d0 = 0, d1 = 1;
            for (int k = 1; k < s; ++k) {
                const double t2 = 2 * x * t1 - t0, d2 = 2 * t1 + 2 * x * d1 - d0;
                t0 = t1; t1 = t2; d0 = d1; d1 = d2;
            }
            const double d = s == 0 ? 0.0 : d1;
            CHECK(std::abs(cheb_t_prime(s, x) - d) <= 1e-10 * std::max(1.0, std::abs(d)));
        }
    }
}

TEST_CASE("higher derivatives at one follow the product formula", "[chebyshev]") {
    for (int s = 1; s <= 30; ++s) {
        double expected = 1.0;
        for (int k = 0; k <= 3; ++k) {
            if (k > 0) expected *= (double(s) * s - double(k - 1) * (k - 1)) / (2.0 * (k - 1) + 1.0);
            CHECK(cheb_t_derivative(s, k, 1.0) == Approx(expected).epsilon(1e-12));
            CHECK(cheb_t_derivative(s, k, 1.0) <= std::pow(double(s), 2 * k) * (1 + 1e-12));
        }
    }
}

TEST_CASE("Pell-type identity holds inside and outside [-1,1]", "[chebyshev]") {
    for (int s = 1; s <= 100; ++s) {
        for (int i = 0; i <= 1000; ++i) {
            const double x = -1.0 + 2.0 * i / 1000.0;
            const double t = cheb_t(s, x), u = cheb_u(s - 1, x);
            CHECK(std::abs(t * t + u * u * (1 - x * x) - 1.0) <= 1e-12);
        }
    }
    CHECK(cheb_t(9, 1.0) * cheb_t(9, 1.0) == 1.0);
    CHECK(cheb_t(9, -1.0) * cheb_t(9, -1.0) == 1.0);
    const auto p = make_params(7, 0.05);
    const double x = p.omega0, t = cheb_t(7, x), u = cheb_u(6, x);
    CHECK(t * t + u * u * (1 - x * x) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("complex arguments agree with the cosine closed form", "[chebyshev]") {
    const std::complex<double> z(0.3, 0.4);
    const auto theta = std::acos(z);
    for (int s : {2, 7, 20}) {
        const auto expected = std::cos(double(s) * theta);
        CHECK(std::abs(cheb_t(s, z) - expected) < 1e-10);
    }
}

TEST_CASE("parameters at s = 7, eta = 0.05", "[chebyshev]") {
    const auto p = make_params(7, 0.05);
    CHECK(p.omega0 == 1.0 + 0.05 / 49.0);
    CHECK(p.omega1 == Approx(cheb_t(7, p.omega0) / cheb_t_prime(7, p.omega0)).epsilon(1e-15));
    CHECK(p.l_s == 2.0 / p.omega1);
    // 40-digit closed form 2 s tanh(s t)/sinh t, cosh t = omega0.
    CHECK(p.l_s == Approx(94.82717867006180716).epsilon(1e-12));
    CHECK(p.l_s >= 94.73);
    CHECK(p.l_s <= 98.0);
    CHECK(1.0 / cheb_t(7, p.omega0) == Approx(0.95200974603963370).epsilon(1e-12));
}

TEST_CASE("large-s limit of omega1 s^2", "[chebyshev]") {
    const auto p = make_params(1000, 0.05);
    const double r = std::sqrt(0.1);
    // The limit is r / tanh r (40-digit reference 1.0331132235052687 at s = 1000).
    CHECK(p.omega1 * 1e6 == Approx(1.0331132235052687).epsilon(1e-9));
    CHECK(std::abs(p.omega1 * 1e6 * std::tanh(r) / r - 1.0) <= 1e-6);
    CHECK(asymptotic_omega(0.05) == Approx(std::tanh(r) / r));
}

TEST_CASE("parameter invariants over s", "[chebyshev]") {
    for (double eta : {0.05, 0.1, 0.5, 0.7}) {
        double prev = 0.0;
        for (int s = 1; s <= 200; ++s) {
            const auto p = make_params(s, eta);
            CHECK(p.omega1 > 0.0);
            // The quadratic lower bound only holds once s is past the first few stages.
            if (s >= 4) CHECK(p.l_s >= (2.0 - 4.0 * eta / 3.0) * s * s);
            CHECK(p.l_s > prev);
            prev = p.l_s;
        }
    }
    for (int s = 1; s <= 10000; s += 37) {
        const auto p = make_params(s, 0.05);
        CHECK(p.omega1 * double(s) * s <= std::exp(0.05));
    }
}

TEST_CASE("eta outside the admissible range is rejected", "[chebyshev]") {
    CHECK_THROWS_AS(make_params(3, 0.0), std::domain_error);
    CHECK_THROWS_AS(make_params(3, -0.1), std::domain_error);
    CHECK_THROWS_AS(make_params(3, 0.7001), std::domain_error);
    CHECK_THROWS_AS(make_params(0, 0.05), std::domain_error);
    CHECK_NOTHROW(make_params(3, 0.7));
}

TEST_CASE("stability function A_s", "[chebyshev]") {
    for (int s : {1, 2, 7, 50}) CHECK(stability_a(make_params(s, 0.05), 0.0) == 1.0);

    const auto p1 = make_params(1, 0.05);
    // s = 1: A_1(z) = 1 + z exactly in exact arithmetic.
    for (double z : {-1.9, -1.0, -0.3, 0.2}) CHECK(stability_a(p1, z) == Approx(1.0 + z).margin(1e-14));

    // Interior extrema of A_7 sit where omega0 + omega1 z = cos(k pi / 7).
    const auto p7 = make_params(7, 0.05);
    const double bound = 1.0 / cheb_t(7, p7.omega0);
    for (int k = 1; k < 7; ++k) {
        const double z = (std::cos(k * M_PI / 7) - p7.omega0) / p7.omega1;
        CHECK(std::abs(stability_a(p7, z)) == Approx(bound).epsilon(1e-12));
    }
    CHECK(bound == Approx(0.95).margin(0.003));
}

TEST_CASE("stability function B_s", "[chebyshev]") {
    for (int s : {1, 2, 7, 50}) {
        const auto p = make_params(s, 0.05);
        CHECK(stability_b(p, MethodKind::SkRock, 0.0) == 1.0);
        CHECK(stability_b(p, MethodKind::Variant, 0.0) == Approx(1.0).epsilon(1e-13));
    }
    const auto p1 = make_params(1, 0.05);
    CHECK(stability_b(p1, MethodKind::Variant, -1.0) ==
          Approx((stability_a(p1, -1.0) - 1.0) / -1.0).epsilon(1e-14));

    const auto p7 = make_params(7, 0.05);
    const double z = -p7.l_s / 2;
    const double x = p7.omega0 + p7.omega1 * z;
    const double oracle = cheb_u(6, x) / cheb_u(6, p7.omega0) * (1.0 + p7.omega1 * z / 2);
    CHECK(stability_b(p7, MethodKind::SkRock, z) == Approx(oracle).epsilon(1e-14));
    CHECK((1 + std::abs(z)) * oracle * oracle < 1.0);

    CHECK_THROWS_AS(stability_b(p7, MethodKind::ImplicitEuler, -1.0), std::invalid_argument);
}

TEST_CASE("variant B_s is accurate near the origin", "[chebyshev]") {
    const auto p = make_params(7, 0.05);
    // Oracle: (A_s(z) - 1) / z in extended precision, away from cancellation trouble.
    auto oracle = [&](long double z) {
        auto t = [](int s, long double x) {
            long double a = 1, b = x;
            for (int k = 1; k < s; ++k) {
                const long double c = 2 * x * b - a;
                a = b;
                b = c;
            }
            return b;
        };
        const long double w0 = 1.0L + 0.05L / 49.0L;
        const long double w1 = t(7, w0) / ((t(7, w0 + 1e-9L) - t(7, w0 - 1e-9L)) / 2e-9L);
        return (t(7, w0 + w1 * z) / t(7, w0) - 1.0L) / z;
    };
    CHECK(stability_b(p, MethodKind::Variant, 0.0) == Approx(1.0).epsilon(1e-14));
    for (double z : {-1e-9, -1e-8, -1e-6, -1e-3, -1.0, -50.0})
        CHECK(stability_b(p, MethodKind::Variant, z) == Approx(double(oracle(z))).epsilon(1e-6));
    for (double z : {-1e-3, -1.0, -50.0, -90.0})
        CHECK(stability_b(p, MethodKind::Variant, z) == Approx((stability_a(p, z) - 1) / z).epsilon(1e-10));
}

TEST_CASE("method names round trip", "[chebyshev]") {
    for (auto k : {MethodKind::SkRock, MethodKind::Variant, MethodKind::ImplicitEuler,
                   MethodKind::ExplicitEuler})
        CHECK(parse_method(to_string(k)) == k);
    CHECK(parse_method("sk-rock") == MethodKind::SkRock);
    CHECK(parse_method("ie") == MethodKind::ImplicitEuler);
    CHECK_THROWS_AS(parse_method("rk4"), std::invalid_argument);
}
