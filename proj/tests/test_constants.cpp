#include <catch2/catch_amalgamated.hpp>

#include <nlperi/constants.hpp>
#include <nlperi/quadrature.hpp>

#include <cmath>

using namespace nlperi;

namespace {

// angular moments over S^1 in closed form:
// int_{S^1} |w1|^{2q} dsigma = 2 sqrt(pi) Gamma(q + 1/2) / Gamma(q + 1)
double circle_moment(double q) {
    return 2.0 * std::sqrt(pi) * std::tgamma(q + 0.5) / std::tgamma(q + 1.0);
}

} // namespace

TEST_CASE("sphere measures", "[constants]") {
    CHECK(std::fabs(sphere_measure(0) - 2.0) < 1e-14);
    CHECK(std::fabs(sphere_measure(1) - 2.0 * pi) < 1e-13);
    CHECK(std::fabs(sphere_measure(2) - 4.0 * pi) < 1e-13);
    CHECK_THROWS_AS(sphere_measure(-1), std::invalid_argument);
}

TEST_CASE("radial constant: quadrature matches the reflection closed form", "[constants]") {
    for (double s : {0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9}) {
        const double closed = radial_constant_closed_form(s);
        const double quad = radial_constant_quadrature(s);
        CHECK(std::fabs(quad - closed) < 1e-9 * closed);
    }
    CHECK_THROWS_AS(radial_constant_closed_form(0.0), std::invalid_argument);
    CHECK_THROWS_AS(radial_constant_quadrature(1.0), std::invalid_argument);
}

TEST_CASE("radial constant at s = 1/2 is pi/2", "[constants]") {
    CHECK(std::fabs(radial_constant_closed_form(0.5) - 0.5 * pi) < 1e-14);
    CHECK(std::fabs(radial_constant_quadrature(0.5) - 0.5 * pi) < 1e-10);
}

TEST_CASE("multiplier constants against the Gamma-function moments", "[constants]") {
    for (double s : {0.2, 0.35, 0.5, 0.65, 0.8}) {
        const MultiplierConstants mc = multiplier_constants(2, s);
        const double cs = radial_constant_closed_form(s);
        const double i0 = circle_moment(s);
        const double i2 = circle_moment(s + 1.0);
        CHECK(std::fabs(mc.c - cs * i0) < 1e-9 * mc.c);
        CHECK(std::fabs(mc.a + mc.b - cs * i2) < 1e-9 * mc.c);
        CHECK(std::fabs(mc.a - cs * (i0 - i2)) < 1e-9 * mc.c);
        // trace identity d a + b = c, exact in the decomposition
        CHECK(std::fabs(2.0 * mc.a + mc.b - mc.c) < 1e-11 * mc.c);
        CHECK(mc.a > 0.0);
        CHECK(mc.b > 0.0);
        CHECK(mc.c > 0.0);
    }
}

TEST_CASE("multiplier constants at s = 1/2: a = b = 2 pi / 3, c = 2 pi", "[constants]") {
    const MultiplierConstants mc = multiplier_constants(2, 0.5);
    CHECK(std::fabs(mc.a - 2.0 * pi / 3.0) < 1e-9);
    CHECK(std::fabs(mc.b - 2.0 * pi / 3.0) < 1e-9);
    CHECK(std::fabs(mc.c - 2.0 * pi) < 1e-9);
    CHECK_THROWS_AS(multiplier_constants(1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(multiplier_constants(2, 0.0), std::invalid_argument);
}

TEST_CASE("lattice zeta constants reproduce reference values", "[constants]") {
    // reference values computed independently at high cutoff; both components
    // are negative (the lattice sum undershoots its continuum counterpart)
    struct Ref { double s, z1, z2; };
    const Ref refs[] = {
        {0.25, -0.49014733, -0.47069728},
        {0.50, -1.20256211, -0.74757035},
        {0.75, -3.49130009, -1.54747965},
    };
    for (const Ref& r : refs) {
        const ZetaConstants z = zeta_constants(r.s);
        CHECK(std::fabs(z.z1 - r.z1) < 1e-6);
        CHECK(std::fabs(z.z2 - r.z2) < 1e-6);
        CHECK(z.z1 < 0.0);
        CHECK(z.z2 < 0.0);
    }
}

TEST_CASE("lattice zeta is converged in the cutoff and cached", "[constants]") {
    const ZetaConstants a = zeta_constants(0.5, 400);
    const ZetaConstants b = zeta_constants(0.5, 600);
    CHECK(std::fabs(a.z1 - b.z1) < 1e-8);
    CHECK(std::fabs(a.z2 - b.z2) < 1e-8);
    const ZetaConstants c = zeta_constants(0.5, 600); // cache hit
    CHECK(c.z1 == b.z1);
    CHECK(c.z2 == b.z2);
    CHECK_THROWS_AS(zeta_constants(1.5), std::invalid_argument);
}

TEST_CASE("gauss_legendre integrates polynomials exactly", "[quadrature]") {
    std::vector<double> x, w;
    gauss_legendre(8, x, w);
    double total = 0.0, m2 = 0.0, m14 = 0.0;
    for (int i = 0; i < 8; ++i) {
        total += w[i];
        m2 += w[i] * x[i] * x[i];
        m14 += w[i] * std::pow(x[i], 14.0); // degree 14 < 2*8
    }
    CHECK(std::fabs(total - 2.0) < 1e-14);
    CHECK(std::fabs(m2 - 2.0 / 3.0) < 1e-14);
    CHECK(std::fabs(m14 - 2.0 / 15.0) < 1e-13);
}

TEST_CASE("tanh_sinh handles endpoint singularities", "[quadrature]") {
    // int_0^1 x^{-1/2} dx = 2
    const double v = tanh_sinh([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-12);
    CHECK(std::fabs(v - 2.0) < 1e-10);
    // int_0^pi sin = 2
    const double w = tanh_sinh([](double x) { return std::sin(x); }, 0.0, pi, 1e-12);
    CHECK(std::fabs(w - 2.0) < 1e-12);
}
