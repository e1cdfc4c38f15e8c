#include <catch2/catch_amalgamated.hpp>

#include <nlperi/grid.hpp>
#include <nlperi/kernels.hpp>
#include <nlperi/operator.hpp>
#include <nlperi/solver.hpp>

#include <cmath>
#include <stdexcept>

using namespace nlperi;

namespace {

double rel_l2(const GridVectorField& a, const GridVectorField& b) {
    GridVectorField d = a;
    for (std::size_t k = 0; k < d.v.size(); ++k) d.v[k] -= b.v[k];
    return lp_norm(d, 2.0) / lp_norm(b, 2.0);
}

} // namespace

TEST_CASE("spectral solve inverts a manufactured right-hand side", "[solver]") {
    const int n = 32;
    const double alpha = 2.0, varpi = 0.7, s = 0.6;
    const KernelSpec spec = KernelSpec::infinite(s);
    const CoefficientField A = CoefficientField::constant(alpha);
    const GridVectorField u0 = random_band_limited<2>(n, 4, 42);

    GridVectorField G = apply_spectral(s, u0);
    for (std::size_t k = 0; k < G.v.size(); ++k) G.v[k] = alpha * G.v[k] + varpi * u0.v[k];

    SolveOptions opts;
    opts.varpi = varpi;
    SolveStats stats;
    const GridVectorField u = solve_spectral(spec, A, G, opts, &stats);
    CHECK(rel_l2(u, u0) < 1e-10);
    CHECK(stats.iterations == 0);

    SECTION("the spectral path through solve_regularized is the same solve") {
        SolveOptions sp = opts;
        sp.path = OperatorPath::spectral;
        const GridVectorField u2 = solve_regularized(spec, A, G, sp);
        for (std::size_t k = 0; k < u.v.size(); ++k) REQUIRE(u2.v[k] == u.v[k]);
    }

    SECTION("linearity of the solve") {
        const GridVectorField G2 = random_band_limited<2>(n, 4, 43);
        GridVectorField Gsum = G;
        for (std::size_t k = 0; k < Gsum.v.size(); ++k) Gsum.v[k] += 2.0 * G2.v[k];
        const GridVectorField ua = solve_spectral(spec, A, G, opts, nullptr);
        const GridVectorField ub = solve_spectral(spec, A, G2, opts, nullptr);
        const GridVectorField uc = solve_spectral(spec, A, Gsum, opts, nullptr);
        double err = 0.0, scale = 0.0;
        for (std::size_t k = 0; k < uc.v.size(); ++k) {
            err = std::max(err, std::fabs(uc.v[k] - ua.v[k] - 2.0 * ub.v[k]));
            scale = std::max(scale, std::fabs(uc.v[k]));
        }
        CHECK(err < 1e-12 * scale);
    }
}

TEST_CASE("spectral solve validates its requirements", "[solver]") {
    const GridVectorField G = random_band_limited<2>(16, 4, 5);
    SolveOptions opts;
    CHECK_THROWS_AS(
        solve_spectral(KernelSpec::finite(0.5, 0.25), CoefficientField::constant(1.0), G, opts,
                       nullptr),
        std::invalid_argument);
    CHECK_THROWS_AS(solve_spectral(KernelSpec::infinite(0.5),
                                   CoefficientField::checkerboard(1.0, 2.0, 4), G, opts, nullptr),
                    std::invalid_argument);
}

TEST_CASE("conjugate gradients undo the folded apply", "[solver]") {
    const int n = 32;
    const double varpi = 0.8, s = 0.5;
    const KernelSpec spec = KernelSpec::infinite(s);
    const CoefficientField A = CoefficientField::constant(1.5);
    const GridVectorField u0 = random_band_limited<2>(n, 6, 77);

    GridVectorField G = apply_fold(spec, A, u0);
    for (std::size_t k = 0; k < G.v.size(); ++k) G.v[k] += varpi * u0.v[k];

    SolveOptions opts;
    opts.varpi = varpi;
    opts.cg_tol = 1e-12;
    SolveStats stats;
    const GridVectorField u = solve_regularized(spec, A, G, opts, &stats);
    CHECK(rel_l2(u, u0) < 1e-8);
    CHECK(stats.iterations > 0);
    CHECK(stats.final_residual < opts.cg_tol);
    REQUIRE(stats.residuals.size() >= 2);
    CHECK(stats.residuals.back() < stats.residuals.front());
}

TEST_CASE("rough checkerboard coefficient converges and passes the weak test", "[solver]") {
    const int n = 32;
    const double s = 0.4;
    const KernelSpec spec = KernelSpec::infinite(s);
    const CoefficientField A = CoefficientField::checkerboard(1.0, 10.0, 8);
    const GridVectorField G = random_band_limited<2>(n, 8, 91);

    SolveOptions opts; // varpi = 1, cg_tol = 1e-10
    SolveStats stats;
    const GridVectorField u = solve_regularized(spec, A, G, opts, &stats);
    CHECK(stats.final_residual < 1e-8);
    CHECK(stats.iterations < 500);
    CHECK(weak_residual(u, G, spec, A, opts) < 1e-6);

    SECTION("a perturbed field has a visibly larger weak residual") {
        GridVectorField bad = u;
        const GridVectorField noise = random_band_limited<2>(n, 4, 17);
        const double amp = 0.05 * lp_norm(u, 2.0) / lp_norm(noise, 2.0);
        for (std::size_t k = 0; k < bad.v.size(); ++k) bad.v[k] += amp * noise.v[k];
        CHECK(weak_residual(bad, G, spec, A, opts) > 100.0 * weak_residual(u, G, spec, A, opts));
    }
}

TEST_CASE("the unregularized problem needs mean-zero data", "[solver]") {
    const int n = 16;
    const KernelSpec spec = KernelSpec::infinite(0.5);
    const CoefficientField A = CoefficientField::constant(1.0);
    SolveOptions opts;
    opts.varpi = 0.0;

    GridVectorField biased = random_band_limited<2>(n, 4, 3);
    for (std::size_t k = 0; k < biased.v.size(); k += 2) biased.v[k] += 0.25;
    CHECK_THROWS_AS(solve_regularized(spec, A, biased, opts), std::invalid_argument);
    SolveOptions sp = opts;
    sp.path = OperatorPath::spectral;
    CHECK_THROWS_AS(solve_regularized(spec, A, biased, sp), std::invalid_argument);

    SECTION("mean-zero data solves to a mean-zero field with a small true residual") {
        const GridVectorField G = random_band_limited<2>(n, 4, 3);
        opts.cg_tol = 1e-11;
        const GridVectorField u = solve_regularized(spec, A, G, opts);
        const auto mu = u.mean();
        CHECK(std::hypot(mu[0], mu[1]) < 1e-12);
        const GridVectorField Au = apply_fold(spec, A, u);
        CHECK(rel_l2(Au, G) < 1e-7);
    }
}

TEST_CASE("running out of iterations is an error, not a quiet bad answer", "[solver]") {
    const int n = 16;
    const KernelSpec spec = KernelSpec::infinite(0.5);
    const CoefficientField A = CoefficientField::checkerboard(1.0, 8.0, 4);
    const GridVectorField G = random_band_limited<2>(n, 4, 29);
    SolveOptions opts;
    opts.max_iter = 2;
    opts.cg_tol = 1e-14;
    CHECK_THROWS_AS(solve_regularized(spec, A, G, opts), std::runtime_error);
}
