#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"
#include "operator.hpp"
#include "spectral.hpp"

namespace nlperi {

enum class OperatorPath { fold, spectral };

struct SolveOptions {
    double varpi = 1.0;       // zeroth-order regularization weight
    double cg_tol = 1e-10;    // relative residual target |r|/|G|
    int max_iter = 2000;
    OperatorPath path = OperatorPath::fold;
    TailPolicy tail{};
};

struct SolveStats {
    int iterations = 0;
    double final_residual = 0.0;
    std::vector<double> residuals;
};

// (varpi + L) u = G by diagonalization: the symbol at xi is
// varpi + |2 pi xi|^{2s} (a I + b xihat xihat^T), inverted per mode through
// (alpha I + beta P)^{-1} = (1/alpha)(I - beta/(alpha+beta) P) for the rank-one
// projector P. Requires a constant coefficient and infinite horizon.
inline GridVectorField solve_spectral(const KernelSpec& spec, const CoefficientField& A,
                                      const GridVectorField& G, const SolveOptions& opts,
                                      SolveStats* stats) {
    if (!spec.is_infinite())
        throw std::invalid_argument("solve_spectral: requires an infinite horizon");
    if (A.kind != CoefficientKind::constant)
        throw std::invalid_argument("solve_spectral: requires a constant coefficient");
    const MultiplierConstants mc = cached_multiplier_constants(2, spec.s);
    const double a = A.alpha1 * mc.a, b = A.alpha1 * mc.b;
    const double varpi = opts.varpi;
    if (varpi == 0.0) {
        GridVectorField mz = G;
        const auto mean = mz.mean();
        if (std::hypot(mean[0], mean[1]) > 1e-12 * (1.0 + lp_norm(G, 2.0)))
            throw std::invalid_argument("solve_regularized: varpi = 0 needs mean-zero data");
    }
    SpectralField<2> gh = forward_transform(G);
    const int n = G.n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x1 = signed_freq(i, n), x2 = signed_freq(j, n);
            const double r2 = x1 * x1 + x2 * x2;
            cplx g1 = gh.at(i, j, 0), g2 = gh.at(i, j, 1);
            if (r2 == 0.0) {
                if (varpi == 0.0) {
                    gh.at(i, j, 0) = 0.0;
                    gh.at(i, j, 1) = 0.0;
                } else {
                    gh.at(i, j, 0) = g1 / varpi;
                    gh.at(i, j, 1) = g2 / varpi;
                }
                continue;
            }
            const double lam = std::pow(4.0 * pi * pi * r2, spec.s);
            const double alpha = varpi + lam * a, beta = lam * b;
            const double e1 = x1 / std::sqrt(r2), e2 = x2 / std::sqrt(r2);
            const cplx dot = e1 * g1 + e2 * g2;
            const cplx corr = (beta / (alpha + beta)) * dot;
            gh.at(i, j, 0) = (g1 - corr * e1) / alpha;
            gh.at(i, j, 1) = (g2 - corr * e2) / alpha;
        }
    if (stats) {
        stats->iterations = 0;
        stats->final_residual = 0.0;
        stats->residuals.clear();
    }
    return inverse_transform(gh);
}

// conjugate gradient on the symmetric positive operator varpi + L, with the
// folded fast apply. varpi = 0 is admissible only for mean-zero data (L
// annihilates constants); the iterates are projected to mean zero defensively.
inline GridVectorField solve_regularized(const KernelSpec& spec, const CoefficientField& A,
                                         const GridVectorField& G,
                                         const SolveOptions& opts = {},
                                         SolveStats* stats = nullptr) {
    if (opts.path == OperatorPath::spectral) return solve_spectral(spec, A, G, opts, stats);
    const int n = G.n;
    OperatorContext ctx(spec, A, n, opts.tail);
    const double varpi = opts.varpi;
    const bool project = varpi == 0.0;
    GridVectorField g = G;
    if (project) {
        const auto mean = g.mean();
        if (std::hypot(mean[0], mean[1]) > 1e-12 * (1.0 + lp_norm(G, 2.0)))
            throw std::invalid_argument("solve_regularized: varpi = 0 needs mean-zero data");
        g.subtract_mean();
    }
    const std::size_t m = g.v.size();
    auto dot = [m](const GridVectorField& x, const GridVectorField& y) {
        double acc = 0.0;
        for (std::size_t k = 0; k < m; ++k) acc += x.v[k] * y.v[k];
        return acc;
    };
    auto apply_op = [&](const GridVectorField& x) {
        GridVectorField y = ctx.apply(x);
        if (varpi != 0.0)
            for (std::size_t k = 0; k < m; ++k) y.v[k] += varpi * x.v[k];
        if (project) y.subtract_mean();
        return y;
    };
    const double gnorm = std::sqrt(dot(g, g));
    GridVectorField u(n); // zero initial guess
    GridVectorField r = g, p = g;
    double rr = dot(r, r);
    SolveStats local;
    if (gnorm == 0.0) {
        if (stats) *stats = local;
        return u;
    }
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        const double rel = std::sqrt(rr) / gnorm;
        local.residuals.push_back(rel);
        if (rel < opts.cg_tol) break;
        GridVectorField ap = apply_op(p);
        const double pap = dot(p, ap);
        if (!(pap > 0.0))
            throw std::runtime_error("solve_regularized: operator lost positivity (pAp = " +
                                     std::to_string(pap) + ")");
        const double alpha = rr / pap;
        for (std::size_t k = 0; k < m; ++k) {
            u.v[k] += alpha * p.v[k];
            r.v[k] -= alpha * ap.v[k];
        }
        const double rr_next = dot(r, r);
        const double beta = rr_next / rr;
        rr = rr_next;
        for (std::size_t k = 0; k < m; ++k) p.v[k] = r.v[k] + beta * p.v[k];
    }
    local.iterations = it;
    local.final_residual = std::sqrt(rr) / gnorm;
    if (local.final_residual >= opts.cg_tol && it >= opts.max_iter)
        throw std::runtime_error("solve_regularized: no convergence after " +
                                 std::to_string(opts.max_iter) +
                                 " iterations, residual = " + std::to_string(local.final_residual));
    if (project) u.subtract_mean();
    if (stats) *stats = local;
    return u;
}

// max over random band-limited trial fields phi of
// |mean<(varpi + L)u, phi> - mean<F, phi>| with phi normalized in the dual
// seminorm sqrt(2c sum |2 pi xi|^{2s} |phihat|^2); the operator is applied once.
inline double weak_residual(const GridVectorField& u, const GridVectorField& F,
                            const KernelSpec& spec, const CoefficientField& A,
                            const SolveOptions& opts = {}, int trial_count = 16,
                            std::uint64_t seed = 1234) {
    const int n = u.n;
    OperatorContext ctx(spec, A, n, opts.tail);
    GridVectorField w = ctx.apply(u);
    if (opts.varpi != 0.0)
        for (std::size_t k = 0; k < w.v.size(); ++k) w.v[k] += opts.varpi * u.v[k];
    const MultiplierConstants mc = cached_multiplier_constants(2, spec.s);
    const std::size_t m = w.v.size();
    double worst = 0.0;
    for (int t = 0; t < trial_count; ++t) {
        GridVectorField phi =
            random_band_limited<2>(n, std::max(2, n / 4), seed + static_cast<std::uint64_t>(t));
        SpectralField<2> ph = forward_transform(phi);
        double energy = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double x1 = signed_freq(i, n), x2 = signed_freq(j, n);
                const double r2 = x1 * x1 + x2 * x2;
                if (r2 == 0.0) continue;
                const double lam = std::pow(4.0 * pi * pi * r2, spec.s);
                energy += lam * (std::norm(ph.at(i, j, 0)) + std::norm(ph.at(i, j, 1)));
            }
        const double scale = std::sqrt(2.0 * mc.c * energy);
        if (scale == 0.0) continue;
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            lhs += w.v[k] * phi.v[k];
            rhs += F.v[k] * phi.v[k];
        }
        const double nn = double(n) * n;
        worst = std::max(worst, std::fabs(lhs / nn - rhs / nn) / scale);
    }
    return worst;
}

} // namespace nlperi
