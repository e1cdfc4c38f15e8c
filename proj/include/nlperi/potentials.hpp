#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "constants.hpp"
#include "grid.hpp"
#include "marcinkiewicz.hpp"
#include "spectral.hpp"

namespace nlperi {

// R_j: per-mode multiplier -i xi_j / |xi|, zero on the mean. The unpaired
// Nyquist line (xi_j = -n/2, where -xi aliases onto xi) only admits a real
// multiplier on real data, so the odd symbol is projected out there.
template <int M>
GridField<M> riesz_transform(int j, const GridField<M>& f) {
    if (j < 1 || j > 2) throw std::invalid_argument("riesz_transform: axis must be 1 or 2");
    SpectralField<M> F = forward_transform(f);
    const double nyq = -0.5 * f.n;
    apply_scalar_multiplier(F, [j, nyq](double x1, double x2) {
        const double xj = j == 1 ? x1 : x2;
        const double r = std::hypot(x1, x2);
        if (r == 0.0 || xj == nyq) return cplx(0.0, 0.0);
        return cplx(0.0, -xj / r);
    });
    return inverse_transform(F);
}

// I_s: (2 pi |xi|)^{-s}, demands mean-zero data (the symbol blows up at 0)
template <int M>
GridField<M> riesz_potential(double s, const GridField<M>& f) {
    SpectralField<M> F = forward_transform(f);
    double mean = 0.0, peak = 0.0;
    for (int c = 0; c < M; ++c) mean = std::max(mean, std::abs(F.at(0, 0, c)));
    for (const cplx& z : F.c) peak = std::max(peak, std::abs(z));
    if (mean > 1e-12 * std::max(1.0, peak))
        throw std::invalid_argument("riesz_potential: data must be mean-zero");
    apply_scalar_multiplier(F, [s](double x1, double x2) {
        const double r = std::hypot(x1, x2);
        if (r == 0.0) return cplx(0.0, 0.0);
        return cplx(std::pow(2.0 * pi * r, -s), 0.0);
    });
    return inverse_transform(F);
}

// J_s: (1 + 4 pi^2 |xi|^2)^{-s/2}, well defined at xi = 0 (value 1)
template <int M>
GridField<M> bessel_potential(double s, const GridField<M>& f) {
    SpectralField<M> F = forward_transform(f);
    apply_scalar_multiplier(F, [s](double x1, double x2) {
        const double q = 4.0 * pi * pi * (x1 * x1 + x2 * x2);
        return cplx(std::pow(1.0 + q, -0.5 * s), 0.0);
    });
    return inverse_transform(F);
}

// |f|_{L^p_s} = lp norm of ((1 + 4 pi^2 |xi|^2)^{s/2} fhat)^vee
template <int M>
double bessel_norm(const GridField<M>& f, double s, double p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("bessel_norm: p must lie in (1, inf)");
    return lp_norm(bessel_potential(-s, f), p);
}

// (Lf)_k = f_k - 3 R_k sum_j R_j f_j, assembled literally from Riesz transforms
inline GridVectorField stein_operator_L(const GridVectorField& f) {
    const int n = f.n;
    ScalarGridField f1(n), f2(n);
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    for (std::size_t k = 0; k < nn; ++k) {
        f1.v[k] = f.v[2 * k];
        f2.v[k] = f.v[2 * k + 1];
    }
    ScalarGridField r1 = riesz_transform(1, f1), r2 = riesz_transform(2, f2);
    ScalarGridField div(n);
    for (std::size_t k = 0; k < nn; ++k) div.v[k] = r1.v[k] + r2.v[k];
    ScalarGridField c1 = riesz_transform(1, div), c2 = riesz_transform(2, div);
    GridVectorField out(n);
    for (std::size_t k = 0; k < nn; ++k) {
        out.v[2 * k] = f.v[2 * k] - 3.0 * c1.v[k];
        out.v[2 * k + 1] = f.v[2 * k + 1] - 3.0 * c2.v[k];
    }
    return out;
}

// same operator as a single per-mode matrix multiplier I + 3 xihat xihat^T
inline GridVectorField stein_operator_L_symbol(const GridVectorField& f) {
    SpectralField<2> F = forward_transform(f);
    apply_multiplier(F, [](double x1, double x2) {
        std::array<cplx, 4> m{cplx(1.0), cplx(0.0), cplx(0.0), cplx(1.0)};
        const double r2 = x1 * x1 + x2 * x2;
        if (r2 == 0.0) return m; // the mean passes through, matching the formula path
        const double e1 = x1 / std::sqrt(r2), e2 = x2 / std::sqrt(r2);
        m[0] += 3.0 * e1 * e1;
        m[1] += 3.0 * e1 * e2;
        m[2] += 3.0 * e1 * e2;
        m[3] += 3.0 * e2 * e2;
        return m;
    });
    return inverse_transform(F);
}

// inverse symbol I - (3/4) xihat xihat^T (eigenvalues 1 and 1/4)
inline GridVectorField stein_operator_L_inverse(const GridVectorField& f) {
    SpectralField<2> F = forward_transform(f);
    apply_multiplier(F, [](double x1, double x2) {
        std::array<cplx, 4> m{cplx(1.0), cplx(0.0), cplx(0.0), cplx(1.0)};
        const double r2 = x1 * x1 + x2 * x2;
        if (r2 == 0.0) return m;
        const double e1 = x1 / std::sqrt(r2), e2 = x2 / std::sqrt(r2);
        m[0] -= 0.75 * e1 * e1;
        m[1] -= 0.75 * e1 * e2;
        m[2] -= 0.75 * e1 * e2;
        m[3] -= 0.75 * e2 * e2;
        return m;
    });
    return inverse_transform(F);
}

// sup over the grid's frequency range of (1+4pi^2|xi|^2)^{s/2} - (2pi|xi|)^s,
// the bounded bridge between the Bessel and Riesz scales (its analytic sup is 1
// at xi = 0, and it decays like |xi|^{s-2})
inline double bessel_riesz_bracket_sup(double s, int n) {
    double sup = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x1 = signed_freq(i, n), x2 = signed_freq(j, n);
            const double q = 4.0 * pi * pi * (x1 * x1 + x2 * x2);
            const double bracket = std::pow(1.0 + q, 0.5 * s) - std::pow(q, 0.5 * s);
            sup = std::max(sup, std::fabs(bracket));
        }
    return sup;
}

struct BesselNormReport {
    double p = 0.0;
    double s = 0.0;
    double bessel_norm = 0.0;
    double plain_norm = 0.0;
    double ds_norm = 0.0;
    double ratio_lower = 0.0;
    double ratio_upper = 0.0;
};

// the two-sided comparison |f|_{L^p_s} vs |f|_p + |D^s f|_p
inline BesselNormReport characterization_report(const GridVectorField& f, double s, double p,
                                                const TailPolicy& tail = {}) {
    if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("characterization_report: p must lie in (1, inf)");
    if (!(s > 0.0) || !(s < 1.0)) throw std::invalid_argument("characterization_report: s must lie in (0, 1)");
    BesselNormReport rep;
    rep.p = p;
    rep.s = s;
    rep.bessel_norm = bessel_norm(f, s, p);
    rep.plain_norm = lp_norm(f, p);
    rep.ds_norm = lp_norm(d_s(f, s, tail), p);
    const double sum = rep.plain_norm + rep.ds_norm;
    rep.ratio_lower = sum > 0.0 ? rep.bessel_norm / sum : 0.0;
    rep.ratio_upper = rep.bessel_norm > 0.0 ? sum / rep.bessel_norm : 0.0;
    return rep;
}

} // namespace nlperi
