#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "constants.hpp"
#include "grid.hpp"
#include "kernels.hpp"
#include "marcinkiewicz.hpp"
#include "potentials.hpp"
#include "quadrature.hpp"
#include "spectral.hpp"

namespace nlperi {

using Mat3 = std::array<double, 9>;
using Mat3c = std::array<cplx, 9>;

namespace detail {

// block matrix A(xi) = [[-xihat xihat^T, -i xihat], [-i xihat^T, 1]]; A^2 = 0
inline Mat3c poisson_block(double x1, double x2) {
    Mat3c A{};
    const double r = std::hypot(x1, x2);
    if (r == 0.0) return A;
    const double e1 = x1 / r, e2 = x2 / r;
    A[0] = -e1 * e1;
    A[1] = -e1 * e2;
    A[3] = -e1 * e2;
    A[4] = -e2 * e2;
    A[2] = cplx(0.0, -e1);
    A[5] = cplx(0.0, -e2);
    A[6] = cplx(0.0, -e1);
    A[7] = cplx(0.0, -e2);
    A[8] = 1.0;
    return A;
}

inline std::array<cplx, 3> mat3_apply(const Mat3c& m, const std::array<cplx, 3>& v) {
    std::array<cplx, 3> out{};
    for (int r = 0; r < 3; ++r)
        out[r] = m[3 * r] * v[0] + m[3 * r + 1] * v[1] + m[3 * r + 2] * v[2];
    return out;
}

} // namespace detail

// Phat_t(xi) = e^{-sigma t} (I + sigma t A(xi)), sigma = 2 pi |xi|; identity at xi = 0
inline Mat3c poisson_symbol(const Point& xi, double t) {
    if (t < 0.0) throw std::invalid_argument("poisson_symbol: t must be nonnegative");
    Mat3c m{};
    m[0] = m[4] = m[8] = 1.0;
    const double r = std::hypot(xi[0], xi[1]);
    if (r == 0.0) return m;
    const double sigma = 2.0 * pi * r;
    const Mat3c A = detail::poisson_block(xi[0], xi[1]);
    const double damp = std::exp(-sigma * t);
    for (int k = 0; k < 9; ++k) m[k] = damp * (m[k] + sigma * t * A[k]);
    return m;
}

// d/dt Phat = sigma e^{-sigma t} [ (1 - sigma t) A - I ]
inline Mat3c dt_symbol(const Point& xi, double t) {
    if (t < 0.0) throw std::invalid_argument("dt_symbol: t must be nonnegative");
    Mat3c m{};
    const double r = std::hypot(xi[0], xi[1]);
    if (r == 0.0) return m;
    const double sigma = 2.0 * pi * r;
    const Mat3c A = detail::poisson_block(xi[0], xi[1]);
    const double damp = sigma * std::exp(-sigma * t);
    for (int k = 0; k < 9; ++k) {
        cplx v = (1.0 - sigma * t) * A[k];
        if (k % 4 == 0) v -= 1.0;
        m[k] = damp * v;
    }
    return m;
}

// d^2/dt^2 Phat = sigma^2 e^{-sigma t} [ I - (2 - sigma t) A ]
inline Mat3c dtt_symbol(const Point& xi, double t) {
    if (t < 0.0) throw std::invalid_argument("dtt_symbol: t must be nonnegative");
    Mat3c m{};
    const double r = std::hypot(xi[0], xi[1]);
    if (r == 0.0) return m;
    const double sigma = 2.0 * pi * r;
    const Mat3c A = detail::poisson_block(xi[0], xi[1]);
    const double damp = sigma * sigma * std::exp(-sigma * t);
    for (int k = 0; k < 9; ++k) {
        cplx v = -(2.0 - sigma * t) * A[k];
        if (k % 4 == 0) v += 1.0;
        m[k] = damp * v;
    }
    return m;
}

// P_t(x) = (2(d+1)/omega_d) t (|x|^2+t^2)^{-(d+3)/2} [[x x^T, t x],[t x^T, t^2]], d = 2
inline Mat3 poisson_kernel_spatial(const Point& x, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("poisson_kernel_spatial: t must be positive");
    const double c = 2.0 * 3.0 / sphere_measure(2); // 3/(2 pi)
    const double w = x[0] * x[0] + x[1] * x[1] + t * t;
    const double f = c * t * std::pow(w, -2.5);
    return Mat3{f * x[0] * x[0], f * x[0] * x[1], f * t * x[0],
                f * x[0] * x[1], f * x[1] * x[1], f * t * x[1],
                f * t * x[0],   f * t * x[1],   f * t * t};
}

// pbar(x,t) = (2(d+1)/omega_d) t |x| (|x|^2+t^2)^{-(d+3)/2} (x, t)
inline std::array<double, 3> pbar(const Point& x, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("pbar: t must be positive");
    const double c = 2.0 * 3.0 / sphere_measure(2);
    const double r = std::hypot(x[0], x[1]);
    const double w = r * r + t * t;
    const double f = c * t * r * std::pow(w, -2.5);
    return {f * x[0], f * x[1], f * t};
}

// integral of P_t over |x| <= R by tensor (angular trapezoid x radial Gauss
// panels) quadrature, completed by the analytic radial tails of the full-plane
// integral, minus the identity. The approximation-to-identity property makes
// every entry of the result small.
inline Mat3 kernel_mass_check(double t, double box_radius) {
    if (!(t > 0.0)) throw std::invalid_argument("kernel_mass_check: t must be positive");
    if (!(box_radius > 0.0)) throw std::invalid_argument("kernel_mass_check: radius must be positive");
    const double R = box_radius;
    // radial nodes: geometric panels resolving the scale r ~ t
    std::vector<double> rn, rw;
    {
        std::vector<double> gx, gw;
        gauss_legendre(24, gx, gw);
        std::vector<double> edges{0.0};
        double e = std::min(t, R);
        while (edges.back() < R) {
            edges.push_back(std::min(e, R));
            e *= 2.0;
        }
        for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
            const double a = edges[p], b = edges[p + 1];
            for (std::size_t k = 0; k < gx.size(); ++k) {
                rn.push_back(0.5 * (b - a) * gx[k] + 0.5 * (a + b));
                rw.push_back(0.5 * (b - a) * gw[k]);
            }
        }
    }
    const int ntheta = 256;
    Mat3 acc{};
    const double c = 2.0 * 3.0 / sphere_measure(2);
    for (int k = 0; k < ntheta; ++k) {
        const double th = 2.0 * pi * k / ntheta;
        const double co = std::cos(th), si = std::sin(th);
        const double wth = 2.0 * pi / ntheta;
        for (std::size_t q = 0; q < rn.size(); ++q) {
            const double r = rn[q];
            const double f = c * t * std::pow(r * r + t * t, -2.5) * rw[q] * r * wth;
            const double x1 = r * co, x2 = r * si;
            acc[0] += f * x1 * x1;
            acc[1] += f * x1 * x2;
            acc[2] += f * t * x1;
            acc[3] += f * x1 * x2;
            acc[4] += f * x2 * x2;
            acc[5] += f * t * x2;
            acc[6] += f * t * x1;
            acc[7] += f * t * x2;
            acc[8] += f * t * t;
        }
    }
    // analytic annulus |x| > R: off-diagonal blocks vanish by odd symmetry
    const double W = R * R + t * t;
    const double tail_tl = 1.5 * t / std::sqrt(W) - 0.5 * t * t * t * std::pow(W, -1.5);
    const double tail_br = t * t * t * std::pow(W, -1.5);
    acc[0] += tail_tl;
    acc[4] += tail_tl;
    acc[8] += tail_br;
    acc[0] -= 1.0;
    acc[4] -= 1.0;
    acc[8] -= 1.0;
    return acc;
}

// U(x, t): embed f as (f1, f2, 0), multiply per mode by Phat_t, invert
inline GridField<3> poisson_extend(const GridVectorField& f, double t) {
    if (t < 0.0) throw std::invalid_argument("poisson_extend: t must be nonnegative");
    SpectralField<2> F = forward_transform(f);
    const int n = f.n;
    SpectralField<3> E(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            E.at(i, j, 0) = F.at(i, j, 0);
            E.at(i, j, 1) = F.at(i, j, 1);
            E.at(i, j, 2) = 0.0;
        }
    apply_multiplier(E, [t](double x1, double x2) { return poisson_symbol({x1, x2}, t); });
    return inverse_transform(E);
}

struct TimeGrid {
    std::vector<double> nodes;
    std::vector<double> weights; // for int_0^infty t phi(t) dt: the t factor is absorbed
    double tail_bound = 0.0;     // decay factor of the slowest nonzero torus mode

    static TimeGrid make(int count = 96, double t_min = 1e-4, double t_max = 8.0) {
        if (count < 2 || !(t_min > 0.0) || !(t_max > t_min))
            throw std::invalid_argument("TimeGrid::make: need count >= 2, 0 < t_min < t_max");
        TimeGrid tg;
        const double dl = (std::log(t_max) - std::log(t_min)) / (count - 1);
        for (int k = 0; k < count; ++k) {
            const double tk = t_min * std::exp(dl * k);
            const double ck = (k == 0 || k == count - 1) ? 0.5 : 1.0;
            tg.nodes.push_back(tk);
            tg.weights.push_back(ck * tk * tk * dl);
        }
        tg.weights[0] += 0.5 * t_min * t_min; // head: int_0^{t_min} t dt at frozen integrand
        tg.tail_bound = std::exp(-4.0 * pi * t_max);
        return tg;
    }
};

namespace detail {

inline void require_mean_zero(const GridVectorField& f, const char* who) {
    const auto m = f.mean();
    double sup = 0.0;
    for (double x : f.v) sup = std::max(sup, std::fabs(x));
    if (std::hypot(m[0], m[1]) > 1e-12 * (1.0 + sup))
        throw std::invalid_argument(std::string(who) + ": data must be mean-zero");
}

} // namespace detail

// g1(f)(x) = ( int_0^infty t |d/dt U(x,t)|^2 dt )^{1/2} by the time grid
inline ScalarGridField g1(const GridVectorField& f, const TimeGrid& tg) {
    detail::require_mean_zero(f, "g1");
    const int n = f.n;
    SpectralField<2> F = forward_transform(f);
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    std::vector<double> acc(nn, 0.0);
    for (std::size_t k = 0; k < tg.nodes.size(); ++k) {
        const double t = tg.nodes[k], w = tg.weights[k];
        SpectralField<3> D(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double x1 = signed_freq(i, n), x2 = signed_freq(j, n);
                const Mat3c m = dt_symbol({x1, x2}, t);
                const std::array<cplx, 3> v{F.at(i, j, 0), F.at(i, j, 1), cplx(0.0)};
                const auto dv = detail::mat3_apply(m, v);
                D.at(i, j, 0) = dv[0];
                D.at(i, j, 1) = dv[1];
                D.at(i, j, 2) = dv[2];
            }
        GridField<3> du = inverse_transform(D);
        for (std::size_t q = 0; q < nn; ++q) {
            const double a = du.v[3 * q], b = du.v[3 * q + 1], c = du.v[3 * q + 2];
            acc[q] += w * (a * a + b * b + c * c);
        }
    }
    ScalarGridField out(n);
    for (std::size_t q = 0; q < nn; ++q) out.v[q] = std::sqrt(std::max(0.0, acc[q]));
    return out;
}

struct G1Identity {
    double lhs = 0.0;               // |g1(f)|_2^2 by time quadrature
    double rhs = 0.0;               // (1/4) sum |(I + xihat xihat^T) fhat|^2
    double analytic_per_mode = 0.0; // closed form assembled from the stated Gamma values
    double corrected_rhs = 0.0;     // per-mode integral evaluated exactly: (1/4)(|fhat|^2 + |xihat.fhat|^2)
};

inline G1Identity g1_l2_identity_check(const GridVectorField& f, const TimeGrid& tg) {
    detail::require_mean_zero(f, "g1_l2_identity_check");
    G1Identity out;
    const double g = lp_norm(g1(f, tg), 2.0);
    out.lhs = g * g;
    SpectralField<2> F = forward_transform(f);
    const int n = f.n;
    // the four stated Gamma-integral values
    const double gam1 = 0.5, gam2 = 1.0, gam3 = -1.0, gam4 = 1.5;
    const double trans_coeff = gam1 / 2.0;
    const double long_coeff = (gam1 + gam2 + gam3 + gam4) / 2.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x1 = signed_freq(i, n), x2 = signed_freq(j, n);
            const double r = std::hypot(x1, x2);
            if (r == 0.0) continue;
            const cplx v1 = F.at(i, j, 0), v2 = F.at(i, j, 1);
            const double e1 = x1 / r, e2 = x2 / r;
            const double vv = std::norm(v1) + std::norm(v2);
            const double ll = std::norm(e1 * v1 + e2 * v2);
            out.rhs += 0.25 * (vv + 3.0 * ll);
            out.analytic_per_mode += trans_coeff * (vv - ll) + long_coeff * ll;
            out.corrected_rhs += 0.25 * (vv + ll);
        }
    return out;
}

struct RQuad {
    double r_min = 1e-8;
    int nodes = 129; // odd count engages the fourth-order composite rule
};

// per-mode check of d/dt Uhat(t) = -1/Gamma(1-s) int_0^infty d^2/dt^2 Uhat_s(t+r) r^{-s} dr,
// Uhat_s = potential * Phat * fhat. The stated potential is the scalar
// (2 pi |xi|)^{-s}; corrected_potential switches to the matrix
// (2 pi |xi|)^{-s} (I + s A), under which the identity closes exactly.
// The r-integral runs on a log grid with an analytic head below r_min.
inline double fractional_time_identity_check(const GridVectorField& f, double s, double t,
                                             const RQuad& rq = {},
                                             bool corrected_potential = false) {
    if (!(s > 0.0) || !(s < 1.0))
        throw std::invalid_argument("fractional_time_identity_check: s must lie in (0, 1)");
    if (!(t > 0.0)) throw std::invalid_argument("fractional_time_identity_check: t must be positive");
    if (rq.nodes < 4 || !(rq.r_min > 0.0))
        throw std::invalid_argument("fractional_time_identity_check: bad r grid");
    detail::require_mean_zero(f, "fractional_time_identity_check");
    SpectralField<2> F = forward_transform(f);
    const int n = f.n;
    double peak = 0.0;
    for (const cplx& z : F.c) peak = std::max(peak, std::abs(z));
    if (peak == 0.0) return 0.0;
    const double gam = std::tgamma(1.0 - s);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x1 = signed_freq(i, n), x2 = signed_freq(j, n);
            const double r = std::hypot(x1, x2);
            if (r == 0.0) continue;
            const std::array<cplx, 3> v{F.at(i, j, 0), F.at(i, j, 1), cplx(0.0)};
            const double amp = std::sqrt(std::norm(v[0]) + std::norm(v[1]));
            if (amp < 1e-14 * peak) continue;
            const double sigma = 2.0 * pi * r;
            std::array<cplx, 3> w = v;
            if (corrected_potential) {
                const Mat3c A = detail::poisson_block(x1, x2);
                const auto Av = detail::mat3_apply(A, v);
                for (int c = 0; c < 3; ++c) w[c] += s * Av[c];
            }
            const double pot = std::pow(sigma, -s);
            const auto lhs = detail::mat3_apply(dt_symbol({x1, x2}, t), v);
            // log-spaced panel on [r_min, 40/sigma] plus the frozen-integrand
            // head; composite Simpson in log r when the panel count is even,
            // trapezoid otherwise
            const double r_max = 40.0 / sigma;
            const double dl = (std::log(r_max) - std::log(rq.r_min)) / (rq.nodes - 1);
            const bool simpson = (rq.nodes - 1) % 2 == 0;
            std::array<cplx, 3> integral{};
            for (int q = 0; q < rq.nodes; ++q) {
                const double rr = rq.r_min * std::exp(dl * q);
                double cq;
                if (simpson)
                    cq = (q == 0 || q == rq.nodes - 1) ? 1.0 / 3.0 : (q % 2 ? 4.0 / 3.0 : 2.0 / 3.0);
                else
                    cq = (q == 0 || q == rq.nodes - 1) ? 0.5 : 1.0;
                const double wq = cq * dl * std::pow(rr, 1.0 - s);
                const auto dtt = detail::mat3_apply(dtt_symbol({x1, x2}, t + rr), w);
                for (int c = 0; c < 3; ++c) integral[c] += wq * dtt[c];
            }
            const double head = std::pow(rq.r_min, 1.0 - s) / (1.0 - s);
            const auto dtt0 = detail::mat3_apply(dtt_symbol({x1, x2}, t), w);
            for (int c = 0; c < 3; ++c) integral[c] += head * dtt0[c];
            double dev2 = 0.0;
            for (int c = 0; c < 3; ++c) {
                const cplx rhs = -pot / gam * integral[c];
                dev2 += std::norm(lhs[c] - rhs);
            }
            worst = std::max(worst, std::sqrt(dev2) / amp);
        }
    return worst;
}

struct DominationResult {
    double max_ratio = 0.0;
    ScalarGridField ratios;
    int excluded = 0;
};

// g1(f)(x) against D^s applied to the Riesz potential of f, pointwise
inline DominationResult pointwise_domination_check(const GridVectorField& f, double s,
                                                   const TimeGrid& tg,
                                                   const TailPolicy& tail = {}) {
    detail::require_mean_zero(f, "pointwise_domination_check");
    DominationResult out;
    out.ratios = ScalarGridField(f.n);
    GridVectorField fs = riesz_potential(s, f);
    ScalarGridField den = d_s(fs, s, tail);
    ScalarGridField num = g1(f, tg);
    for (std::size_t k = 0; k < num.v.size(); ++k) {
        if (den.v[k] < 1e-14) {
            ++out.excluded;
            out.ratios.v[k] = 0.0;
            continue;
        }
        out.ratios.v[k] = num.v[k] / den.v[k];
        out.max_ratio = std::max(out.max_ratio, out.ratios.v[k]);
    }
    return out;
}

} // namespace nlperi
