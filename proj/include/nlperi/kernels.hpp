#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "constants.hpp"
#include "grid.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace nlperi {

using Point = std::array<double, 2>;
using Mat2 = std::array<double, 4>; // row-major {m11, m12, m21, m22}

inline double torus_wrap(double x) { return x - std::floor(x); }

// minimum-image displacement, each component in [-0.5, 0.5)
inline double min_image(double t) {
    t -= std::floor(t + 0.5);
    return t;
}

struct KernelSpec {
    double s = 0.5;
    double horizon = std::numeric_limits<double>::infinity();
    double c_h = 1.0;

    bool is_infinite() const { return std::isinf(horizon); }

    static KernelSpec infinite(double s) {
        if (s <= 0.0 || s >= 1.0) throw std::invalid_argument("KernelSpec: s must be in (0,1)");
        return {s, std::numeric_limits<double>::infinity(), 1.0};
    }
    // c_h chosen so the local (h -> 0) limit matches the Navier operator of the
    // matched bulk/shear moduli: c_h * h^{2-2s}/(2-2s) * |S^{d-1}|/(d(d+2)) * 1/2 = 1
    static KernelSpec finite(double s, double h) {
        if (s <= 0.0 || s >= 1.0) throw std::invalid_argument("KernelSpec: s must be in (0,1)");
        if (!(h > 0.0) || h > 0.5)
            throw std::invalid_argument("KernelSpec: finite horizon must lie in (0, 0.5]");
        const double ch = 8.0 * (2.0 - 2.0 * s) / (pi * std::pow(h, 2.0 - 2.0 * s));
        return {s, h, ch};
    }
};

enum class CoefficientKind { constant, separable, checkerboard, random_symmetric };

// A(x,y) = (a(x) + a(y))/2 with a one of four scalar profiles; symmetry and the
// [alpha1, alpha2] bounds are exact by construction.
struct CoefficientField {
    CoefficientKind kind = CoefficientKind::constant;
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    int tiles = 1;              // checkerboard tiles per axis
    std::uint64_t seed = 0;     // random_symmetric
    ScalarGridField a;          // separable profile / materialized random draw

    static CoefficientField constant(double alpha) {
        if (!(alpha > 0.0)) throw std::invalid_argument("CoefficientField: alpha must be positive");
        CoefficientField f;
        f.kind = CoefficientKind::constant;
        f.alpha1 = f.alpha2 = alpha;
        return f;
    }
    static CoefficientField separable(ScalarGridField profile) {
        CoefficientField f;
        f.kind = CoefficientKind::separable;
        double lo = profile.v[0], hi = profile.v[0];
        for (double x : profile.v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        if (!(lo > 0.0)) throw std::invalid_argument("CoefficientField: profile must be positive");
        f.alpha1 = lo;
        f.alpha2 = hi;
        f.a = std::move(profile);
        return f;
    }
    static CoefficientField checkerboard(double a1, double a2, int k) {
        if (!(a1 > 0.0) || !(a2 > 0.0) || k < 1)
            throw std::invalid_argument("CoefficientField: bad checkerboard parameters");
        CoefficientField f;
        f.kind = CoefficientKind::checkerboard;
        f.alpha1 = std::min(a1, a2);
        f.alpha2 = std::max(a1, a2);
        f.tiles = k;
        // tile value alpha1 on even parity, alpha2 on odd
        return f;
    }
    static CoefficientField random_symmetric(double a1, double a2, std::uint64_t seed,
                                             int resolution = 64) {
        if (!(a1 > 0.0) || !(a2 >= a1)) throw std::invalid_argument("CoefficientField: need 0 < a1 <= a2");
        CoefficientField f;
        f.kind = CoefficientKind::random_symmetric;
        f.alpha1 = a1;
        f.alpha2 = a2;
        f.seed = seed;
        f.a = ScalarGridField(resolution);
        Rng rng(seed);
        for (double& x : f.a.v) x = rng.uniform(a1, a2);
        return f;
    }

    bool is_constant() const { return kind == CoefficientKind::constant; }

    // point evaluation of the scalar profile a (piecewise constant per cell)
    double a_at(double x1, double x2) const {
        switch (kind) {
            case CoefficientKind::constant:
                return alpha1;
            case CoefficientKind::checkerboard: {
                const int i = static_cast<int>(std::floor(torus_wrap(x1) * tiles));
                const int j = static_cast<int>(std::floor(torus_wrap(x2) * tiles));
                return ((i + j) % 2 == 0) ? alpha1 : alpha2;
            }
            case CoefficientKind::separable:
            case CoefficientKind::random_symmetric: {
                const int m = a.n;
                int i = static_cast<int>(std::floor(torus_wrap(x1) * m));
                int j = static_cast<int>(std::floor(torus_wrap(x2) * m));
                i = std::min(i, m - 1);
                j = std::min(j, m - 1);
                return a.at(i, j, 0);
            }
        }
        return alpha1;
    }

    // a sampled at the cell sites x = (i/n, j/n)
    ScalarGridField sample(int n) const {
        ScalarGridField g(n);
        const double h = 1.0 / n;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g.at(i, j, 0) = a_at(i * h, j * h);
        return g;
    }
};

inline double eval_coefficient(const CoefficientField& A, const Point& x, const Point& y) {
    return 0.5 * (A.a_at(x[0], x[1]) + A.a_at(y[0], y[1]));
}

// A(x,y)/|z|^{d+2s} zhat (x) zhat with z the minimum image of x - y; zero beyond
// a finite horizon.
inline Mat2 bond_matrix(const Point& x, const Point& y, const KernelSpec& spec,
                        const CoefficientField& A) {
    const double z1 = min_image(x[0] - y[0]);
    const double z2 = min_image(x[1] - y[1]);
    const double r2 = z1 * z1 + z2 * z2;
    if (r2 == 0.0) throw std::invalid_argument("bond_matrix: x = y (singular bond)");
    if (!spec.is_infinite() && r2 > spec.horizon * spec.horizon) return {0.0, 0.0, 0.0, 0.0};
    const double w = eval_coefficient(A, x, y) * std::pow(r2, -0.5 * (2.0 + 2.0 + 2.0 * spec.s));
    // at |z_k| = 1/2 the two minimum images are equidistant; averaging them
    // keeps the matrix even in z (off-diagonal cancels, diagonal is shared)
    const double off = (z1 == -0.5 || z2 == -0.5) ? 0.0 : z1 * z2;
    return {w * z1 * z1, w * off, w * off, w * z2 * z2};
}

// int_{|z|<delta} |G z . zhat|^2 / |z|^{2+2s} dz in closed form (d = 2):
// radial part delta^{2-2s}/(2-2s); angular part of (p c^2 + q s^2 + m c s)^2
// with p = g11, q = g22, m = g12 + g21 is (pi/4)(3p^2 + 3q^2 + m^2 + 2pq).
inline double near_diagonal_correction(const Mat2& grad, double delta, double s) {
    if (!(delta > 0.0)) throw std::invalid_argument("near_diagonal_correction: delta must be positive");
    if (s >= 1.0) throw std::invalid_argument("near_diagonal_correction: nonintegrable for s >= 1");
    const double p = grad[0], q = grad[3], m = grad[1] + grad[2];
    const double angular = 0.25 * pi * (3.0 * p * p + 3.0 * q * q + m * m + 2.0 * p * q);
    return std::pow(delta, 2.0 - 2.0 * s) / (2.0 - 2.0 * s) * angular;
}

// companion for the scalar (unprojected) kernel: int |G z|^2 / |z|^{2+2s} dz
// over |z| < delta; angular integral of |G w|^2 is pi ||G||_F^2.
inline double near_diagonal_correction_full(const Mat2& grad, double delta, double s) {
    if (!(delta > 0.0)) throw std::invalid_argument("near_diagonal_correction: delta must be positive");
    if (s >= 1.0) throw std::invalid_argument("near_diagonal_correction: nonintegrable for s >= 1");
    double fro2 = 0.0;
    for (double g : grad) fro2 += g * g;
    return std::pow(delta, 2.0 - 2.0 * s) / (2.0 - 2.0 * s) * pi * fro2;
}

// Offset-indexed quadrature weights for the translation-invariant kernel
// |z|^{-(2+2s)} zhat (x) zhat on the periodic grid. Entry zeta holds
//   W(zeta) = h^2 sum_{images m} z zT |z|^{-4-2s},  z = zeta h + m,  lo < |z| <= hi,
// optionally with the lattice-renormalization weights added at the offsets
// adjacent to the puncture (cancels the leading h^{2-2s} midpoint defect; the
// arrangement keeps every per-offset block PSD so projected <= scalar survives
// pointwise), and the analytic far-field mass kappa = (pi/s) hi^{-2s} recorded
// for windows meant to extend to infinity. The scalar-kernel table is the
// exact trace t11 + t22.
struct KernelTables {
    int n = 0;
    double s = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool compensated = false;
    double tail_kappa = 0.0; // (pi/s) hi^{-2s} when the window extends to infinity
    std::vector<double> t11, t12, t22;
    double s11 = 0.0, s12 = 0.0, s22 = 0.0; // totals over all offsets

    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * n + j;
    }
    double trace_at(std::size_t k) const { return t11[k] + t22[k]; }
    double trace_sum() const { return s11 + s22; }
};

inline KernelTables build_kernel_tables(int n, double s, double lo, double hi,
                                        bool compensate, bool add_tail) {
    if (n < 4) throw std::invalid_argument("kernel tables: n must be at least 4");
    if (s <= 0.0 || s >= 1.0) throw std::invalid_argument("kernel tables: s must be in (0,1)");
    if (!(hi > lo) || lo < 0.0) throw std::invalid_argument("kernel tables: need 0 <= lo < hi");
    const double h = 1.0 / n;
    if (compensate && lo > 0.0)
        throw std::invalid_argument("kernel tables: compensation applies only to windows at the puncture");
    if (compensate && hi < 1.5 * h)
        throw std::invalid_argument("kernel tables: window too narrow for the compensated offsets");

    KernelTables T;
    T.n = n;
    T.s = s;
    T.lo = lo;
    T.hi = hi;
    T.compensated = compensate;
    T.tail_kappa = add_tail ? (pi / s) * std::pow(hi, -2.0 * s) : 0.0;
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    T.t11.assign(nn, 0.0);
    T.t12.assign(nn, 0.0);
    T.t22.assign(nn, 0.0);

    // one period wider than the mask so the masked point set is the radially
    // truncated punctured lattice exactly (symmetric under z -> -z)
    const int mrange = static_cast<int>(std::ceil(hi)) + 1;
    const double lo2 = lo * lo, hi2 = hi * hi;
    const double expo = -0.5 * (4.0 + 2.0 * s);
    const double cell = h * h;

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            const int i = static_cast<int>(r);
            for (int j = 0; j < n; ++j) {
                double a11 = 0.0, a12 = 0.0, a22 = 0.0;
                for (int m1 = -mrange; m1 <= mrange; ++m1) {
                    const double x1 = i * h + m1;
                    for (int m2 = -mrange; m2 <= mrange; ++m2) {
                        const double x2 = j * h + m2;
                        const double r2 = x1 * x1 + x2 * x2;
                        if (r2 <= lo2 || r2 > hi2 || r2 == 0.0) continue;
                        const double w = std::pow(r2, expo) * cell;
                        a11 += x1 * x1 * w;
                        a12 += x1 * x2 * w;
                        a22 += x2 * x2 * w;
                    }
                }
                const std::size_t k = T.idx(i, j);
                T.t11[k] = a11;
                T.t12[k] = a12;
                T.t22[k] = a22;
            }
        }
    });

    if (compensate) {
        const ZetaConstants z = zeta_constants(s);
        const double f = std::pow(h, -2.0 * s);
        const double t = -f * z.z2 / 4.0;            // diagonal offsets, PSD block t [[1,sg],[sg,1]]
        const double ax = -f * (z.z1 - z.z2) / 2.0;  // axis offsets, rank-1 remainder
        for (int s1 : {1, -1})
            for (int s2 : {1, -1}) {
                const std::size_t k = T.idx((s1 + n) % n, (s2 + n) % n);
                T.t11[k] += t;
                T.t22[k] += t;
                T.t12[k] += t * (s1 * s2 > 0 ? 1.0 : -1.0);
            }
        for (int sg : {1, -1}) {
            T.t11[T.idx((sg + n) % n, 0)] += ax;
            T.t22[T.idx(0, (sg + n) % n)] += ax;
        }
    }

    for (std::size_t k = 0; k < nn; ++k) {
        T.s11 += T.t11[k];
        T.s12 += T.t12[k];
        T.s22 += T.t22[k];
    }
    return T;
}

// How far the periodic image sum reaches for an infinite-horizon kernel before
// handing over to the analytic tail.
struct TailPolicy {
    int r_max = 4;
    bool report_tail = false;

    double cut_radius() const { return r_max + 0.5; }
};

inline KernelTables tables_for(const KernelSpec& spec, int n, const TailPolicy& policy = {}) {
    if (policy.r_max < 1) throw std::invalid_argument("TailPolicy: r_max must be >= 1");
    if (spec.is_infinite())
        return build_kernel_tables(n, spec.s, 0.0, policy.cut_radius(), true, true);
    return build_kernel_tables(n, spec.s, 0.0, spec.horizon, true, false);
}

} // namespace nlperi
