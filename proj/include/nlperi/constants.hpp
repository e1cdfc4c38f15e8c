#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "parallel.hpp"
#include "quadrature.hpp"

namespace nlperi {

inline constexpr double pi = 3.141592653589793238462643383279;

// |S^d| = 2 pi^{(d+1)/2} / Gamma((d+1)/2)
inline double sphere_measure(int d) {
    if (d < 0) throw std::invalid_argument("sphere_measure: d must be >= 0");
    return 2.0 * std::pow(pi, 0.5 * (d + 1)) / std::tgamma(0.5 * (d + 1));
}

// C(s) = -Gamma(-2s) cos(pi s), via reflection: pi / (2 sin(pi s) Gamma(1+2s))
inline double radial_constant_closed_form(double s) {
    if (s <= 0.0 || s >= 1.0) throw std::invalid_argument("radial constant: s must be in (0,1)");
    return pi / (2.0 * std::sin(pi * s) * std::tgamma(1.0 + 2.0 * s));
}

namespace detail {

// int_T^inf cos(t) t^{-a} dt by repeated integration by parts (T large)
inline double cosine_tail(double T, double a) {
    double sgn = 1.0, coef = 1.0, sum = 0.0, aa = a;
    const double sT = std::sin(T), cT = std::cos(T);
    for (int k = 0; k < 4; ++k) {
        // I(a) = -sin T * T^-a + a cos T * T^-(a+1) - a(a+1) I(a+2)
        sum += sgn * coef * (-sT * std::pow(T, -aa) + aa * cT * std::pow(T, -aa - 1.0));
        coef *= aa * (aa + 1.0);
        aa += 2.0;
        sgn = -sgn;
    }
    return sum;
}

} // namespace detail

// C(s) = int_0^inf (1 - cos t) t^{-1-2s} dt, evaluated by quadrature:
// tanh-sinh on the singular head [0, 2pi], Gauss panels per period up to T,
// analytic power tail plus IBP series for the oscillatory tail remainder.
inline double radial_constant_quadrature(double s, double tol = 1e-10) {
    if (s <= 0.0 || s >= 1.0) throw std::invalid_argument("radial constant: s must be in (0,1)");
    const double a = 1.0 + 2.0 * s;
    // 1 - cos t written as 2 sin^2(t/2): exact near t = 0, where the direct
    // difference would cancel against the t^{-1-2s} weight
    auto integrand = [&](double t) {
        const double sn = std::sin(0.5 * t);
        return 2.0 * sn * sn * std::pow(t, -a);
    };
    const double head = tanh_sinh(integrand, 0.0, 2.0 * pi, 1e-13);

    auto with_periods = [&](int n_periods) {
        double mid = 0.0;
        for (int k = 1; k <= n_periods; ++k)
            mid += gauss_panel(integrand, 2.0 * pi * k, 2.0 * pi * (k + 1), 24);
        const double T = 2.0 * pi * (n_periods + 1);
        const double power_tail = std::pow(T, -2.0 * s) / (2.0 * s);
        return mid + power_tail - detail::cosine_tail(T, a);
    };
    const double rest = refine_until([&](int m) { return with_periods(m); }, tol, 16, 1 << 12);
    return head + rest;
}

struct MultiplierConstants {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

namespace detail {

// int_0^pi |cos t|^{2q} sin^{d-2} t dt, split at the |cos| kink
inline double angular_moment(int d, double q) {
    auto f = [&](double t) {
        const double c = std::fabs(std::cos(t));
        const double s = std::sin(t);
        double v = std::pow(c, 2.0 * q);
        if (d > 2) v *= std::pow(s, double(d - 2));
        return v;
    };
    return tanh_sinh(f, 0.0, 0.5 * pi, 1e-13) + tanh_sinh(f, 0.5 * pi, pi, 1e-13);
}

} // namespace detail

// Angular decomposition of the operator symbol: m(xi) = |2 pi xi|^{2s} (a I + b P),
// with P the projection onto xi. The moments over S^{d-1} reduce to the polar
// angle against the first axis; c is the scalar-kernel constant and d*a + b = c.
inline MultiplierConstants multiplier_constants(int d, double s) {
    if (d < 2) throw std::invalid_argument("multiplier_constants: d must be >= 2");
    if (s <= 0.0 || s >= 1.0) throw std::invalid_argument("multiplier_constants: s must be in (0,1)");
    const double cs = radial_constant_quadrature(s);
    const double sigma = sphere_measure(d - 2); // |S^{d-2}|
    const double i0 = sigma * detail::angular_moment(d, s);         // int |w1|^{2s}
    const double i2 = sigma * detail::angular_moment(d, s + 1.0);   // int |w1|^{2s+2}
    MultiplierConstants mc;
    mc.c = cs * i0;
    const double ab = cs * i2;          // a + b
    mc.a = cs * (i0 - i2) / (d - 1.0);  // transverse moment shared by d-1 directions
    mc.b = ab - mc.a;
    return mc;
}

struct ZetaConstants {
    double z1 = 0.0; // Z_1111
    double z2 = 0.0; // Z_1122
};

namespace detail {

inline double smoothstep_cut(double y) {
    if (y <= 0.0) return 1.0;
    if (y >= 1.0) return 0.0;
    return 1.0 - y * y * y * (10.0 + y * (-15.0 + 6.0 * y));
}

} // namespace detail

// Renormalized lattice zeta: Z_ijpq = sum'_{k in Z^2} k_i k_j k_p k_q |k|^{-4-2s}
//   - int_{R^2} (same integrand) dz,
// both regularized by the same smooth radial cutoff (Poisson summation makes the
// difference of the two cut sums converge superalgebraically in K). Cubic
// symmetry leaves two independent components, z1 = Z_1111 and z2 = Z_1122.
inline ZetaConstants zeta_constants(double s, int K = 600) {
    if (s <= 0.0 || s >= 1.0) throw std::invalid_argument("zeta_constants: s must be in (0,1)");
    static std::map<std::pair<double, int>, ZetaConstants> cache;
    static std::mutex cache_mutex;
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        auto it = cache.find({s, K});
        if (it != cache.end()) return it->second;
    }

    const double half = 0.5 * K;
    const double expo = -4.0 - 2.0 * s;

    // lattice part, deterministic row-wise reduction over k1
    const auto rows = static_cast<std::size_t>(2 * K + 1);
    std::vector<double> r1(rows, 0.0), r2(rows, 0.0);
    parallel_for(rows, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            const int k1 = static_cast<int>(r) - K;
            double s1 = 0.0, s2 = 0.0;
            for (int k2 = -K; k2 <= K; ++k2) {
                if (k1 == 0 && k2 == 0) continue;
                const double rr = std::sqrt(double(k1) * k1 + double(k2) * k2);
                if (rr > K) continue;
                const double chi = detail::smoothstep_cut((rr - half) / half);
                if (chi == 0.0) continue;
                const double w = std::pow(rr, expo) * chi;
                const double a2 = double(k1) * k1, b2 = double(k2) * k2;
                s1 += a2 * a2 * w;
                s2 += a2 * b2 * w;
            }
            r1[r] = s1;
            r2[r] = s2;
        }
    });
    double lat1 = 0.0, lat2 = 0.0;
    for (std::size_t r = 0; r < rows; ++r) { lat1 += r1[r]; lat2 += r2[r]; }

    // continuum part: angular moment times radial integral of r^{1-2s} chi
    const double radial_inner = std::pow(half, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    std::vector<double> gx, gw;
    gauss_legendre(200, gx, gw);
    double radial_outer = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double r = half + 0.5 * half * (gx[i] + 1.0);
        radial_outer += gw[i] * std::pow(r, 1.0 - 2.0 * s) *
                        detail::smoothstep_cut((r - half) / half);
    }
    radial_outer *= 0.5 * half;
    const double radial = radial_inner + radial_outer;
    const double int1 = (2.0 * pi * 3.0 / 8.0) * radial; // avg of cos^4
    const double int2 = (2.0 * pi / 8.0) * radial;       // avg of cos^2 sin^2

    ZetaConstants z{lat1 - int1, lat2 - int2};
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        cache[{s, K}] = z;
    }
    return z;
}

} // namespace nlperi
