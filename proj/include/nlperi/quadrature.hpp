#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace nlperi {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_m.
inline void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
    x.assign(m, 0.0);
    w.assign(m, 0.0);
    constexpr double pi = 3.141592653589793238462643383279;
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (m + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < m; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
            }
            pp = m * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = w[m - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}

// fixed-degree Gauss panel on [a,b]
inline double gauss_panel(const std::function<double(double)>& f, double a, double b, int m = 24) {
    std::vector<double> x, w;
    gauss_legendre(m, x, w);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += w[i] * f(c + h * x[i]);
    return s * h;
}

// tanh-sinh quadrature on (a,b): robust to integrable endpoint singularities.
// Levels double the node density until successive estimates differ by less
// than tol (or max_level is hit).
inline double tanh_sinh(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int max_level = 12) {
    constexpr double pi_half = 1.5707963267948966192313216916398;
    const double hw = 0.5 * (b - a);
    auto eval = [&](double t) -> double {
        const double u = pi_half * std::sinh(t);
        const double dj = pi_half * std::cosh(t) / (std::cosh(u) * std::cosh(u));
        if (dj < 1e-300) return 0.0;
        // abscissa via the distance to the nearer endpoint: 1 +- tanh(u) =
        // e^{+-u} / cosh(u), which avoids the cancellation in c + hw*tanh(u)
        // that would otherwise round nodes onto the endpoint and drop the
        // singular tail.
        const double xx = u < 0.0 ? a + hw * (std::exp(u) / std::cosh(u))
                                  : b - hw * (std::exp(-u) / std::cosh(u));
        if (xx <= a || xx >= b) return 0.0;
        const double fx = f(xx);
        return std::isfinite(fx) ? fx * dj : 0.0;
    };
    // Strong endpoint singularities (x - a)^{-beta} decay only like
    // e^{-2(1-beta)|u|} in the transformed variable, so truncate generously;
    // past t ~ 6.1 the Jacobian underflows and eval returns 0 anyway.
    const double t_max = 6.0;
    double h = 0.5;
    double prev = 0.0;
    for (int level = 1; level <= max_level; ++level, h *= 0.5) {
        double acc = eval(0.0);
        for (double t = h; t <= t_max; t += h) acc += eval(t) + eval(-t);
        const double est = hw * h * acc;
        if (level >= 4 && std::fabs(est - prev) <= tol * std::max(1.0, std::fabs(est)))
            return est;
        prev = est;
    }
    return prev;
}

// adaptive refinement: doubles Gauss panel count until |I_2m - I_m| < tol
inline double refine_until(const std::function<double(int)>& estimate_with, double tol,
                           int start = 8, int max_n = 1 << 14) {
    double prev = estimate_with(start);
    for (int m = start * 2; m <= max_n; m *= 2) {
        const double cur = estimate_with(m);
        if (std::fabs(cur - prev) < tol * std::max(1.0, std::fabs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

} // namespace nlperi
