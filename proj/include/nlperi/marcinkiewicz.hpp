#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "constants.hpp"
#include "fft.hpp"
#include "grid.hpp"
#include "kernels.hpp"
#include "operator.hpp"

namespace nlperi {

namespace detail {

struct SeminormTables {
    KernelTables T;
    std::vector<cplx> f11, f12, f22; // DFTs of the weight tables
};

inline std::shared_ptr<const SeminormTables> seminorm_tables(int n, double s,
                                                             const TailPolicy& policy) {
    static std::map<std::tuple<int, long long, int>, std::shared_ptr<const SeminormTables>> cache;
    static std::mutex mtx;
    const auto key = std::make_tuple(n, static_cast<long long>(s * 1e12), policy.r_max);
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto st = std::make_shared<SeminormTables>();
    st->T = build_kernel_tables(n, s, 0.0, policy.cut_radius(), true, true);
    symmetrize_tables(st->T);
    const std::size_t nn = st->T.t11.size();
    st->f11.assign(nn, cplx(0.0));
    st->f12.assign(nn, cplx(0.0));
    st->f22.assign(nn, cplx(0.0));
    for (std::size_t k = 0; k < nn; ++k) {
        st->f11[k] = st->T.t11[k];
        st->f12[k] = st->T.t12[k];
        st->f22[k] = st->T.t22[k];
    }
    fft2(st->f11, n, -1);
    fft2(st->f12, n, -1);
    fft2(st->f22, n, -1);
    std::lock_guard<std::mutex> lock(mtx);
    cache[key] = st;
    return st;
}

// pointwise quadratic form sum_z (delta v)^T W(z) (delta v) for the table W given
// by its DFT entries (w11, w12, w22), regrouped through circular convolutions:
//   S_ij v_i v_j - 2 v_i (T_ij * v_j) + T_ij * (v_i v_j),
// plus kappa_scale * kappa * (|v|^2 + mean|v|^2) for the far field (v mean-zero).
// Negative rounding residue is clamped at zero.
inline std::vector<double> quadratic_offset_form(const GridVectorField& v,
                                                 const SeminormTables& st, double s11, double s12,
                                                 double s22, const std::vector<cplx>& w11,
                                                 const std::vector<cplx>& w12,
                                                 const std::vector<cplx>& w22,
                                                 double kappa_scale) {
    const int n = v.n;
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    std::vector<cplx> v1(nn), v2(nn), p(nn);
    for (std::size_t k = 0; k < nn; ++k) {
        v1[k] = v.v[2 * k];
        v2[k] = v.v[2 * k + 1];
    }
    fft2(v1, n, -1);
    fft2(v2, n, -1);
    std::vector<cplx> tv1(nn), tv2(nn);
    for (std::size_t k = 0; k < nn; ++k) {
        tv1[k] = w11[k] * v1[k] + w12[k] * v2[k];
        tv2[k] = w12[k] * v1[k] + w22[k] * v2[k];
    }
    fft2(tv1, n, 1);
    fft2(tv2, n, 1);
    // T_ij * (v_i v_j): three product fields, combined in frequency space
    std::vector<cplx> p11(nn), p12(nn), p22(nn);
    for (std::size_t k = 0; k < nn; ++k) {
        const double a = v.v[2 * k], b = v.v[2 * k + 1];
        p11[k] = a * a;
        p12[k] = a * b;
        p22[k] = b * b;
    }
    fft2(p11, n, -1);
    fft2(p12, n, -1);
    fft2(p22, n, -1);
    for (std::size_t k = 0; k < nn; ++k)
        p[k] = w11[k] * p11[k] + 2.0 * w12[k] * p12[k] + w22[k] * p22[k];
    fft2(p, n, 1);

    const double inv = 1.0 / double(nn);
    double msq = 0.0;
    for (std::size_t k = 0; k < nn; ++k)
        msq += v.v[2 * k] * v.v[2 * k] + v.v[2 * k + 1] * v.v[2 * k + 1];
    msq *= inv;
    const double kappa = kappa_scale * st.T.tail_kappa;
    std::vector<double> out(nn, 0.0);
    for (std::size_t k = 0; k < nn; ++k) {
        const double a = v.v[2 * k], b = v.v[2 * k + 1];
        const double vv = a * a + b * b;
        double q = s11 * a * a + 2.0 * s12 * a * b + s22 * b * b -
                   2.0 * (a * tv1[k].real() * inv + b * tv2[k].real() * inv) +
                   p[k].real() * inv;
        q += kappa * (vv + msq);
        out[k] = q > 0.0 ? q : 0.0;
    }
    return out;
}

// h^2 sum over images of |z|^{-kernel_exp} per offset, punctured, |z| <= hi
inline std::vector<double> scalar_offset_table(int n, double kernel_exp, double hi) {
    const double h = 1.0 / n;
    const int mrange = static_cast<int>(std::ceil(hi)) + 1;
    const double hi2 = hi * hi, cell = h * h, expo = -0.5 * kernel_exp;
    std::vector<double> t(static_cast<std::size_t>(n) * n, 0.0);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            const int i = static_cast<int>(r);
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int m1 = -mrange; m1 <= mrange; ++m1) {
                    const double x1 = i * h + m1;
                    for (int m2 = -mrange; m2 <= mrange; ++m2) {
                        const double x2 = j * h + m2;
                        const double r2 = x1 * x1 + x2 * x2;
                        if (r2 == 0.0 || r2 > hi2) continue;
                        acc += std::pow(r2, expo) * cell;
                    }
                }
                t[r * n + j] = acc;
            }
        }
    });
    return t;
}

} // namespace detail

// Pointwise projected Marcinkiewicz function:
// D^s(u)(x)^2 = sum over quadrature images of |(u(x)-u(y)) . zhat|^2 /|x-y|^{2+2s} h^2
// with the singular-offset renormalization inside the tables and the analytic
// far-field completion. Constant shifts are removed first (the differences are
// shift-invariant), so constants map to exactly zero.
inline ScalarGridField d_s(const GridVectorField& u, double s, const TailPolicy& tail = {}) {
    auto st = detail::seminorm_tables(u.n, s, tail);
    GridVectorField v = u;
    v.subtract_mean();
    auto q = detail::quadratic_offset_form(v, *st, st->T.s11, st->T.s12, st->T.s22, st->f11,
                                           st->f12, st->f22, 0.5);
    ScalarGridField out(u.n);
    for (std::size_t k = 0; k < q.size(); ++k) out.v[k] = std::sqrt(q[k]);
    return out;
}

// Unprojected companion Upsilon^s >= D^s. The gap Upsilon^2 - D^2 is itself a
// PSD offset form (table tr(W) I - W), so Upsilon^2 is assembled as D^2 plus a
// clamped nonnegative field and the pointwise domination is exact, not just
// within rounding.
inline ScalarGridField upsilon_s(const GridVectorField& u, double s, const TailPolicy& tail = {}) {
    auto st = detail::seminorm_tables(u.n, s, tail);
    GridVectorField v = u;
    v.subtract_mean();
    auto d2 = detail::quadratic_offset_form(v, *st, st->T.s11, st->T.s12, st->T.s22, st->f11,
                                            st->f12, st->f22, 0.5);
    // complement form: swap diagonal entries, negate the off-diagonal
    std::vector<cplx> g12(st->f12.size());
    for (std::size_t k = 0; k < g12.size(); ++k) g12[k] = -st->f12[k];
    auto gap = detail::quadratic_offset_form(v, *st, st->T.s22, -st->T.s12, st->T.s11, st->f22,
                                             g12, st->f11, 0.5);
    ScalarGridField out(u.n);
    for (std::size_t k = 0; k < d2.size(); ++k) out.v[k] = std::sqrt(d2[k] + gap[k]);
    return out;
}

// [u]_{W^{s,q}}: ( mean_x sum_images |u(x)-u(y)|^q / |x-y|^{2+sq} h^2 + corrections )^{1/q}.
// q = 2 is the exact regrouping of mean(Upsilon^2); general q runs the literal
// uncompensated punctured sum (reported estimate; no renormalization theory).
inline double sobolev_seminorm(const GridVectorField& u, double s, double q,
                               const TailPolicy& tail = {}) {
    if (!(q > 1.0)) throw std::invalid_argument("sobolev_seminorm: q must exceed 1");
    if (q == 2.0) return lp_norm(upsilon_s(u, s, tail), 2.0);
    const int n = u.n;
    const auto tq = detail::scalar_offset_table(n, 2.0 + s * q, tail.cut_radius());
    std::vector<double> rows(static_cast<std::size_t>(n), 0.0);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            const int i = static_cast<int>(r);
            double acc = 0.0;
            for (int j = 0; j < n; ++j)
                for (int oi = 0; oi < n; ++oi)
                    for (int oj = 0; oj < n; ++oj) {
                        const double w = tq[static_cast<std::size_t>(oi) * n + oj];
                        if (w == 0.0) continue;
                        const int yi = i + oi >= n ? i + oi - n : i + oi;
                        const int yj = j + oj >= n ? j + oj - n : j + oj;
                        const double d1 = u.at(i, j, 0) - u.at(yi, yj, 0);
                        const double d2 = u.at(i, j, 1) - u.at(yi, yj, 1);
                        acc += w * std::pow(d1 * d1 + d2 * d2, 0.5 * q);
                    }
            rows[r] = acc;
        }
    });
    double total = 0.0;
    for (double x : rows) total += x;
    return std::pow(total / (double(n) * n), 1.0 / q);
}

// [u]_{X^s_q}: projected differences |(u(x)-u(y)) . zhat|^q. q = 2 regroups to
// the l2 norm of d_s; general q enumerates images (zhat differs image to image).
inline double x_seminorm(const GridVectorField& u, double s, double q,
                         const TailPolicy& tail = {}) {
    if (!(q > 1.0)) throw std::invalid_argument("x_seminorm: q must exceed 1");
    if (q == 2.0) return lp_norm(d_s(u, s, tail), 2.0);
    const int n = u.n;
    const double h = 1.0 / n;
    const double hi = tail.cut_radius(), hi2 = hi * hi;
    const int mrange = static_cast<int>(std::ceil(hi)) + 1;
    struct Image {
        int oi, oj;
        double w, zh1, zh2;
    };
    std::vector<Image> images;
    for (int oi = 0; oi < n; ++oi)
        for (int oj = 0; oj < n; ++oj)
            for (int m1 = -mrange; m1 <= mrange; ++m1)
                for (int m2 = -mrange; m2 <= mrange; ++m2) {
                    const double z1 = oi * h + m1, z2 = oj * h + m2;
                    const double r2 = z1 * z1 + z2 * z2;
                    if (r2 == 0.0 || r2 > hi2) continue;
                    const double rr = std::sqrt(r2);
                    images.push_back({oi, oj, std::pow(rr, -2.0 - s * q) * h * h, z1 / rr, z2 / rr});
                }
    std::vector<double> rows(static_cast<std::size_t>(n), 0.0);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            const int i = static_cast<int>(r);
            double acc = 0.0;
            for (int j = 0; j < n; ++j)
                for (const auto& im : images) {
                    const int yi = i + im.oi >= n ? i + im.oi - n : i + im.oi;
                    const int yj = j + im.oj >= n ? j + im.oj - n : j + im.oj;
                    const double proj = (u.at(i, j, 0) - u.at(yi, yj, 0)) * im.zh1 +
                                        (u.at(i, j, 1) - u.at(yi, yj, 1)) * im.zh2;
                    acc += im.w * std::pow(std::fabs(proj), q);
                }
            rows[r] = acc;
        }
    });
    double total = 0.0;
    for (double x : rows) total += x;
    return std::pow(total / (double(n) * n), 1.0 / q);
}

// sharp q = 2 Korn constant: both seminorms are Fourier quadratic forms,
// [u]_W^2 = 2c sum |2 pi xi|^{2s} |uhat|^2 and
// [u]_X^2 = 2 sum |2 pi xi|^{2s} (a |uhat|^2 + b |xihat . uhat|^2),
// so the worst ratio is c/a, attained by transverse fields.
inline double korn_constant_q2(double s, int d = 2) {
    const MultiplierConstants mc = cached_multiplier_constants(d, s);
    return mc.c / mc.a;
}

// crude far-field remainder bound: (2 sup|u|)^q int_{|z| > R} |z|^{-2-sq} dz
inline double seminorm_tail_estimate(const GridVectorField& u, double s, double q,
                                     const TailPolicy& tail = {}) {
    double sup = 0.0;
    const std::size_t nn = static_cast<std::size_t>(u.n) * u.n;
    for (std::size_t k = 0; k < nn; ++k) {
        const double m = std::sqrt(u.v[2 * k] * u.v[2 * k] + u.v[2 * k + 1] * u.v[2 * k + 1]);
        sup = std::max(sup, m);
    }
    const double R = tail.cut_radius();
    return std::pow(2.0 * sup, q) * 2.0 * pi * std::pow(R, -s * q) / (s * q);
}

} // namespace nlperi
