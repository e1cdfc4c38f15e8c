#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "constants.hpp"
#include "fft.hpp"
#include "grid.hpp"
#include "kernels.hpp"
#include "spectral.hpp"

namespace nlperi {

inline MultiplierConstants cached_multiplier_constants(int d, double s) {
    static std::map<std::pair<int, double>, MultiplierConstants> cache;
    static std::mutex mtx;
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find({d, s});
        if (it != cache.end()) return it->second;
    }
    const MultiplierConstants mc = multiplier_constants(d, s);
    std::lock_guard<std::mutex> lock(mtx);
    cache[{d, s}] = mc;
    return mc;
}

namespace detail {

struct ActiveOffset {
    int oi, oj;
    double w11, w12, w22;
};

// enforce W(zeta) = W(-zeta) exactly (the base sum satisfies it up to the
// accumulation order of the image loop)
inline void symmetrize_tables(KernelTables& T) {
    const int n = T.n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int i2 = (n - i) % n, j2 = (n - j) % n;
            if (i2 * n + j2 <= i * n + j) continue;
            const std::size_t k = T.idx(i, j), k2 = T.idx(i2, j2);
            T.t11[k] = T.t11[k2] = 0.5 * (T.t11[k] + T.t11[k2]);
            T.t12[k] = T.t12[k2] = 0.5 * (T.t12[k] + T.t12[k2]);
            T.t22[k] = T.t22[k2] = 0.5 * (T.t22[k] + T.t22[k2]);
        }
}

} // namespace detail

// Cached state for repeated applications of L_h with a fixed coefficient:
// kernel weight tables, their DFTs (convolution path), and the sampled a(x).
class OperatorContext {
  public:
    OperatorContext(const KernelSpec& spec, const CoefficientField& A, int n,
                    const TailPolicy& policy = {})
        : OperatorContext(spec, A, tables_for(spec, n, policy), policy) {}

    // context over explicitly supplied weight tables (horizon-split windows)
    OperatorContext(const KernelSpec& spec, const CoefficientField& A, KernelTables tables,
                    const TailPolicy& policy = {})
        : spec_(spec), policy_(policy), n_(tables.n), T_(std::move(tables)), a_(A.sample(n_)) {
        detail::symmetrize_tables(T_);
        // re-total after symmetrization
        T_.s11 = T_.s12 = T_.s22 = 0.0;
        for (std::size_t k = 0; k < T_.t11.size(); ++k) {
            T_.s11 += T_.t11[k];
            T_.s12 += T_.t12[k];
            T_.s22 += T_.t22[k];
        }
        const std::size_t nn = T_.t11.size();
        for (std::size_t k = 0; k < nn; ++k) {
            if (T_.t11[k] != 0.0 || T_.t12[k] != 0.0 || T_.t22[k] != 0.0) {
                const int i = static_cast<int>(k) / n_, j = static_cast<int>(k) % n_;
                active_.push_back({i, j, T_.t11[k], T_.t12[k], T_.t22[k]});
            }
        }
        f11_.assign(nn, cplx(0.0));
        f12_.assign(nn, cplx(0.0));
        f22_.assign(nn, cplx(0.0));
        for (std::size_t k = 0; k < nn; ++k) {
            f11_[k] = T_.t11[k];
            f12_[k] = T_.t12[k];
            f22_[k] = T_.t22[k];
        }
        fft2(f11_, n_, -1);
        fft2(f12_, n_, -1);
        fft2(f22_, n_, -1);
        a_mean_ = a_.mean()[0];
    }

    const KernelTables& tables() const { return T_; }
    const ScalarGridField& coefficient_grid() const { return a_; }
    const KernelSpec& spec() const { return spec_; }
    int n() const { return n_; }

    // (L u)(x) = c_h sum_zeta A(x, x+zeta) W(zeta) (u(x) - u(x+zeta)) + c_h tail(x),
    // evaluated by the literal sum over active offsets
    GridVectorField apply_direct(const GridVectorField& u) const {
        require_grid(u);
        GridVectorField out(n_);
        const double c = spec_.c_h;
        parallel_for(static_cast<std::size_t>(n_), [&](std::size_t r0, std::size_t r1) {
            for (std::size_t r = r0; r < r1; ++r) {
                const int i = static_cast<int>(r);
                for (int j = 0; j < n_; ++j) {
                    const double ax = a_.at(i, j, 0);
                    const double u1 = u.at(i, j, 0), u2 = u.at(i, j, 1);
                    double o1 = 0.0, o2 = 0.0;
                    for (const auto& w : active_) {
                        const int yi = i + w.oi >= n_ ? i + w.oi - n_ : i + w.oi;
                        const int yj = j + w.oj >= n_ ? j + w.oj - n_ : j + w.oj;
                        const double am = 0.5 * (ax + a_.at(yi, yj, 0));
                        const double d1 = u1 - u.at(yi, yj, 0);
                        const double d2 = u2 - u.at(yi, yj, 1);
                        o1 += am * (w.w11 * d1 + w.w12 * d2);
                        o2 += am * (w.w12 * d1 + w.w22 * d2);
                    }
                    out.at(i, j, 0) = c * o1;
                    out.at(i, j, 1) = c * o2;
                }
            }
        });
        add_tail(u, out);
        return out;
    }

    // same operator, with the offset sum regrouped into circular convolutions:
    // sum_z (a(x)+a(x+z))/2 W(z)(u(x)-u(x+z))
    //   = 1/2 [ a (S u - T*u) + (T*a) u - T*(a u) ]
    GridVectorField apply(const GridVectorField& u) const {
        require_grid(u);
        const std::size_t nn = static_cast<std::size_t>(n_) * n_;
        std::vector<cplx> u1(nn), u2(nn), au1(nn), au2(nn);
        for (std::size_t k = 0; k < nn; ++k) {
            const double av = a_.v[k];
            u1[k] = u.v[2 * k];
            u2[k] = u.v[2 * k + 1];
            au1[k] = av * u.v[2 * k];
            au2[k] = av * u.v[2 * k + 1];
        }
        fft2(u1, n_, -1);
        fft2(u2, n_, -1);
        fft2(au1, n_, -1);
        fft2(au2, n_, -1);
        std::vector<cplx> tu1(nn), tu2(nn), tau1(nn), tau2(nn);
        for (std::size_t k = 0; k < nn; ++k) {
            tu1[k] = f11_[k] * u1[k] + f12_[k] * u2[k];
            tu2[k] = f12_[k] * u1[k] + f22_[k] * u2[k];
            tau1[k] = f11_[k] * au1[k] + f12_[k] * au2[k];
            tau2[k] = f12_[k] * au1[k] + f22_[k] * au2[k];
        }
        fft2(tu1, n_, 1);
        fft2(tu2, n_, 1);
        fft2(tau1, n_, 1);
        fft2(tau2, n_, 1);
        GridVectorField out(n_);
        const double inv = 1.0 / double(nn);
        const double c = spec_.c_h;
        // (T*a)(x) entries via the same convolution once per context would need a
        // second pass; fold it here from cached ta_ (computed lazily below)
        ensure_ta();
        for (std::size_t k = 0; k < nn; ++k) {
            const double av = a_.v[k];
            const double su1 = T_.s11 * u.v[2 * k] + T_.s12 * u.v[2 * k + 1];
            const double su2 = T_.s12 * u.v[2 * k] + T_.s22 * u.v[2 * k + 1];
            const double conv_u1 = tu1[k].real() * inv, conv_u2 = tu2[k].real() * inv;
            const double conv_au1 = tau1[k].real() * inv, conv_au2 = tau2[k].real() * inv;
            const double ta_u1 = ta11_[k] * u.v[2 * k] + ta12_[k] * u.v[2 * k + 1];
            const double ta_u2 = ta12_[k] * u.v[2 * k] + ta22_[k] * u.v[2 * k + 1];
            out.v[2 * k] = c * 0.5 * (av * (su1 - conv_u1) + ta_u1 - conv_au1);
            out.v[2 * k + 1] = c * 0.5 * (av * (su2 - conv_u2) + ta_u2 - conv_au2);
        }
        add_tail(u, out);
        return out;
    }

    // quadrature of E_h(u,v) = 1/2 c_h mean_x sum_z A W(z) (delta u)^T (delta v)
    // plus the symmetric far-field form
    double bilinear(const GridVectorField& u, const GridVectorField& v) const {
        require_grid(u);
        require_grid(v);
        const double c = spec_.c_h;
        std::vector<double> row_sum(static_cast<std::size_t>(n_), 0.0);
        parallel_for(static_cast<std::size_t>(n_), [&](std::size_t r0, std::size_t r1) {
            for (std::size_t r = r0; r < r1; ++r) {
                const int i = static_cast<int>(r);
                double acc = 0.0;
                for (int j = 0; j < n_; ++j) {
                    const double ax = a_.at(i, j, 0);
                    for (const auto& w : active_) {
                        const int yi = i + w.oi >= n_ ? i + w.oi - n_ : i + w.oi;
                        const int yj = j + w.oj >= n_ ? j + w.oj - n_ : j + w.oj;
                        const double am = 0.5 * (ax + a_.at(yi, yj, 0));
                        const double du1 = u.at(i, j, 0) - u.at(yi, yj, 0);
                        const double du2 = u.at(i, j, 1) - u.at(yi, yj, 1);
                        const double dv1 = v.at(i, j, 0) - v.at(yi, yj, 0);
                        const double dv2 = v.at(i, j, 1) - v.at(yi, yj, 1);
                        acc += am * (w.w11 * du1 * dv1 + w.w12 * (du1 * dv2 + du2 * dv1) +
                                     w.w22 * du2 * dv2);
                    }
                }
                row_sum[r] = acc;
            }
        });
        double total = 0.0;
        for (double x : row_sum) total += x;
        const double nn = double(n_) * n_;
        return c * (0.5 * total / nn + tail_form(u, v));
    }

  private:
    void require_grid(const GridVectorField& u) const {
        if (u.n != n_) throw std::invalid_argument("operator: grid size mismatch");
    }

    // far-field (|z| > cut) completion of the kernel integral, with the angular
    // average zhat (x) zhat -> I/2 taken analytically:
    // tail(x) = kappa/4 [ a(x)u(x) - a(x) ubar + abar u(x) - mean(a u) ]
    void add_tail(const GridVectorField& u, GridVectorField& out) const {
        const double kappa = T_.tail_kappa;
        if (kappa == 0.0) return;
        const double c = spec_.c_h;
        const std::size_t nn = static_cast<std::size_t>(n_) * n_;
        double ub1 = 0.0, ub2 = 0.0, aub1 = 0.0, aub2 = 0.0;
        for (std::size_t k = 0; k < nn; ++k) {
            ub1 += u.v[2 * k];
            ub2 += u.v[2 * k + 1];
            aub1 += a_.v[k] * u.v[2 * k];
            aub2 += a_.v[k] * u.v[2 * k + 1];
        }
        ub1 /= double(nn);
        ub2 /= double(nn);
        aub1 /= double(nn);
        aub2 /= double(nn);
        for (std::size_t k = 0; k < nn; ++k) {
            const double av = a_.v[k];
            out.v[2 * k] += c * 0.25 * kappa *
                            (av * u.v[2 * k] - av * ub1 + a_mean_ * u.v[2 * k] - aub1);
            out.v[2 * k + 1] += c * 0.25 * kappa *
                               (av * u.v[2 * k + 1] - av * ub2 + a_mean_ * u.v[2 * k + 1] - aub2);
        }
    }

    double tail_form(const GridVectorField& u, const GridVectorField& v) const {
        const double kappa = T_.tail_kappa;
        if (kappa == 0.0) return 0.0;
        const std::size_t nn = static_cast<std::size_t>(n_) * n_;
        double auv = 0.0, av_u1 = 0.0, av_u2 = 0.0, au_v1 = 0.0, au_v2 = 0.0, uv = 0.0;
        double ub1 = 0.0, ub2 = 0.0, vb1 = 0.0, vb2 = 0.0;
        for (std::size_t k = 0; k < nn; ++k) {
            const double a = a_.v[k];
            const double x1 = u.v[2 * k], x2 = u.v[2 * k + 1];
            const double y1 = v.v[2 * k], y2 = v.v[2 * k + 1];
            auv += a * (x1 * y1 + x2 * y2);
            uv += x1 * y1 + x2 * y2;
            av_u1 += a * y1;
            av_u2 += a * y2;
            au_v1 += a * x1;
            au_v2 += a * x2;
            ub1 += x1;
            ub2 += x2;
            vb1 += y1;
            vb2 += y2;
        }
        const double N = double(nn);
        auv /= N; uv /= N; av_u1 /= N; av_u2 /= N; au_v1 /= N; au_v2 /= N;
        ub1 /= N; ub2 /= N; vb1 /= N; vb2 /= N;
        // mean_x <tail_op(u)(x), v(x)>
        return 0.25 * kappa *
               (auv - (av_u1 * ub1 + av_u2 * ub2) + a_mean_ * uv - (au_v1 * vb1 + au_v2 * vb2));
    }

    void ensure_ta() const {
        std::lock_guard<std::mutex> lock(ta_mutex_);
        if (!ta11_.empty()) return;
        const std::size_t nn = static_cast<std::size_t>(n_) * n_;
        std::vector<cplx> ah(nn);
        for (std::size_t k = 0; k < nn; ++k) ah[k] = a_.v[k];
        fft2(ah, n_, -1);
        std::vector<cplx> c11(nn), c12(nn), c22(nn);
        for (std::size_t k = 0; k < nn; ++k) {
            c11[k] = f11_[k] * ah[k];
            c12[k] = f12_[k] * ah[k];
            c22[k] = f22_[k] * ah[k];
        }
        fft2(c11, n_, 1);
        fft2(c12, n_, 1);
        fft2(c22, n_, 1);
        const double inv = 1.0 / double(nn);
        ta11_.resize(nn);
        ta12_.resize(nn);
        ta22_.resize(nn);
        for (std::size_t k = 0; k < nn; ++k) {
            ta11_[k] = c11[k].real() * inv;
            ta12_[k] = c12[k].real() * inv;
            ta22_[k] = c22[k].real() * inv;
        }
    }

    KernelSpec spec_;
    TailPolicy policy_;
    int n_ = 0;
    KernelTables T_;
    ScalarGridField a_;
    double a_mean_ = 0.0;
    std::vector<detail::ActiveOffset> active_;
    std::vector<cplx> f11_, f12_, f22_;
    mutable std::vector<double> ta11_, ta12_, ta22_;
    mutable std::mutex ta_mutex_;
};

inline GridVectorField apply_direct(const KernelSpec& spec, const CoefficientField& A,
                                    const GridVectorField& u, const TailPolicy& policy = {}) {
    return OperatorContext(spec, A, u.n, policy).apply_direct(u);
}

inline GridVectorField apply_fold(const KernelSpec& spec, const CoefficientField& A,
                                  const GridVectorField& u, const TailPolicy& policy = {}) {
    return OperatorContext(spec, A, u.n, policy).apply(u);
}

// constant-coefficient infinite-horizon operator as a Fourier multiplier:
// u-hat -> |2 pi xi|^{2s} (a I + b xihat (x) xihat) u-hat, zero on the mean
inline GridVectorField apply_spectral(double s, const GridVectorField& u) {
    const MultiplierConstants mc = cached_multiplier_constants(2, s);
    SpectralVectorField uh = forward_transform(u);
    apply_multiplier(uh, [&](int k1, int k2) -> std::array<cplx, 4> {
        if (k1 == 0 && k2 == 0) return {cplx(0.0), cplx(0.0), cplx(0.0), cplx(0.0)};
        const double r2 = double(k1) * k1 + double(k2) * k2;
        const double lam = std::pow(4.0 * pi * pi * r2, s);
        const double x1 = k1 / std::sqrt(r2), x2 = k2 / std::sqrt(r2);
        return {cplx(lam * (mc.a + mc.b * x1 * x1)), cplx(lam * mc.b * x1 * x2),
                cplx(lam * mc.b * x1 * x2), cplx(lam * (mc.a + mc.b * x2 * x2))};
    });
    return inverse_transform<2>(uh);
}

inline double bilinear_form(const KernelSpec& spec, const CoefficientField& A,
                            const GridVectorField& u, const GridVectorField& v,
                            const TailPolicy& policy = {}) {
    return OperatorContext(spec, A, u.n, policy).bilinear(u, v);
}

struct SplitParts {
    GridVectorField infinite_part;
    GridVectorField bounded_part;
};

// L_h u = c_h L u + P_h u: the infinite-horizon operator plus the bounded
// remainder carried by the kernel beyond the horizon (negated window (h, R]
// plus the far tail)
inline SplitParts split_horizon(const KernelSpec& spec, const CoefficientField& A,
                                const GridVectorField& u, const TailPolicy& policy = {}) {
    if (spec.is_infinite())
        throw std::invalid_argument("split_horizon: horizon must be finite");
    const KernelSpec inf_spec = KernelSpec::infinite(spec.s);
    OperatorContext full(inf_spec, A, u.n, policy);
    GridVectorField inf_part = full.apply(u);
    for (double& x : inf_part.v) x *= spec.c_h; // c_h * (L u), c_infinity = 1

    // remainder: the kernel window (h, R] plus the far tail, applied with
    // weight 1 and negated (L_h subtracts exactly this much from c_h L)
    KernelSpec unit = inf_spec; // c_h = 1
    OperatorContext outer(unit, A,
                          build_kernel_tables(u.n, spec.s, spec.horizon, policy.cut_radius(),
                                              false, true),
                          policy);
    GridVectorField bounded = outer.apply(u);
    for (double& x : bounded.v) x *= -spec.c_h;
    return {std::move(inf_part), std::move(bounded)};
}

// L^1 norm of the radial kernel beyond the horizon (Young's-inequality bound
// on P_h), by quadrature on [h, H] plus the analytic remainder
inline double young_norm_gamma(const KernelSpec& spec) {
    if (spec.is_infinite()) throw std::invalid_argument("young_norm_gamma: finite horizon required");
    const double s = spec.s;
    const double H = 64.0 * spec.horizon;
    auto f = [&](double r) { return 2.0 * pi * std::pow(r, -1.0 - 2.0 * s); };
    const double body = tanh_sinh(f, spec.horizon, H, 1e-12);
    const double rem = (pi / s) * std::pow(H, -2.0 * s);
    return spec.c_h * (body + rem);
}

struct LocalLimitRow {
    double h = 0.0;
    double deviation = 0.0; // Frobenius-relative distance to |2 pi xi|^2 (I + 2 P)
    double ratio = 0.0;     // longitudinal / transverse symbol entry
};

// Continuum finite-horizon symbol at the reference mode xi = (1,0):
// m_h(xi) = c_h int_{|z|<=h} (1 - cos(2 pi xi . z)) zhat zhatT |z|^{-2-2s} dz,
// compared against the Taylor limit |2 pi xi|^2 (I + 2 xihat xihatT).
inline std::vector<LocalLimitRow> local_limit_check(double s, const std::vector<double>& h_list) {
    std::vector<LocalLimitRow> rows;
    const int ntheta = 512;
    std::vector<double> c2(ntheta), s2(ntheta), cth(ntheta);
    for (int k = 0; k < ntheta; ++k) {
        const double th = 2.0 * pi * k / ntheta;
        cth[k] = std::cos(th);
        c2[k] = cth[k] * cth[k];
        s2[k] = 1.0 - c2[k];
    }
    for (double h : h_list) {
        const KernelSpec spec = KernelSpec::finite(s, h);
        auto radial11 = [&](double r) {
            double acc = 0.0;
            for (int k = 0; k < ntheta; ++k) acc += (1.0 - std::cos(2.0 * pi * r * cth[k])) * c2[k];
            return acc * (2.0 * pi / ntheta) * std::pow(r, -1.0 - 2.0 * s);
        };
        auto radial22 = [&](double r) {
            double acc = 0.0;
            for (int k = 0; k < ntheta; ++k) acc += (1.0 - std::cos(2.0 * pi * r * cth[k])) * s2[k];
            return acc * (2.0 * pi / ntheta) * std::pow(r, -1.0 - 2.0 * s);
        };
        const double m11 = spec.c_h * tanh_sinh(radial11, 0.0, h, 1e-11);
        const double m22 = spec.c_h * tanh_sinh(radial22, 0.0, h, 1e-11);
        const double w2 = 4.0 * pi * pi; // |2 pi xi|^2 at xi = (1,0)
        const double d11 = m11 - 3.0 * w2, d22 = m22 - w2;
        LocalLimitRow row;
        row.h = h;
        row.deviation = std::sqrt(d11 * d11 + d22 * d22) / std::sqrt(9.0 * w2 * w2 + w2 * w2);
        row.ratio = m11 / m22;
        rows.push_back(row);
    }
    return rows;
}

} // namespace nlperi
