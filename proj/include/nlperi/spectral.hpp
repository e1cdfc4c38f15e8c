#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "nlperi/fft.hpp"
#include "nlperi/grid.hpp"

namespace nlperi {

// Fourier coefficients on integer frequencies xi in {-n/2,...,n/2-1}^2 with the
// unit-torus convention coeffs(xi) = n^{-2} sum_x f(x) e^{-2pi i xi.x}.
// Bin (k1,k2) carries xi = (signed_freq(k1), signed_freq(k2)).
template <int M>
struct SpectralField {
    int n = 0;
    std::vector<cplx> c; // n*n*M, row-major (k1, k2, component)

    SpectralField() = default;
    explicit SpectralField(int n_) : n(n_), c(static_cast<std::size_t>(n_) * n_ * M, cplx(0.0, 0.0)) {}

    cplx& at(int k1, int k2, int comp) { return c[(static_cast<std::size_t>(k1) * n + k2) * M + comp]; }
    cplx at(int k1, int k2, int comp) const { return c[(static_cast<std::size_t>(k1) * n + k2) * M + comp]; }

    // bin index of frequency -xi
    static int neg(int k, int n) { return k == 0 ? 0 : n - k; }
};

using SpectralVectorField = SpectralField<2>;

template <int M>
SpectralField<M> forward_transform(const GridField<M>& f) {
    SpectralField<M> F(f.n);
    const int n = f.n;
    std::vector<cplx> work(static_cast<std::size_t>(n) * n);
    const double inv = 1.0 / (static_cast<double>(n) * n);
    for (int comp = 0; comp < M; ++comp) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                work[static_cast<std::size_t>(i) * n + j] = cplx(f.at(i, j, comp), 0.0);
        fft2(work, n, -1);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                F.at(i, j, comp) = work[static_cast<std::size_t>(i) * n + j] * inv;
    }
    return F;
}

// Inverse transform onto a real field. The imaginary residue must stay below
// 1e-10 of the field scale (conjugate-symmetric input); above that, error.
template <int M>
GridField<M> inverse_transform(const SpectralField<M>& F) {
    GridField<M> f(F.n);
    const int n = F.n;
    std::vector<cplx> work(static_cast<std::size_t>(n) * n);
    for (int comp = 0; comp < M; ++comp) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                work[static_cast<std::size_t>(i) * n + j] = F.at(i, j, comp);
        fft2(work, n, +1);
        double max_re = 0.0, max_im = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const cplx z = work[static_cast<std::size_t>(i) * n + j];
                max_re = std::max(max_re, std::fabs(z.real()));
                max_im = std::max(max_im, std::fabs(z.imag()));
                f.at(i, j, comp) = z.real();
            }
        if (max_im > 1e-10 * std::max(max_re, 1e-300))
            throw std::runtime_error("inverse_transform: conjugate symmetry violated (imaginary residue too large)");
    }
    return f;
}

// Apply a per-mode M x M complex matrix multiplier in place.
// fn(xi1, xi2) -> row-major matrix; the xi = 0 bin is left to the multiplier
// (callers encode the mean-zero convention there).
template <int M, typename Fn>
void apply_multiplier(SpectralField<M>& F, Fn&& fn) {
    const int n = F.n;
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k1 = lo; k1 < hi; ++k1)
            for (int k2 = 0; k2 < n; ++k2) {
                const int x1 = signed_freq(static_cast<int>(k1), n);
                const int x2 = signed_freq(k2, n);
                const std::array<cplx, M * M> m = fn(x1, x2);
                std::array<cplx, M> in{};
                for (int c = 0; c < M; ++c) in[c] = F.at(static_cast<int>(k1), k2, c);
                for (int r = 0; r < M; ++r) {
                    cplx acc(0.0, 0.0);
                    for (int c = 0; c < M; ++c) acc += m[r * M + c] * in[c];
                    F.at(static_cast<int>(k1), k2, r) = acc;
                }
            }
    });
}

// Scalar multiplier acting identically on each component.
template <int M, typename Fn>
void apply_scalar_multiplier(SpectralField<M>& F, Fn&& fn) {
    const int n = F.n;
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k1 = lo; k1 < hi; ++k1)
            for (int k2 = 0; k2 < n; ++k2) {
                const cplx m = fn(signed_freq(static_cast<int>(k1), n), signed_freq(k2, n));
                for (int c = 0; c < M; ++c) F.at(static_cast<int>(k1), k2, c) *= m;
            }
    });
}

template <int M>
double spectral_energy(const SpectralField<M>& F) {
    double s = 0.0;
    for (const cplx& z : F.c) s += std::norm(z);
    return s;
}

} // namespace nlperi
