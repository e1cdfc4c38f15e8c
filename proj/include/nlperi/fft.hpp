#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "nlperi/parallel.hpp"

namespace nlperi {

using cplx = std::complex<double>;

namespace detail {

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 transform, sign = -1 forward / +1 inverse
// (inverse leaves the 1/n normalization to the caller).
inline void fft_pow2(cplx* a, int n, int sign) {
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    constexpr double pi = 3.141592653589793238462643383279;
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * pi / len;
        const cplx wl(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (int k = 0; k < len / 2; ++k) {
                const cplx u = a[i + k];
                const cplx t = a[i + k + len / 2] * w;
                a[i + k] = u + t;
                a[i + k + len / 2] = u - t;
                w *= wl;
            }
        }
    }
}

} // namespace detail

// 2-D transform of an n*n complex array (row-major), rows then columns.
// sign = -1: X(k) = sum_x f(x) e^{-2pi i k.x/n}; sign = +1: unnormalized adjoint.
inline void fft2(std::vector<cplx>& a, int n, int sign) {
    if (!detail::is_pow2(n)) throw std::invalid_argument("fft2: n must be a power of two");
    if (a.size() != static_cast<std::size_t>(n) * n) throw std::invalid_argument("fft2: size mismatch");
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) detail::fft_pow2(a.data() + i * n, n, sign);
    });
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        std::vector<cplx> col(n);
        for (std::size_t j = lo; j < hi; ++j) {
            for (int i = 0; i < n; ++i) col[i] = a[static_cast<std::size_t>(i) * n + j];
            detail::fft_pow2(col.data(), n, sign);
            for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i) * n + j] = col[i];
        }
    });
}

// signed frequency of DFT bin k on an n-grid: {-n/2, ..., n/2-1}
inline int signed_freq(int k, int n) { return k < n / 2 ? k : k - n; }

} // namespace nlperi
