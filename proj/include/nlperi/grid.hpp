#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlperi/parallel.hpp"
#include "nlperi/rng.hpp"

namespace nlperi {

// M-component real field sampled at x = (i/n, j/n) on the unit torus [0,1)^2.
// Index arithmetic wraps modulo n. Storage is row-major (i, j, component).
template <int M>
struct GridField {
    int n = 0;
    std::vector<double> v; // n*n*M

    GridField() = default;
    explicit GridField(int n_) : n(n_), v(static_cast<std::size_t>(n_) * n_ * M, 0.0) {}

    double& at(int i, int j, int c) { return v[(static_cast<std::size_t>(i) * n + j) * M + c]; }
    double at(int i, int j, int c) const { return v[(static_cast<std::size_t>(i) * n + j) * M + c]; }

    // wrapped accessor
    double atw(int i, int j, int c) const {
        i %= n; if (i < 0) i += n;
        j %= n; if (j < 0) j += n;
        return at(i, j, c);
    }

    std::array<double, M> vec(int i, int j) const {
        std::array<double, M> out{};
        for (int c = 0; c < M; ++c) out[c] = at(i, j, c);
        return out;
    }

    std::size_t size() const { return v.size(); }

    std::array<double, M> mean() const {
        std::array<double, M> m{};
        for (std::size_t k = 0; k < v.size(); k += M)
            for (int c = 0; c < M; ++c) m[c] += v[k + c];
        const double inv = 1.0 / (static_cast<double>(n) * n);
        for (int c = 0; c < M; ++c) m[c] *= inv;
        return m;
    }

    void subtract_mean() {
        const auto m = mean();
        for (std::size_t k = 0; k < v.size(); k += M)
            for (int c = 0; c < M; ++c) v[k + c] -= m[c];
    }

    bool all_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

using ScalarGridField = GridField<1>;
using GridVectorField = GridField<2>;
using ExtendedGridField = GridField<3>; // (u_1, u_2, u_{d+1}) Poisson extensions

// (n^{-2} sum |g|^p)^{1/p}; p >= 1
inline double lp_norm(const ScalarGridField& g, double p) {
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
    const double acc = parallel_reduce_rows(g.n, [&](std::size_t i) {
        double s = 0.0;
        for (int j = 0; j < g.n; ++j) s += std::pow(std::fabs(g.at(static_cast<int>(i), j, 0)), p);
        return s;
    });
    return std::pow(acc / (static_cast<double>(g.n) * g.n), 1.0 / p);
}

// pointwise Euclidean magnitude
template <int M>
ScalarGridField magnitude(const GridField<M>& f) {
    ScalarGridField g(f.n);
    for (int i = 0; i < f.n; ++i)
        for (int j = 0; j < f.n; ++j) {
            double s = 0.0;
            for (int c = 0; c < M; ++c) s += f.at(i, j, c) * f.at(i, j, c);
            g.at(i, j, 0) = std::sqrt(s);
        }
    return g;
}

template <int M>
double lp_norm(const GridField<M>& f, double p) {
    return lp_norm(magnitude(f), p);
}

template <int M>
double l2_inner(const GridField<M>& f, const GridField<M>& g) {
    const double acc = parallel_reduce_rows(f.n, [&](std::size_t i) {
        double s = 0.0;
        const std::size_t row = i * f.n * M;
        for (std::size_t k = 0; k < static_cast<std::size_t>(f.n) * M; ++k)
            s += f.v[row + k] * g.v[row + k];
        return s;
    });
    return acc / (static_cast<double>(f.n) * f.n);
}

// Band-limited random mean-zero field: independent gaussian cosine/sine mode
// amplitudes for 0 < |xi|_inf <= band. Deterministic in (seed, n, band).
template <int M>
GridField<M> random_band_limited(int n, int band, std::uint64_t seed) {
    Rng rng(seed);
    GridField<M> f(n);
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (int k1 = -band; k1 <= band; ++k1)
        for (int k2 = -band; k2 <= band; ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            // use one representative per +-xi pair
            if (k1 < 0 || (k1 == 0 && k2 < 0)) continue;
            std::array<double, M> ac{}, as{};
            for (int c = 0; c < M; ++c) {
                ac[c] = rng.gaussian();
                as[c] = rng.gaussian();
            }
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double ph = two_pi * (k1 * (static_cast<double>(i) / n) + k2 * (static_cast<double>(j) / n));
                    const double cph = std::cos(ph), sph = std::sin(ph);
                    for (int c = 0; c < M; ++c) f.at(i, j, c) += ac[c] * cph + as[c] * sph;
                }
        }
    return f;
}

// ---- field file I/O ------------------------------------------------------
// One JSON header line {n, d, role, s?}, then a CSV body i,j,v1..vd.
// Values print as %.17g so write/read round-trips bit-exactly.

namespace detail {
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}
} // namespace detail

template <int M>
void write_field(const std::string& path, const GridField<M>& f, const std::string& role,
                 std::optional<double> s = std::nullopt) {
    nlohmann::json hdr;
    hdr["n"] = f.n;
    hdr["d"] = M;
    hdr["role"] = role;
    if (s) hdr["s"] = *s;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_field: cannot open " + path);
    out << hdr.dump() << "\n";
    out << "i,j";
    for (int c = 1; c <= M; ++c) out << ",v" << c;
    out << "\n";
    for (int i = 0; i < f.n; ++i)
        for (int j = 0; j < f.n; ++j) {
            out << i << ',' << j;
            for (int c = 0; c < M; ++c) out << ',' << detail::fmt17(f.at(i, j, c));
            out << '\n';
        }
    if (!out) throw std::runtime_error("write_field: write failed for " + path);
}

struct FieldHeader {
    int n = 0;
    int d = 0;
    std::string role;
    std::optional<double> s;
};

template <int M>
GridField<M> read_field(const std::string& path, FieldHeader* header = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_field: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_field: missing header in " + path);
    const nlohmann::json hdr = nlohmann::json::parse(line);
    FieldHeader h;
    h.n = hdr.at("n").get<int>();
    h.d = hdr.at("d").get<int>();
    h.role = hdr.value("role", "");
    if (hdr.contains("s")) h.s = hdr["s"].get<double>();
    if (h.d != M) throw std::runtime_error("read_field: component mismatch in " + path);
    if (header) *header = h;
    GridField<M> f(h.n);
    std::getline(in, line); // column header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const char* p = line.c_str();
        char* end = nullptr;
        const long i = std::strtol(p, &end, 10);
        if (*end != ',') throw std::runtime_error("read_field: bad row in " + path);
        p = end + 1;
        const long j = std::strtol(p, &end, 10);
        p = end;
        for (int c = 0; c < M; ++c) {
            if (*p != ',') throw std::runtime_error("read_field: bad row in " + path);
            ++p;
            f.at(static_cast<int>(i), static_cast<int>(j), c) = std::strtod(p, &end);
            p = end;
        }
    }
    return f;
}

} // namespace nlperi
