#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernels.hpp"
#include "poisson.hpp"
#include "solver.hpp"

namespace nlperi {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad numeric value for " + key + ": '" + v + "'");
    }
    if (pos != v.size())
        throw std::invalid_argument("config: trailing junk in value for " + key + ": '" + v + "'");
    return x;
}

inline long long parse_int(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    long long x;
    try {
        x = std::stoll(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer value for " + key + ": '" + v + "'");
    }
    if (pos != v.size())
        throw std::invalid_argument("config: trailing junk in value for " + key + ": '" + v + "'");
    return x;
}

} // namespace detail

// One flat key = value file drives every experiment; '#' starts a comment.
// Unknown keys are rejected so typos fail loudly.
struct ExperimentConfig {
    std::string experiment = "verify";
    int n = 64;
    double s = 0.5;
    double horizon = 0.0; // 0 means infinite
    double c_h = 0.0;     // 0 means the normalization derived from (s, horizon)
    std::string coefficient = "constant";
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    int tiles = 8;
    std::uint64_t coeff_seed = 11;
    int coeff_resolution = 64;
    std::vector<double> p_list{1.9, 2.0, 2.1};
    double delta0 = 0.1;
    std::uint64_t seed = 7;
    int r_max = 4;
    int tg_nodes = 96;
    double tg_t_min = 1e-4;
    double tg_t_max = 8.0;
    double varpi = 1.0;
    double cg_tol = 1e-10;
    int max_iter = 2000;
    std::string out_dir = ".";
    std::string check; // verify: restrict to one named check; empty = all

    void set(const std::string& key, const std::string& raw) {
        const std::string v = detail::trim(raw);
        if (key == "experiment") experiment = v;
        else if (key == "n") n = static_cast<int>(detail::parse_int(key, v));
        else if (key == "s") s = detail::parse_double(key, v);
        else if (key == "horizon") horizon = v == "inf" ? 0.0 : detail::parse_double(key, v);
        else if (key == "c_h") c_h = detail::parse_double(key, v);
        else if (key == "coefficient") coefficient = v;
        else if (key == "alpha1") alpha1 = detail::parse_double(key, v);
        else if (key == "alpha2") alpha2 = detail::parse_double(key, v);
        else if (key == "tiles") tiles = static_cast<int>(detail::parse_int(key, v));
        else if (key == "coeff_seed") coeff_seed = static_cast<std::uint64_t>(detail::parse_int(key, v));
        else if (key == "coeff_resolution") coeff_resolution = static_cast<int>(detail::parse_int(key, v));
        else if (key == "p_list") {
            p_list.clear();
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ',')) p_list.push_back(detail::parse_double(key, detail::trim(item)));
            if (p_list.empty()) throw std::invalid_argument("config: p_list is empty");
        } else if (key == "delta0") delta0 = detail::parse_double(key, v);
        else if (key == "seed") seed = static_cast<std::uint64_t>(detail::parse_int(key, v));
        else if (key == "r_max") r_max = static_cast<int>(detail::parse_int(key, v));
        else if (key == "tg_nodes") tg_nodes = static_cast<int>(detail::parse_int(key, v));
        else if (key == "tg_t_min") tg_t_min = detail::parse_double(key, v);
        else if (key == "tg_t_max") tg_t_max = detail::parse_double(key, v);
        else if (key == "varpi") varpi = detail::parse_double(key, v);
        else if (key == "cg_tol") cg_tol = detail::parse_double(key, v);
        else if (key == "max_iter") max_iter = static_cast<int>(detail::parse_int(key, v));
        else if (key == "out_dir") out_dir = v;
        else if (key == "check") check = v;
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }

    void validate() const {
        if (n < 8 || (n & (n - 1)) != 0)
            throw std::invalid_argument("config: n must be a power of two, at least 8");
        if (!(s > 0.0) || !(s < 1.0)) throw std::invalid_argument("config: s must lie in (0, 1)");
        if (horizon < 0.0 || horizon > 0.5)
            throw std::invalid_argument("config: horizon must lie in (0, 0.5] or be 0 for infinite");
        for (double p : p_list)
            if (!(p > 1.0)) throw std::invalid_argument("config: every p must exceed 1");
        if (!(delta0 > 0.0)) throw std::invalid_argument("config: delta0 must be positive");
        if (r_max < 1) throw std::invalid_argument("config: r_max must be at least 1");
        if (tg_nodes < 2 || !(tg_t_min > 0.0) || !(tg_t_max > tg_t_min))
            throw std::invalid_argument("config: bad time-grid parameters");
        if (varpi < 0.0) throw std::invalid_argument("config: varpi must be nonnegative");
        if (!(cg_tol > 0.0) || max_iter < 1) throw std::invalid_argument("config: bad solver parameters");
    }

    // fractional Sobolev exponents for d = 2: 2 d / (d -+ 2 s)
    double exponent_upper() const { return 4.0 / (2.0 - 2.0 * s); }
    double exponent_lower() const { return 4.0 / (2.0 + 2.0 * s); }

    KernelSpec kernel_spec() const {
        KernelSpec k = horizon == 0.0 ? KernelSpec::infinite(s) : KernelSpec::finite(s, horizon);
        if (c_h != 0.0) k.c_h = c_h;
        return k;
    }

    CoefficientField coefficient_field() const {
        if (coefficient == "constant") return CoefficientField::constant(alpha1);
        if (coefficient == "separable") {
            // smooth product profile spanning [alpha1, alpha2]
            ScalarGridField prof(coeff_resolution);
            for (int i = 0; i < coeff_resolution; ++i)
                for (int j = 0; j < coeff_resolution; ++j) {
                    const double s1 = std::sin(pi * (i + 0.5) / coeff_resolution);
                    const double s2 = std::sin(pi * (j + 0.5) / coeff_resolution);
                    prof.at(i, j, 0) = alpha1 + (alpha2 - alpha1) * s1 * s1 * s2 * s2;
                }
            return CoefficientField::separable(std::move(prof));
        }
        if (coefficient == "checkerboard") return CoefficientField::checkerboard(alpha1, alpha2, tiles);
        if (coefficient == "random_symmetric")
            return CoefficientField::random_symmetric(alpha1, alpha2, coeff_seed, coeff_resolution);
        throw std::invalid_argument("config: unknown coefficient variant '" + coefficient + "'");
    }

    TimeGrid time_grid() const { return TimeGrid::make(tg_nodes, tg_t_min, tg_t_max); }
    TailPolicy tail_policy() const { return TailPolicy{r_max, false}; }

    SolveOptions solve_options() const {
        SolveOptions o;
        o.varpi = varpi;
        o.cg_tol = cg_tol;
        o.max_iter = max_iter;
        o.tail = tail_policy();
        return o;
    }

    // canonical text: every key in fixed order, so equal configs hash equally
    std::string to_text() const {
        std::ostringstream out;
        out.precision(17);
        out << "experiment = " << experiment << "\n";
        out << "n = " << n << "\n";
        out << "s = " << s << "\n";
        out << "horizon = ";
        if (horizon == 0.0) out << "inf";
        else out << horizon;
        out << "\n";
        out << "c_h = " << c_h << "\n";
        out << "coefficient = " << coefficient << "\n";
        out << "alpha1 = " << alpha1 << "\n";
        out << "alpha2 = " << alpha2 << "\n";
        out << "tiles = " << tiles << "\n";
        out << "coeff_seed = " << coeff_seed << "\n";
        out << "coeff_resolution = " << coeff_resolution << "\n";
        out << "p_list = ";
        for (std::size_t i = 0; i < p_list.size(); ++i) out << (i ? "," : "") << p_list[i];
        out << "\n";
        out << "delta0 = " << delta0 << "\n";
        out << "seed = " << seed << "\n";
        out << "r_max = " << r_max << "\n";
        out << "tg_nodes = " << tg_nodes << "\n";
        out << "tg_t_min = " << tg_t_min << "\n";
        out << "tg_t_max = " << tg_t_max << "\n";
        out << "varpi = " << varpi << "\n";
        out << "cg_tol = " << cg_tol << "\n";
        out << "max_iter = " << max_iter << "\n";
        out << "out_dir = " << out_dir << "\n";
        out << "check = " << check << "\n";
        return out.str();
    }

    static ExperimentConfig parse_text(const std::string& text) {
        ExperimentConfig cfg;
        std::stringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                            " is not key = value");
            cfg.set(detail::trim(line.substr(0, eq)), line.substr(eq + 1));
        }
        return cfg;
    }

    static ExperimentConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("config: cannot open " + path);
        std::stringstream buf;
        buf << in.rdbuf();
        return parse_text(buf.str());
    }
};

// FNV-1a over the canonical text; reports embed this for reproducibility.
// The output directory is plumbing, not experiment identity, so it is skipped.
inline std::string config_hash(const ExperimentConfig& cfg) {
    std::string text;
    {
        std::stringstream in(cfg.to_text());
        std::string line;
        while (std::getline(in, line))
            if (line.rfind("out_dir", 0) != 0) text += line + "\n";
    }
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace nlperi
