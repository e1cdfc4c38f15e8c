#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"
#include "marcinkiewicz.hpp"
#include "operator.hpp"
#include "poisson.hpp"
#include "potentials.hpp"
#include "report.hpp"
#include "solver.hpp"

namespace nlperi {

// ---- built-in fields -------------------------------------------------------

// smoothly mollified disk indicator, transition band of the given width
inline ScalarGridField mollified_disk(int n, double cx, double cy, double radius, double width) {
    ScalarGridField g(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double d1 = min_image(static_cast<double>(i) / n - cx);
            const double d2 = min_image(static_cast<double>(j) / n - cy);
            const double d = std::hypot(d1, d2);
            const double t = (radius - d) / width;
            double v = 0.0;
            if (t >= 1.0) v = 1.0;
            else if (t > 0.0) v = t * t * (3.0 - 2.0 * t);
            g.at(i, j, 0) = v;
        }
    return g;
}

inline GridVectorField mode_field(int n, int k1, int k2, double v1, double v2, double phase) {
    GridVectorField f(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double c = std::cos(2.0 * pi * (k1 * (static_cast<double>(i) / n) +
                                                  k2 * (static_cast<double>(j) / n)) + phase);
            f.at(i, j, 0) = v1 * c;
            f.at(i, j, 1) = v2 * c;
        }
    return f;
}

// the 20-field study family: 7 single modes (mixed longitudinal/transverse),
// 7 smooth bumps, 6 mollified jumps; deterministic given the seed
inline std::vector<GridVectorField> characterization_family(int n, std::uint64_t seed) {
    std::vector<GridVectorField> fam;
    Rng rng(seed);
    const int modes[7][2] = {{1, 0}, {0, 1}, {1, 1}, {2, 1}, {3, 0}, {2, 2}, {4, 1}};
    const double dirs[7][2] = {{1.0, 0.0},   {1.0, 0.0},  {0.7071, 0.7071}, {-0.4472, 0.8944},
                               {0.6, 0.8},   {0.7071, -0.7071}, {0.9701, 0.2425}};
    for (int k = 0; k < 7; ++k)
        fam.push_back(mode_field(n, modes[k][0], modes[k][1], dirs[k][0], dirs[k][1],
                                 rng.uniform(0.0, 2.0 * pi)));
    const double centers[7][2] = {{0.5, 0.5}, {0.25, 0.25}, {0.75, 0.3}, {0.3, 0.7},
                                  {0.6, 0.6}, {0.2, 0.5},   {0.8, 0.8}};
    const double widths[7] = {0.08, 0.1, 0.12, 0.15, 0.09, 0.11, 0.13};
    const double bdirs[7][2] = {{1, 0}, {0, 1}, {0.7071, 0.7071}, {1, 0}, {0, 1}, {0.7071, -0.7071}, {1, 0}};
    for (int k = 0; k < 7; ++k) {
        GridVectorField f(n);
        const double cx = centers[k][0] + 0.02 * rng.uniform(-1.0, 1.0);
        const double cy = centers[k][1] + 0.02 * rng.uniform(-1.0, 1.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double d1 = min_image(static_cast<double>(i) / n - cx);
                const double d2 = min_image(static_cast<double>(j) / n - cy);
                const double g = std::exp(-(d1 * d1 + d2 * d2) / (widths[k] * widths[k]));
                f.at(i, j, 0) = bdirs[k][0] * g;
                f.at(i, j, 1) = bdirs[k][1] * g;
            }
        f.subtract_mean();
        fam.push_back(std::move(f));
    }
    const double radii[6] = {0.3, 0.25, 0.2, 0.35, 0.15, 0.28};
    const double jwidths[6] = {0.04, 0.05, 0.06, 0.045, 0.055, 0.07};
    const double jdirs[6][2] = {{1, 0}, {0, 1}, {0.7071, 0.7071}, {1, 0}, {0.7071, -0.7071}, {0, 1}};
    for (int k = 0; k < 6; ++k) {
        const double cx = 0.5 + 0.05 * rng.uniform(-1.0, 1.0);
        const double cy = 0.5 + 0.05 * rng.uniform(-1.0, 1.0);
        ScalarGridField disk = mollified_disk(n, cx, cy, radii[k], jwidths[k]);
        GridVectorField f(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                f.at(i, j, 0) = jdirs[k][0] * disk.at(i, j, 0);
                f.at(i, j, 1) = jdirs[k][1] * disk.at(i, j, 0);
            }
        f.subtract_mean();
        fam.push_back(std::move(f));
    }
    return fam;
}

// rough right-hand side for the Meyers study: mollified disk jump, direction
// e1, transition band tied to the grid (2 cells), normalized in L^{2_{*s}}
inline GridVectorField meyers_data(int n, double s) {
    ScalarGridField disk = mollified_disk(n, 0.5, 0.5, 0.25, 2.0 / n);
    GridVectorField F(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) F.at(i, j, 0) = disk.at(i, j, 0);
    const double lower = 4.0 / (2.0 + 2.0 * s);
    const double norm = lp_norm(F, lower);
    if (norm > 0.0)
        for (double& x : F.v) x /= norm;
    return F;
}

namespace detail {

inline std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

inline double mat3_max_abs(const Mat3& m) {
    double worst = 0.0;
    for (double x : m) worst = std::max(worst, std::fabs(x));
    return worst;
}

inline ScalarGridField riesz_div(const GridVectorField& f) {
    const int n = f.n;
    ScalarGridField f1(n), f2(n);
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    for (std::size_t k = 0; k < nn; ++k) {
        f1.v[k] = f.v[2 * k];
        f2.v[k] = f.v[2 * k + 1];
    }
    ScalarGridField r1 = riesz_transform(1, f1), r2 = riesz_transform(2, f2);
    for (std::size_t k = 0; k < nn; ++k) r1.v[k] += r2.v[k];
    return r1;
}

} // namespace detail

// ---- verify: the identity suite --------------------------------------------

inline nlohmann::json run_verify(const ExperimentConfig& cfg) {
    cfg.validate();
    nlohmann::json rep = report_skeleton(cfg);
    auto want = [&](const std::string& name) {
        return cfg.check.empty() || name.find(cfg.check) != std::string::npos;
    };
    auto push = [&](const CheckResult& c) { rep["checks"].push_back(to_json(c)); };
    auto guarded = [&](const std::string& name, auto&& body) {
        if (!want(name)) return;
        try {
            body();
        } catch (const std::exception& e) {
            CheckResult c;
            c.name = name;
            c.pass = false;
            c.note = std::string("error: ") + e.what();
            push(c);
        }
    };
    const TailPolicy tail = cfg.tail_policy();

    guarded("kernel_mass", [&] {
        for (double t : {0.05, 0.1, 0.5}) {
            const double dev = detail::mat3_max_abs(kernel_mass_check(t, 50.0 * t));
            push(make_check("kernel_mass_t" + std::to_string(t).substr(0, 4), dev, 0.0, dev, 1e-3));
        }
    });

    guarded("g1", [&] {
        const TimeGrid tg = cfg.time_grid();
        double worst_stated = 0.0, worst_corrected = 0.0, worst_algebra = 0.0;
        const int fields = 5;
        for (int k = 0; k < fields; ++k) {
            GridVectorField f = random_band_limited<2>(cfg.n, cfg.n / 4, cfg.seed + k);
            const G1Identity id = g1_l2_identity_check(f, tg);
            worst_stated = std::max(worst_stated, std::fabs(id.lhs - id.rhs) / id.rhs);
            worst_corrected =
                std::max(worst_corrected, std::fabs(id.lhs - id.corrected_rhs) / id.corrected_rhs);
            worst_algebra = std::max(worst_algebra, std::fabs(id.analytic_per_mode - id.rhs) / id.rhs);
        }
        push(make_check("g1_gamma_algebra", worst_algebra, 0.0, worst_algebra, 1e-12));
        push(make_check("g1_l2_identity_as_stated", worst_stated, 0.0, worst_stated, 1e-3, true,
                        "stated right side exceeds the time integral; see corrected companion"));
        push(make_check("g1_l2_identity_corrected", worst_corrected, 0.0, worst_corrected, 1e-3));
    });

    guarded("fractional_time", [&] {
        GridVectorField f = random_band_limited<2>(cfg.n, 4, cfg.seed + 11);
        for (double s : {0.25, 0.5, 0.75}) {
            const double stated = fractional_time_identity_check(f, s, 0.5, {}, false);
            const double corrected = fractional_time_identity_check(f, s, 0.5, {}, true);
            const std::string tag = std::to_string(s).substr(0, 4);
            push(make_check("fractional_time_as_stated_s" + tag, stated, 0.0, stated, 1e-6, true,
                            "scalar potential; matrix-potential companion closes the identity"));
            push(make_check("fractional_time_corrected_s" + tag, corrected, 0.0, corrected, 1e-6));
        }
    });

    guarded("split_horizon", [&] {
        const double h = cfg.horizon > 0.0 ? cfg.horizon : 0.25;
        const KernelSpec spec = KernelSpec::finite(cfg.s, h);
        const CoefficientField A = cfg.coefficient_field();
        GridVectorField u = random_band_limited<2>(cfg.n, cfg.n / 4, cfg.seed + 21);
        OperatorContext ctx(spec, A, cfg.n, tail);
        const GridVectorField lhs = ctx.apply(u);
        const SplitParts parts = split_horizon(spec, A, u, tail);
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < lhs.v.size(); ++k) {
            const double d = lhs.v[k] - parts.infinite_part.v[k] - parts.bounded_part.v[k];
            num += d * d;
            den += lhs.v[k] * lhs.v[k];
        }
        const double dev = std::sqrt(num / den);
        push(make_check("split_horizon", dev, 0.0, dev, 1e-8));
    });

    guarded("local_limit", [&] {
        const auto rows = local_limit_check(cfg.s, {0.4, 0.2, 0.1, 0.05});
        double worst_growth = 0.0;
        for (std::size_t k = 1; k < rows.size(); ++k)
            worst_growth = std::max(worst_growth, rows[k].deviation / rows[k - 1].deviation);
        push(make_check("local_limit_monotone", worst_growth, 1.0, worst_growth, 1.0));
        const double rdev = std::fabs(rows.back().ratio - 3.0) / 3.0;
        push(make_check("local_limit_ratio", rows.back().ratio, 3.0, rdev, 0.05));
    });

    guarded("korn", [&] {
        const MultiplierConstants mc = multiplier_constants(2, cfg.s);
        const double trace_dev = std::fabs(2.0 * mc.a + mc.b - mc.c) / mc.c;
        push(make_check("korn_trace_identity", 2.0 * mc.a + mc.b, mc.c, trace_dev, 1e-8));
        const double kappa2 = korn_constant_q2(cfg.s);
        double low_violation = 0.0, high_violation = 0.0, point_violation = 0.0;
        for (int k = 0; k < 32; ++k) {
            GridVectorField u = random_band_limited<2>(cfg.n, cfg.n / 4, cfg.seed + 100 + k);
            const ScalarGridField d = d_s(u, cfg.s, tail);
            const ScalarGridField up = upsilon_s(u, cfg.s, tail);
            for (std::size_t q = 0; q < d.v.size(); ++q)
                point_violation = std::max(point_violation, d.v[q] - up.v[q]);
            const double x = lp_norm(d, 2.0), w = lp_norm(up, 2.0);
            low_violation = std::max(low_violation, (x - w) / w);
            high_violation = std::max(high_violation, w / (kappa2 * x) - 1.0);
        }
        push(make_check("korn_pointwise_domination", point_violation, 0.0,
                        std::max(point_violation, 0.0), 1e-15));
        push(make_check("korn_sandwich_lower", low_violation, 0.0, std::max(low_violation, 0.0), 1e-12));
        push(make_check("korn_sandwich_upper", high_violation, 0.0, std::max(high_violation, 0.0), 0.01));
    });

    guarded("stein", [&] {
        GridVectorField f = random_band_limited<2>(cfg.n, cfg.n / 4, cfg.seed + 300);
        const GridVectorField lf = stein_operator_L(f);
        const GridVectorField ls = stein_operator_L_symbol(f);
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < lf.v.size(); ++k) {
            num += (lf.v[k] - ls.v[k]) * (lf.v[k] - ls.v[k]);
            den += ls.v[k] * ls.v[k];
        }
        push(make_check("stein_formula_vs_symbol", std::sqrt(num), std::sqrt(den),
                        std::sqrt(num / den), 1e-12));
        const ScalarGridField rl = detail::riesz_div(lf);
        const ScalarGridField rf = detail::riesz_div(f);
        double dev_stated = 0.0, dev_observed = 0.0, base = 0.0;
        for (std::size_t k = 0; k < rl.v.size(); ++k) {
            dev_stated += (rl.v[k] + 2.0 * rf.v[k]) * (rl.v[k] + 2.0 * rf.v[k]);
            dev_observed += (rl.v[k] - 4.0 * rf.v[k]) * (rl.v[k] - 4.0 * rf.v[k]);
            base += rf.v[k] * rf.v[k];
        }
        push(make_check("stein_proof_identity_as_stated", std::sqrt(dev_stated / base), 0.0,
                        std::sqrt(dev_stated / base), 1e-10, true,
                        "stated factor -2; the composed symbol gives +4; see observed companion"));
        push(make_check("stein_proof_identity_observed", std::sqrt(dev_observed / base), 0.0,
                        std::sqrt(dev_observed / base), 1e-10));
    });

    rep["hard_pass"] = hard_checks_pass(rep);
    write_report(detail::out_path(cfg, "verify.json"), rep);
    return rep;
}

// ---- meyers: higher-integrability refinement study --------------------------

inline nlohmann::json run_meyers(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.coefficient == "constant")
        throw std::invalid_argument("run_meyers: needs a rough coefficient (checkerboard or random_symmetric)");
    nlohmann::json rep = report_skeleton(cfg);
    rep["note"] = "data: mollified disk jump, transition width 2/n, unit lower-exponent norm";
    const KernelSpec spec = cfg.kernel_spec();
    const CoefficientField A = cfg.coefficient_field();
    const TailPolicy tail = cfg.tail_policy();
    const std::vector<int> n_list{32, 64, 128};
    std::vector<std::vector<double>> rows;
    // upsilon-norm table indexed [p][n]
    std::vector<std::vector<double>> ups_table(cfg.p_list.size(), std::vector<double>(n_list.size(), 0.0));
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
        const int n = n_list[ni];
        const GridVectorField F = meyers_data(n, cfg.s);
        SolveStats stats;
        SolveOptions opts = cfg.solve_options();
        const GridVectorField u = solve_regularized(spec, A, F, opts, &stats);
        rep["checks"].push_back(to_json(make_check("cg_residual_n" + std::to_string(n),
                                                   stats.final_residual, 0.0, stats.final_residual,
                                                   1e-8)));
        const ScalarGridField ds = d_s(u, cfg.s, tail);
        const ScalarGridField ups = upsilon_s(u, cfg.s, tail);
        for (std::size_t pi = 0; pi < cfg.p_list.size(); ++pi) {
            const double p = cfg.p_list[pi];
            const double norm_u = lp_norm(u, p);
            const double norm_ups = lp_norm(ups, p);
            const double norm_ds = lp_norm(ds, p);
            const double norm_bessel = bessel_norm(u, cfg.s, p);
            ups_table[pi][ni] = norm_ups;
            rows.push_back({static_cast<double>(n), p, norm_u, norm_ups, norm_ds, norm_bessel});
        }
    }
    double largest_passing_p = 0.0;
    for (std::size_t pi = 0; pi < cfg.p_list.size(); ++pi) {
        const double p = cfg.p_list[pi];
        char tag[32];
        std::snprintf(tag, sizeof tag, "%g", p);
        double worst_growth = 0.0;
        for (std::size_t ni = 1; ni < n_list.size(); ++ni)
            worst_growth = std::max(worst_growth, ups_table[pi][ni] / ups_table[pi][ni - 1]);
        if (p == 2.0) {
            const double last = ups_table[pi].back() / ups_table[pi][ups_table[pi].size() - 2];
            rep["checks"].push_back(to_json(
                make_check(std::string("meyers_p2_converges"), last, 1.0, std::fabs(last - 1.0), 0.1)));
        } else if (p > 2.0) {
            // the theorem guarantees some epsilon > 0 but not its size: assert the
            // growth rule only near 2, report it further out
            const bool soft = p > 2.3;
            rep["checks"].push_back(to_json(make_check(std::string("meyers_growth_p") + tag,
                                                       worst_growth, 1.5, worst_growth, 1.5, soft)));
        }
        if (worst_growth < 1.5) largest_passing_p = std::max(largest_passing_p, p);
    }
    rep["largest_passing_p"] = largest_passing_p;
    rep["exponent_upper"] = cfg.exponent_upper();
    rep["exponent_lower"] = cfg.exponent_lower();
    write_csv(detail::out_path(cfg, "meyers_table.csv"),
              {"n", "p", "norm_u", "norm_upsilon", "norm_ds", "norm_bessel"}, rows);
    rep["hard_pass"] = hard_checks_pass(rep);
    write_report(detail::out_path(cfg, "meyers.json"), rep);
    return rep;
}

// ---- characterize: Bessel-norm comparison stability --------------------------

inline nlohmann::json run_characterize(const ExperimentConfig& cfg) {
    cfg.validate();
    nlohmann::json rep = report_skeleton(cfg);
    const TailPolicy tail = cfg.tail_policy();
    const std::vector<double> s_list{0.3, 0.5, 0.7};
    const std::vector<int> n_list{cfg.n, 2 * cfg.n};
    std::vector<std::vector<double>> rows;
    // max ratios indexed [s][p][n]
    std::vector<std::vector<std::vector<double>>> lo_tab(
        s_list.size(), std::vector<std::vector<double>>(cfg.p_list.size(),
                                                        std::vector<double>(n_list.size(), 0.0)));
    auto hi_tab = lo_tab;
    for (std::size_t si = 0; si < s_list.size(); ++si) {
        const double s = s_list[si];
        for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
            const int n = n_list[ni];
            const auto family = characterization_family(n, cfg.seed);
            for (const auto& f : family) {
                const ScalarGridField ds = d_s(f, s, tail);
                for (std::size_t pi = 0; pi < cfg.p_list.size(); ++pi) {
                    const double p = cfg.p_list[pi];
                    const double bessel = bessel_norm(f, s, p);
                    const double plain = lp_norm(f, p);
                    const double dsn = lp_norm(ds, p);
                    const double sum = plain + dsn;
                    const double lo = bessel / sum, hi = sum / bessel;
                    lo_tab[si][pi][ni] = std::max(lo_tab[si][pi][ni], lo);
                    hi_tab[si][pi][ni] = std::max(hi_tab[si][pi][ni], hi);
                }
            }
            for (std::size_t pi = 0; pi < cfg.p_list.size(); ++pi)
                rows.push_back({s, cfg.p_list[pi], static_cast<double>(n), lo_tab[si][pi][ni],
                                hi_tab[si][pi][ni]});
        }
        for (std::size_t pi = 0; pi < cfg.p_list.size(); ++pi) {
            char tag[48];
            std::snprintf(tag, sizeof tag, "s%g_p%g", s, cfg.p_list[pi]);
            const double drift_lo = std::fabs(std::log(lo_tab[si][pi][1] / lo_tab[si][pi][0]));
            const double drift_hi = std::fabs(std::log(hi_tab[si][pi][1] / hi_tab[si][pi][0]));
            const bool finite = std::isfinite(lo_tab[si][pi][0]) && std::isfinite(lo_tab[si][pi][1]) &&
                                std::isfinite(hi_tab[si][pi][0]) && std::isfinite(hi_tab[si][pi][1]);
            CheckResult fc;
            fc.name = std::string("char_finite_") + tag;
            fc.lhs = lo_tab[si][pi][1];
            fc.rhs = hi_tab[si][pi][1];
            fc.deviation = finite ? 0.0 : 1.0;
            fc.tolerance = 0.5;
            fc.pass = finite;
            rep["checks"].push_back(to_json(fc));
            const double drift = std::max(drift_lo, drift_hi);
            rep["checks"].push_back(to_json(make_check(std::string("char_stable_") + tag,
                                                       std::exp(drift), 1.0, drift, std::log(1.2))));
        }
    }
    write_csv(detail::out_path(cfg, "characterize_table.csv"),
              {"s", "p", "n", "max_ratio_lower", "max_ratio_upper"}, rows);
    rep["hard_pass"] = hard_checks_pass(rep);
    write_report(detail::out_path(cfg, "characterize.json"), rep);
    return rep;
}

// ---- solve: one boundary-value run with certificates -------------------------

inline nlohmann::json run_solve(const ExperimentConfig& cfg) {
    cfg.validate();
    nlohmann::json rep = report_skeleton(cfg);
    const KernelSpec spec = cfg.kernel_spec();
    const CoefficientField A = cfg.coefficient_field();
    const TailPolicy tail = cfg.tail_policy();
    const GridVectorField F = meyers_data(cfg.n, cfg.s);
    SolveStats stats;
    SolveOptions opts = cfg.solve_options();
    const GridVectorField u = solve_regularized(spec, A, F, opts, &stats);
    const ScalarGridField ds = d_s(u, cfg.s, tail);
    const ScalarGridField ups = upsilon_s(u, cfg.s, tail);
    write_field(detail::out_path(cfg, "data.field"), F, "data", cfg.s);
    write_field(detail::out_path(cfg, "u.field"), u, "solution", cfg.s);
    write_field(detail::out_path(cfg, "ds.field"), ds, "ds", cfg.s);
    write_field(detail::out_path(cfg, "upsilon.field"), ups, "upsilon", cfg.s);
    std::vector<std::vector<double>> conv;
    for (std::size_t k = 0; k < stats.residuals.size(); ++k)
        conv.push_back({static_cast<double>(k), stats.residuals[k]});
    write_csv(detail::out_path(cfg, "solve_convergence.csv"), {"iteration", "residual"}, conv);
    rep["iterations"] = stats.iterations;
    rep["checks"].push_back(to_json(make_check("cg_residual", stats.final_residual, 0.0,
                                               stats.final_residual, std::max(cfg.cg_tol * 10.0, 1e-12))));
    const double wr = weak_residual(u, F, spec, A, opts, 16, cfg.seed + 1000);
    rep["checks"].push_back(to_json(make_check("weak_residual", wr, 0.0, wr, 1e-6)));
    rep["hard_pass"] = hard_checks_pass(rep);
    write_report(detail::out_path(cfg, "solve.json"), rep);
    return rep;
}

// ---- gfunction: the L2 identity across seeded fields --------------------------

inline nlohmann::json run_gfunction(const ExperimentConfig& cfg) {
    cfg.validate();
    nlohmann::json rep = report_skeleton(cfg);
    const TimeGrid tg = cfg.time_grid();
    std::vector<std::vector<double>> rows;
    double worst_stated = 0.0, worst_corrected = 0.0, worst_algebra = 0.0;
    const int fields = 20;
    for (int k = 0; k < fields; ++k) {
        GridVectorField f = random_band_limited<2>(cfg.n, cfg.n / 4, cfg.seed + k);
        const G1Identity id = g1_l2_identity_check(f, tg);
        rows.push_back({static_cast<double>(k), id.lhs, id.rhs, id.analytic_per_mode, id.corrected_rhs});
        worst_stated = std::max(worst_stated, std::fabs(id.lhs - id.rhs) / id.rhs);
        worst_corrected =
            std::max(worst_corrected, std::fabs(id.lhs - id.corrected_rhs) / id.corrected_rhs);
        worst_algebra = std::max(worst_algebra, std::fabs(id.analytic_per_mode - id.rhs) / id.rhs);
    }
    rep["checks"].push_back(to_json(make_check("g1_gamma_algebra", worst_algebra, 0.0, worst_algebra, 1e-12)));
    rep["checks"].push_back(
        to_json(make_check("g1_l2_identity_as_stated", worst_stated, 0.0, worst_stated, 1e-3, true,
                           "stated right side exceeds the time integral; see corrected companion")));
    rep["checks"].push_back(
        to_json(make_check("g1_l2_identity_corrected", worst_corrected, 0.0, worst_corrected, 1e-3)));
    write_csv(detail::out_path(cfg, "gfunction_table.csv"),
              {"field", "lhs", "rhs_as_stated", "analytic_per_mode", "corrected_rhs"}, rows);
    rep["hard_pass"] = hard_checks_pass(rep);
    write_report(detail::out_path(cfg, "gfunction.json"), rep);
    return rep;
}

// ---- korn: two-sided seminorm comparison over many fields ---------------------

inline nlohmann::json run_korn(const ExperimentConfig& cfg, int field_count = 500) {
    cfg.validate();
    nlohmann::json rep = report_skeleton(cfg);
    const TailPolicy tail = cfg.tail_policy();
    const MultiplierConstants mc = multiplier_constants(2, cfg.s);
    const double kappa2 = korn_constant_q2(cfg.s);
    const double trace_dev = std::fabs(2.0 * mc.a + mc.b - mc.c) / mc.c;
    rep["checks"].push_back(
        to_json(make_check("korn_trace_identity", 2.0 * mc.a + mc.b, mc.c, trace_dev, 1e-8)));
    rep["kappa2"] = kappa2;
    std::vector<std::vector<double>> rows;
    double low_violation = 0.0, high_violation = 0.0, point_violation = 0.0;
    for (int k = 0; k < field_count; ++k) {
        GridVectorField u = random_band_limited<2>(cfg.n, cfg.n / 4, cfg.seed + k);
        const ScalarGridField d = d_s(u, cfg.s, tail);
        const ScalarGridField up = upsilon_s(u, cfg.s, tail);
        for (std::size_t q = 0; q < d.v.size(); ++q)
            point_violation = std::max(point_violation, d.v[q] - up.v[q]);
        const double x = lp_norm(d, 2.0), w = lp_norm(up, 2.0);
        low_violation = std::max(low_violation, (x - w) / w);
        high_violation = std::max(high_violation, w / (kappa2 * x) - 1.0);
        rows.push_back({static_cast<double>(k), x, w, w / x});
    }
    rep["checks"].push_back(to_json(make_check("korn_pointwise_domination", point_violation, 0.0,
                                               std::max(point_violation, 0.0), 1e-15)));
    rep["checks"].push_back(to_json(
        make_check("korn_sandwich_lower", low_violation, 0.0, std::max(low_violation, 0.0), 1e-12)));
    rep["checks"].push_back(to_json(
        make_check("korn_sandwich_upper", high_violation, 0.0, std::max(high_violation, 0.0), 0.01)));
    write_csv(detail::out_path(cfg, "korn_table.csv"), {"field", "x_seminorm", "w_seminorm", "ratio"},
              rows);
    rep["hard_pass"] = hard_checks_pass(rep);
    write_report(detail::out_path(cfg, "korn.json"), rep);
    return rep;
}

// ---- local-limit: recovery of the local operator ------------------------------

inline nlohmann::json run_local_limit(const ExperimentConfig& cfg) {
    cfg.validate();
    nlohmann::json rep = report_skeleton(cfg);
    const std::vector<double> h_list{0.4, 0.2, 0.1, 0.05};
    const auto rows = local_limit_check(cfg.s, h_list);
    std::vector<std::vector<double>> csv;
    for (const auto& r : rows) csv.push_back({r.h, r.deviation, r.ratio});
    double worst_growth = 0.0;
    for (std::size_t k = 1; k < rows.size(); ++k)
        worst_growth = std::max(worst_growth, rows[k].deviation / rows[k - 1].deviation);
    rep["checks"].push_back(
        to_json(make_check("local_limit_monotone", worst_growth, 1.0, worst_growth, 1.0)));
    const double rdev = std::fabs(rows.back().ratio - 3.0) / 3.0;
    rep["checks"].push_back(to_json(make_check("local_limit_ratio", rows.back().ratio, 3.0, rdev, 0.05)));
    write_csv(detail::out_path(cfg, "local_limit.csv"), {"h", "deviation", "ratio"}, csv);
    rep["hard_pass"] = hard_checks_pass(rep);
    write_report(detail::out_path(cfg, "local_limit.json"), rep);
    return rep;
}

} // namespace nlperi
