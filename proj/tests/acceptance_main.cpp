// Acceptance gate: the twelve shipping criteria, each with its pinned
// tolerance, one verdict line per criterion. Three criteria check identities
// that the source derivation states incorrectly; they are evaluated exactly as
// stated, fail honestly, and are marked [documented] with passing corrected
// companions. Exit code 0 means every criterion landed on its documented
// expected status; --strict makes any FAIL fatal instead.

#include <nlperi/experiments.hpp>
#include <nlperi/version.hpp>

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <string>
#include <vector>

using namespace nlperi;

namespace {

struct Outcome {
    int id = 0;
    std::string name;
    bool as_stated = false;
    bool expected = true;  // documented expected status of the as-stated check
    bool support_ok = true; // corrected companions / auxiliary clauses
    std::string detail;
};

std::vector<Outcome> outcomes;

void record(const Outcome& o) {
    outcomes.push_back(o);
    const char* flag = o.as_stated ? "[PASS]" : (o.expected ? "[FAIL]" : "[FAIL][documented]");
    std::printf("%s %02d %-22s %s\n", flag, o.id, o.name.c_str(), o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return buf;
}

double rel_l2(const GridVectorField& a, const GridVectorField& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < a.v.size(); ++k) {
        num += (a.v[k] - b.v[k]) * (a.v[k] - b.v[k]);
        den += b.v[k] * b.v[k];
    }
    return std::sqrt(num / den);
}

const nlohmann::json* find_check(const nlohmann::json& rep, const std::string& name) {
    for (const auto& c : rep["checks"])
        if (c["name"] == name) return &c;
    return nullptr;
}

bool check_passes(const nlohmann::json& rep, const std::string& name) {
    const nlohmann::json* c = find_check(rep, name);
    return c != nullptr && (*c)["pass"].get<bool>();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<missing:" + path + ">";
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// ---- criterion bodies -------------------------------------------------------

// 1. kernel mass: deviation from the identity < 1e-3 for t in {0.05, 0.1, 0.5}
void criterion_1() {
    Outcome o{1, "kernel-mass"};
    const double tol = 1e-3;
    double worst = 0.0;
    for (double t : {0.05, 0.1, 0.5})
        worst = std::max(worst, detail::mat3_max_abs(kernel_mass_check(t, 50.0 * t)));
    o.as_stated = worst < tol;
    o.detail = fmt("worst |entry| %.3g (tol %.0e) over t in {0.05, 0.1, 0.5}", worst, tol);
    record(o);
}

// 2. g-function L2 identity across 20 seeded fields at n = 64, plus the exact
//    per-mode algebra of the stated Gamma values. The stated identity is
//    refuted by the computed time integral; the corrected per-mode integral
//    matches it.
void criterion_2() {
    Outcome o{2, "g1-l2-identity"};
    o.expected = false;
    const double tol = 1e-3, tol_algebra = 1e-12;
    const TimeGrid tg = TimeGrid::make();
    double worst_stated = 0.0, worst_corrected = 0.0, worst_algebra = 0.0;
    for (int k = 0; k < 20; ++k) {
        const GridVectorField f = random_band_limited<2>(64, 16, 7 + k);
        const G1Identity id = g1_l2_identity_check(f, tg);
        worst_stated = std::max(worst_stated, std::fabs(id.lhs - id.rhs) / id.rhs);
        worst_corrected =
            std::max(worst_corrected, std::fabs(id.lhs - id.corrected_rhs) / id.corrected_rhs);
        worst_algebra = std::max(worst_algebra, std::fabs(id.analytic_per_mode - id.rhs) / id.rhs);
    }
    const bool algebra_ok = worst_algebra < tol_algebra;
    o.as_stated = worst_stated < tol && algebra_ok;
    o.support_ok = worst_corrected < tol && algebra_ok;
    o.detail = fmt("as stated: worst rel %.3g (tol %.0e); gamma algebra %.3g (tol %.0e) %s; "
                   "corrected companion %.3g (tol %.0e) %s",
                   worst_stated, tol, worst_algebra, tol_algebra, algebra_ok ? "ok" : "BAD",
                   worst_corrected, tol, worst_corrected < tol ? "ok" : "BAD");
    record(o);
}

// 3. fractional time identity: per-mode deviation < 1e-6 over s x t, with
//    refinement halving. The stated scalar potential fails both; the matrix
//    potential closes the identity and refines cleanly.
void criterion_3() {
    Outcome o{3, "fractional-time"};
    o.expected = false;
    const double tol = 1e-6;
    const GridVectorField f = random_band_limited<2>(16, 4, 18);
    double worst_stated = 0.0, worst_corrected = 0.0;
    for (double s : {0.25, 0.5, 0.75})
        for (double t : {0.1, 0.5, 1.0}) {
            worst_stated =
                std::max(worst_stated, fractional_time_identity_check(f, s, t, {}, false));
            worst_corrected =
                std::max(worst_corrected, fractional_time_identity_check(f, s, t, {}, true));
        }
    const double s17 = fractional_time_identity_check(f, 0.5, 0.5, {1e-8, 17}, false);
    const double s33 = fractional_time_identity_check(f, 0.5, 0.5, {1e-8, 33}, false);
    const double c17 = fractional_time_identity_check(f, 0.5, 0.5, {1e-8, 17}, true);
    const double c33 = fractional_time_identity_check(f, 0.5, 0.5, {1e-8, 33}, true);
    const bool stated_halving = s33 <= 0.5 * s17 + 1e-12;
    const bool corrected_halving = c33 <= 0.5 * c17 + 1e-12;
    o.as_stated = worst_stated < tol && stated_halving;
    o.support_ok = worst_corrected < tol && corrected_halving;
    o.detail = fmt("as stated: worst %.3g (tol %.0e), refinement %.3g -> %.3g (halving %s); "
                   "corrected: worst %.3g, refinement %.3g -> %.3g (%s)",
                   worst_stated, tol, s17, s33, stated_halving ? "ok" : "NOT confirmed",
                   worst_corrected, c17, c33, corrected_halving ? "ok" : "BAD");
    record(o);
}

// 4. spectral vs direct operator oracle: A = 1, infinite horizon; relative
//    error <= 1e-2 at n = 64 and improving as n doubles, across s
void criterion_4() {
    Outcome o{4, "operator-oracle"};
    const double tol = 1e-2;
    const std::vector<int> n_list{32, 64, 128};
    bool small_at_64 = true, improving = true;
    double worst64 = 0.0;
    std::string trace;
    for (double s : {0.25, 0.5, 0.75}) {
        const KernelSpec spec = KernelSpec::infinite(s);
        const CoefficientField A = CoefficientField::constant(1.0);
        std::vector<double> errs;
        for (int n : n_list) {
            std::vector<GridVectorField> fields;
            fields.push_back(mode_field(n, 1, 0, 0.0, 1.0, 0.3));
            fields.push_back(mode_field(n, 2, 1, 0.8, -0.6, 1.1));
            fields.push_back(random_band_limited<2>(n, 4, 99));
            OperatorContext ctx(spec, A, n, TailPolicy{});
            double err = 0.0;
            for (const auto& u : fields)
                err = std::max(err, rel_l2(ctx.apply_direct(u), apply_spectral(s, u)));
            errs.push_back(err);
        }
        if (errs[1] >= tol) small_at_64 = false;
        if (!(errs[1] < errs[0] && errs[2] < errs[1])) improving = false;
        worst64 = std::max(worst64, errs[1]);
        trace += fmt(" s=%.2f: %.2e/%.2e/%.2e", s, errs[0], errs[1], errs[2]);
    }
    o.as_stated = small_at_64 && improving;
    o.detail = fmt("worst rel err at n=64: %.3g (tol %.0e), monotone in n %s;%s", worst64, tol,
                   improving ? "yes" : "NO", trace.c_str());
    record(o);
}

// 5. horizon split: finite-horizon operator equals the rescaled infinite part
//    plus the bounded remainder to 1e-8
void criterion_5() {
    Outcome o{5, "horizon-split"};
    const double tol = 1e-8;
    const int n = 64;
    const KernelSpec spec = KernelSpec::finite(0.5, 0.25);
    const CoefficientField A = CoefficientField::checkerboard(1.0, 3.0, 4);
    const GridVectorField u = random_band_limited<2>(n, 16, 28);
    OperatorContext ctx(spec, A, n, TailPolicy{});
    const GridVectorField lhs = ctx.apply(u);
    const SplitParts parts = split_horizon(spec, A, u, TailPolicy{});
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < lhs.v.size(); ++k) {
        const double d = lhs.v[k] - parts.infinite_part.v[k] - parts.bounded_part.v[k];
        num += d * d;
        den += lhs.v[k] * lhs.v[k];
    }
    const double dev = std::sqrt(num / den);
    o.as_stated = dev < tol;
    o.detail = fmt("rel reassembly error %.3g (tol %.0e), n=64, h=0.25, checkerboard", dev, tol);
    record(o);
}

// 6. Korn, q = 2: pointwise domination exact on every grid point across 500
//    fields; sandwich with kappa2 = c/a and 1% slack; trace identity to 1e-8
void criterion_6() {
    Outcome o{6, "korn-q2"};
    const int n = 64, fields = 500;
    const double s = 0.5;
    const MultiplierConstants mc = multiplier_constants(2, s);
    const double trace_dev = std::fabs(2.0 * mc.a + mc.b - mc.c) / mc.c;
    const double kappa2 = korn_constant_q2(s);
    double point_violation = -std::numeric_limits<double>::infinity();
    double low_violation = point_violation, high_violation = point_violation;
    for (int k = 0; k < fields; ++k) {
        const GridVectorField u = random_band_limited<2>(n, 16, 7 + k);
        const ScalarGridField d = d_s(u, s);
        const ScalarGridField up = upsilon_s(u, s);
        for (std::size_t q = 0; q < d.v.size(); ++q)
            point_violation = std::max(point_violation, d.v[q] - up.v[q]);
        const double x = lp_norm(d, 2.0), w = lp_norm(up, 2.0);
        low_violation = std::max(low_violation, (x - w) / w);
        high_violation = std::max(high_violation, w / (kappa2 * x) - 1.0);
    }
    const bool pointwise_ok = point_violation <= 0.0;
    const bool sandwich_ok = low_violation <= 1e-12 && high_violation < 0.01;
    const bool trace_ok = trace_dev < 1e-8;
    o.as_stated = pointwise_ok && sandwich_ok && trace_ok;
    o.detail = fmt("pointwise max(D-Y) %.3g (need <= 0), sandwich lower %.3g upper %.3g "
                   "(slack 1e-12 / 1e-2), trace dev %.3g (tol 1e-8), kappa2 %.4f, 500 fields n=64",
                   point_violation, low_violation, high_violation, trace_dev, kappa2);
    record(o);
}

// 7. Stein operator: assembled formula vs symbol to 1e-12; the proof identity
//    as stated (factor -2) to 1e-10. The composed symbol actually gives +4;
//    the observed companion closes to 1e-10.
void criterion_7() {
    Outcome o{7, "stein-operator"};
    o.expected = false;
    const int n = 64;
    const GridVectorField f = random_band_limited<2>(n, 16, 307);
    const GridVectorField lf = stein_operator_L(f);
    const GridVectorField ls = stein_operator_L_symbol(f);
    const double formula_dev = rel_l2(lf, ls);
    const ScalarGridField rl = detail::riesz_div(lf);
    const ScalarGridField rf = detail::riesz_div(f);
    double dev_stated = 0.0, dev_observed = 0.0, base = 0.0;
    for (std::size_t k = 0; k < rl.v.size(); ++k) {
        dev_stated += (rl.v[k] + 2.0 * rf.v[k]) * (rl.v[k] + 2.0 * rf.v[k]);
        dev_observed += (rl.v[k] - 4.0 * rf.v[k]) * (rl.v[k] - 4.0 * rf.v[k]);
        base += rf.v[k] * rf.v[k];
    }
    dev_stated = std::sqrt(dev_stated / base);
    dev_observed = std::sqrt(dev_observed / base);
    const bool formula_ok = formula_dev < 1e-12;
    o.as_stated = formula_ok && dev_stated < 1e-10;
    o.support_ok = formula_ok && dev_observed < 1e-10;
    o.detail = fmt("formula vs symbol %.3g (tol 1e-12) %s; proof factor as stated (-2): rel dev "
                   "%.3g (tol 1e-10); observed factor (+4): %.3g %s",
                   formula_dev, formula_ok ? "ok" : "BAD", dev_stated, dev_observed,
                   dev_observed < 1e-10 ? "ok" : "BAD");
    record(o);
}

// 8. pointwise domination: max g1(f)/D^s(I_s f) finite with no degenerate
//    points, and stable to +-25% between n = 32 and n = 64 over 10 seeds
void criterion_8() {
    Outcome o{8, "domination-stability"};
    const double s = 0.5, tol = 0.25;
    const TimeGrid tg = TimeGrid::make();
    double worst_drift = 0.0;
    int bad_excluded = 0;
    bool finite = true;
    for (int k = 0; k < 10; ++k) {
        const DominationResult a =
            pointwise_domination_check(random_band_limited<2>(32, 8, 7 + k), s, tg);
        const DominationResult b =
            pointwise_domination_check(random_band_limited<2>(64, 8, 7 + k), s, tg);
        bad_excluded += a.excluded + b.excluded;
        if (!(std::isfinite(a.max_ratio) && std::isfinite(b.max_ratio) && a.max_ratio > 0.0))
            finite = false;
        worst_drift = std::max(worst_drift, std::fabs(b.max_ratio / a.max_ratio - 1.0));
    }
    o.as_stated = finite && bad_excluded == 0 && worst_drift <= tol;
    o.detail = fmt("worst |ratio(64)/ratio(32) - 1| = %.3g (tol %.2f), degenerate points %d, "
                   "10 seeds",
                   worst_drift, tol, bad_excluded);
    record(o);
}

// 9. Meyers experiment: checkerboard(1,10,8), s = 0.4; the p = 2.1 norm grows
//    by < 1.5x per doubling over n in {32, 64, 128}, the p = 2 column
//    converges, and every CG solve hits 1e-8
void criterion_9() {
    Outcome o{9, "meyers-growth"};
    ExperimentConfig cfg;
    cfg.experiment = "meyers";
    cfg.s = 0.4;
    cfg.coefficient = "checkerboard";
    cfg.alpha1 = 1.0;
    cfg.alpha2 = 10.0;
    cfg.tiles = 8;
    cfg.p_list = {1.9, 2.0, 2.1};
    cfg.out_dir = "acceptance_out/meyers";
    const nlohmann::json rep = run_meyers(cfg);
    const bool growth_ok = check_passes(rep, "meyers_growth_p2.1");
    const bool p2_ok = check_passes(rep, "meyers_p2_converges");
    bool cg_ok = true;
    for (int n : {32, 64, 128}) cg_ok = cg_ok && check_passes(rep, "cg_residual_n" + std::to_string(n));
    const nlohmann::json* g = find_check(rep, "meyers_growth_p2.1");
    const nlohmann::json* c = find_check(rep, "meyers_p2_converges");
    o.as_stated = growth_ok && p2_ok && cg_ok;
    o.detail = fmt("p=2.1 worst growth per doubling %.4f (tol 1.5), p=2 last ratio %.4f "
                   "(tol 1 +- 0.1), CG residuals %s",
                   g ? (*g)["lhs"].get<double>() : -1.0, c ? (*c)["lhs"].get<double>() : -1.0,
                   cg_ok ? "all < 1e-8" : "FAILED");
    record(o);
}

// 10. characterization stability: ratio_lower/ratio_upper finite and within
//     +-20% under n-doubling for (s, p) in {0.3,0.5,0.7} x {1.6,2,3}
void criterion_10() {
    Outcome o{10, "characterization"};
    ExperimentConfig cfg;
    cfg.experiment = "characterize";
    cfg.n = 32;
    cfg.p_list = {1.6, 2.0, 3.0};
    cfg.out_dir = "acceptance_out/characterize";
    const nlohmann::json rep = run_characterize(cfg);
    bool all_ok = true;
    double worst_drift = 0.0;
    int count = 0;
    for (const auto& c : rep["checks"]) {
        const std::string name = c["name"].get<std::string>();
        if (name.rfind("char_", 0) != 0) continue;
        ++count;
        all_ok = all_ok && c["pass"].get<bool>();
        if (name.rfind("char_stable_", 0) == 0)
            worst_drift = std::max(worst_drift, c["deviation"].get<double>());
    }
    o.as_stated = all_ok && count == 18; // 9 finiteness + 9 stability checks
    o.detail = fmt("worst log-drift %.3g (tol %.3g = log 1.2), %d checks, grids 32 -> 64",
                   worst_drift, std::log(1.2), count);
    record(o);
}

// 11. local limit: deviation from |2 pi xi|^2 (I + 2 xihat xihat^T) decreases
//     monotonically over h, and the longitudinal/transverse ratio is 3 +- 5%
void criterion_11() {
    Outcome o{11, "local-limit"};
    const auto rows = local_limit_check(0.5, {0.4, 0.2, 0.1, 0.05});
    bool monotone = true;
    for (std::size_t k = 1; k < rows.size(); ++k)
        if (rows[k].deviation >= rows[k - 1].deviation) monotone = false;
    const double rdev = std::fabs(rows.back().ratio - 3.0) / 3.0;
    o.as_stated = monotone && rdev <= 0.05;
    o.detail = fmt("deviations %.3g/%.3g/%.3g/%.3g (monotone %s), ratio at h=0.05: %.4f "
                   "(3 +- 5%%)",
                   rows[0].deviation, rows[1].deviation, rows[2].deviation, rows[3].deviation,
                   monotone ? "yes" : "NO", rows.back().ratio);
    record(o);
}

// 12. determinism: identical configs reproduce every report byte, across
//     different thread counts
void criterion_12() {
    Outcome o{12, "determinism"};
    namespace fs = std::filesystem;
    auto run_pair = [&](const std::string& experiment, const char* threads_a,
                        const char* threads_b, std::vector<std::string>& files) {
        ExperimentConfig cfg;
        cfg.experiment = experiment;
        cfg.n = 32;
        fs::remove_all("acceptance_out/det_a");
        fs::remove_all("acceptance_out/det_b");
        ::setenv("NLPERI_THREADS", threads_a, 1);
        cfg.out_dir = "acceptance_out/det_a";
        if (experiment == "gfunction") run_gfunction(cfg); else run_korn(cfg, 60);
        ::setenv("NLPERI_THREADS", threads_b, 1);
        cfg.out_dir = "acceptance_out/det_b";
        if (experiment == "gfunction") run_gfunction(cfg); else run_korn(cfg, 60);
        bool same = true;
        for (const std::string& f : files)
            same = same && slurp("acceptance_out/det_a/" + f) == slurp("acceptance_out/det_b/" + f);
        return same;
    };
    const char* old = std::getenv("NLPERI_THREADS");
    const std::string saved = old ? old : "";
    std::vector<std::string> gfiles{"gfunction.json", "gfunction_table.csv"};
    std::vector<std::string> kfiles{"korn.json", "korn_table.csv"};
    const bool g_same = run_pair("gfunction", "1", "4", gfiles);
    const bool k_same = run_pair("korn", "4", "1", kfiles);
    if (old) ::setenv("NLPERI_THREADS", saved.c_str(), 1);
    else ::unsetenv("NLPERI_THREADS");
    o.as_stated = g_same && k_same;
    o.detail = fmt("byte-identical reports across reruns and thread counts: gfunction %s, korn %s",
                   g_same ? "yes" : "NO", k_same ? "yes" : "NO");
    record(o);
}

} // namespace

int main(int argc, char** argv) {
    bool strict = false;
    std::set<int> only;
    for (int a = 1; a < argc; ++a) {
        if (std::strcmp(argv[a], "--strict") == 0) strict = true;
        else if (std::strcmp(argv[a], "--only") == 0 && a + 1 < argc) {
            std::string list = argv[++a];
            std::size_t pos = 0;
            while (pos < list.size()) {
                std::size_t next = list.find(',', pos);
                if (next == std::string::npos) next = list.size();
                only.insert(std::atoi(list.substr(pos, next - pos).c_str()));
                pos = next + 1;
            }
        } else {
            std::fprintf(stderr, "usage: %s [--strict] [--only 1,2,...]\n", argv[0]);
            return 2;
        }
    }

    std::printf("nlperi acceptance %s, %d thread(s)\n", version_string, thread_count());
    using Runner = void (*)();
    const Runner runners[12] = {criterion_1, criterion_2, criterion_3,  criterion_4,
                                criterion_5, criterion_6, criterion_7,  criterion_8,
                                criterion_9, criterion_10, criterion_11, criterion_12};
    for (int id = 1; id <= 12; ++id) {
        if (!only.empty() && only.count(id) == 0) continue;
        try {
            runners[id - 1]();
        } catch (const std::exception& e) {
            Outcome o;
            o.id = id;
            o.name = "criterion-" + std::to_string(id);
            o.as_stated = false;
            o.support_ok = false;
            o.detail = std::string("unexpected error: ") + e.what();
            record(o);
        }
    }

    int unexpected = 0, documented = 0, passed = 0;
    for (const Outcome& o : outcomes) {
        if (o.as_stated && o.expected && o.support_ok) ++passed;
        else if (!o.as_stated && !o.expected && o.support_ok) ++documented;
        else ++unexpected;
    }
    std::printf("----\n%d passed as stated, %d failed as documented, %d unexpected\n", passed,
                documented, unexpected);
    if (strict) return (documented + unexpected) == 0 ? 0 : 1;
    return unexpected == 0 ? 0 : 1;
}
