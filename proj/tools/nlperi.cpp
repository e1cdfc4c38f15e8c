// nlperi: experiment runner for the nonlocal coupled-operator toolkit.
// Subcommands reproduce the library's verifiable content end to end and write
// JSON/CSV reports plus field files. Exit code 0 iff all asserted checks pass
// (soft, reported-only checks never gate).

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <nlperi/nlperi.hpp>

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    int n = 0;
    double s = 0.0;
    std::string p_list;
    std::string check;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "config file (key = value lines)");
    cmd->add_option("--out", flags.out_dir, "output directory for reports");
    cmd->add_option("--seed", flags.seed, "random seed override");
    cmd->add_option("--n", flags.n, "grid resolution override (power of two)");
    cmd->add_option("--s", flags.s, "fractional order override, in (0,1)");
    cmd->add_option("--p", flags.p_list, "comma-separated exponent list override");
    cmd->add_option("--check", flags.check, "restrict verify to checks whose name contains this");
}

nlperi::ExperimentConfig build_config(const CommonFlags& flags, const std::string& experiment) {
    nlperi::ExperimentConfig cfg;
    if (!flags.config_path.empty()) cfg = nlperi::ExperimentConfig::from_file(flags.config_path);
    cfg.experiment = experiment;
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    if (flags.seed >= 0) cfg.seed = static_cast<std::uint64_t>(flags.seed);
    if (flags.n > 0) cfg.n = flags.n;
    if (flags.s > 0.0) cfg.set("s", std::to_string(flags.s));
    if (!flags.p_list.empty()) cfg.set("p_list", flags.p_list);
    if (!flags.check.empty()) cfg.check = flags.check;
    cfg.validate();
    return cfg;
}

int finish(const nlohmann::json& rep) {
    int hard = 0, soft_fail = 0;
    for (const auto& c : rep["checks"]) {
        const bool pass = c.value("pass", false);
        const bool soft = c.value("soft", false);
        std::printf("[%s] %-40s deviation %.3e tolerance %.3e%s\n", pass ? "PASS" : "FAIL",
                    c.value("name", std::string("?")).c_str(), c.value("deviation", 0.0),
                    c.value("tolerance", 0.0), soft ? " (reported only)" : "");
        if (!pass) (soft ? soft_fail : hard) += 1;
    }
    if (soft_fail) std::printf("%d reported-only check(s) deviate, not gating\n", soft_fail);
    std::printf("%s\n", hard == 0 ? "OK" : "FAILED");
    return hard == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlocal coupled-operator toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", nlperi::version_string);

    CommonFlags flags;
    auto* solve = app.add_subcommand("solve", "solve the regularized system, write fields + certificates");
    auto* meyers = app.add_subcommand("meyers", "higher-integrability refinement study");
    auto* characterize = app.add_subcommand("characterize", "Bessel-norm characterization stability");
    auto* gfunction = app.add_subcommand("gfunction", "square-function L2 identity study");
    auto* verify = app.add_subcommand("verify", "run the full identity suite");
    auto* korn = app.add_subcommand("korn", "two-sided seminorm comparison");
    auto* local_limit = app.add_subcommand("local-limit", "horizon shrink-down to the local operator");
    auto* defaults = app.add_subcommand("defaults", "print the default config with all keys");
    for (auto* cmd : {solve, meyers, characterize, gfunction, verify, korn, local_limit})
        add_common(cmd, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (defaults->parsed()) {
            std::cout << nlperi::ExperimentConfig().to_text();
            return 0;
        }
        if (solve->parsed()) return finish(nlperi::run_solve(build_config(flags, "solve")));
        if (meyers->parsed()) {
            auto cfg = build_config(flags, "meyers");
            if (flags.config_path.empty()) {
                // no config given: use the canonical refinement study setup
                cfg.coefficient = "checkerboard";
                cfg.alpha1 = 1.0;
                cfg.alpha2 = 10.0;
                cfg.tiles = 8;
                if (flags.s == 0.0) cfg.set("s", "0.4");
            }
            return finish(nlperi::run_meyers(cfg));
        }
        if (characterize->parsed()) return finish(nlperi::run_characterize(build_config(flags, "characterize")));
        if (gfunction->parsed()) return finish(nlperi::run_gfunction(build_config(flags, "gfunction")));
        if (verify->parsed()) return finish(nlperi::run_verify(build_config(flags, "verify")));
        if (korn->parsed()) return finish(nlperi::run_korn(build_config(flags, "korn")));
        if (local_limit->parsed()) return finish(nlperi::run_local_limit(build_config(flags, "local-limit")));
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
