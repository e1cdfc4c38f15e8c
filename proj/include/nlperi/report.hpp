#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "potentials.hpp"
#include "version.hpp"

namespace nlperi {

// One verified statement. Soft checks are reported but never gate the run:
// they record how faithfully a source identity holds as stated, including the
// ones that measurably do not.
struct CheckResult {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool soft = false;
    std::string note;
};

inline CheckResult make_check(const std::string& name, double lhs, double rhs, double deviation,
                              double tolerance, bool soft = false, const std::string& note = {}) {
    CheckResult c;
    c.name = name;
    c.lhs = lhs;
    c.rhs = rhs;
    c.deviation = deviation;
    c.tolerance = tolerance;
    c.pass = deviation < tolerance;
    c.soft = soft;
    c.note = note;
    return c;
}

inline nlohmann::json to_json(const CheckResult& c) {
    nlohmann::json j;
    j["name"] = c.name;
    j["lhs"] = c.lhs;
    j["rhs"] = c.rhs;
    j["deviation"] = c.deviation;
    j["tolerance"] = c.tolerance;
    j["pass"] = c.pass;
    j["soft"] = c.soft;
    if (!c.note.empty()) j["note"] = c.note;
    return j;
}

inline nlohmann::json to_json(const BesselNormReport& r) {
    nlohmann::json j;
    j["p"] = r.p;
    j["s"] = r.s;
    j["bessel_norm"] = r.bessel_norm;
    j["plain_norm"] = r.plain_norm;
    j["ds_norm"] = r.ds_norm;
    j["ratio_lower"] = r.ratio_lower;
    j["ratio_upper"] = r.ratio_upper;
    return j;
}

// report skeleton embedding provenance; deliberately no timestamps so equal
// configs produce byte-equal reports
inline nlohmann::json report_skeleton(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["schema"] = report_schema;
    j["version"] = version_string;
    j["experiment"] = cfg.experiment;
    j["config_hash"] = config_hash(cfg);
    j["seed"] = cfg.seed;
    j["n"] = cfg.n;
    j["s"] = cfg.s;
    j["checks"] = nlohmann::json::array();
    return j;
}

inline bool hard_checks_pass(const nlohmann::json& report) {
    if (!report.contains("checks")) return true;
    for (const auto& c : report["checks"])
        if (!c.value("soft", false) && !c.value("pass", false)) return false;
    return true;
}

// temp-file-plus-rename so readers never observe a half-written report
inline void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("write_text_atomic: cannot open " + tmp);
        out << content;
        if (!out) throw std::runtime_error("write_text_atomic: write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("write_text_atomic: rename failed for " + path);
}

inline void write_report(const std::string& path, const nlohmann::json& report) {
    write_text_atomic(path, report.dump(2) + "\n");
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) out += ',';
        out += header[c];
    }
    out += '\n';
    char buf[40];
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("write_csv: row width does not match header");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            std::snprintf(buf, sizeof buf, "%.17g", row[c]);
            out += buf;
        }
        out += '\n';
    }
    write_text_atomic(path, out);
}

} // namespace nlperi
