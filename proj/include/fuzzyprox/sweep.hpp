#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fuzzyprox/distance.hpp"

namespace fuzzyprox {

inline constexpr const char* kVersionString = "fuzzyprox 0.1.0";

enum class ReportFormat { csv, json };

struct SweepConfig {
    int n_min = 1;
    int n_max = 4;
    std::vector<std::pair<int, int>> pairs;  ///< empty means all m <= n in range
    int quadrature_margin = 2;
    int family_size = 64;
    int samples = 24;
    std::uint64_t seed = 1u;
    double epsilon = 0.05;
    std::string output_path;
    ReportFormat format = ReportFormat::csv;
};

inline void validate_config(const SweepConfig& c) {
    if (!(1 <= c.n_min && c.n_min <= c.n_max && c.n_max <= 16))
        throw invalid_parameter("sweep: need 1 <= n_min <= n_max <= 16");
    if (c.quadrature_margin < 0 || c.family_size < 1 || c.samples < 1 || c.epsilon <= 0.0)
        throw invalid_parameter("sweep: nonpositive tuning parameter");
    for (const auto& [m, n] : c.pairs)
        if (m < c.n_min || m > c.n_max || n < c.n_min || n > c.n_max)
            throw invalid_parameter("sweep: pair outside [n_min, n_max]");
}

struct SweepResult {
    SweepConfig config;
    std::vector<ProxReport> reports;
    bool truncated = false;       ///< resource cap hit, remaining pairs skipped
    int constants_computed = 0;   ///< distinct levels actually solved
};

inline int delta_trials_for_sweep() { return 8; }

/// Run the sweep: per-level constants once each, then one report per pair in
/// (m, n) lexicographic order. `work_budget` caps the total state-metric work
/// (samples * d_m * d_n summed over pairs); exceeding it stops the sweep with
/// a truncation marker instead of failing.
inline SweepResult run_sweep(const SweepConfig& config,
                             std::uint64_t work_budget = 50'000'000ull) {
    validate_config(config);
    SweepResult out;
    out.config = config;

    std::vector<std::pair<int, int>> pairs = config.pairs;
    if (pairs.empty())
        for (int m = config.n_min; m <= config.n_max; ++m)
            for (int n = m; n <= config.n_max; ++n) pairs.emplace_back(m, n);
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    std::map<int, GridPtr> grids;
    auto grid_for = [&](int degree) {
        auto it = grids.find(degree);
        if (it == grids.end()) it = grids.emplace(degree, shared_sphere_grid(degree)).first;
        return it->second;
    };

    std::map<int, LevelConstants> constants;
    auto constants_for = [&](int n) {
        auto it = constants.find(n);
        if (it == constants.end()) {
            it = constants
                     .emplace(n, level_constants(n, config.family_size,
                                                 delta_trials_for_sweep(),
                                                 derive_seed(config.seed, 0xc0457u + n),
                                                 config.quadrature_margin))
                     .first;
            ++out.constants_computed;
        }
        return it->second;
    };

    std::uint64_t work_spent = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto [m, n] = pairs[i];
        const std::uint64_t pair_work =
            std::uint64_t(config.samples) * std::uint64_t(m + 1) * std::uint64_t(n + 1);
        if (work_spent + pair_work > work_budget) {
            out.truncated = true;
            break;
        }
        work_spent += pair_work;

        ProxReport r = prox_upper_bound(m, n, constants_for(m), constants_for(n));
        r.seed = config.seed;
        r.grid_degree = m + n + config.quadrature_margin;
        const GridPtr grid = grid_for(r.grid_degree);
        const OperatorPairSeminorm L = bb_pair_seminorm(m, n, r.gamma_used, grid);
        HausdorffOptions ho;
        ho.samples = config.samples;
        ho.seed = derive_seed(config.seed, 0x7a170000u + (std::uint64_t(m) << 8) + std::uint64_t(n));
        r.empirical_hausdorff = hausdorff_estimate(m, n, L, grid, ho);
        out.reports.push_back(r);
    }
    return out;
}

namespace detail {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace detail

inline std::string render_csv(const SweepResult& result) {
    std::string out =
        "m,n,d_m,d_n,delta_m,delta_n,gammaA_m,gammaB_m,gammaA_n,gammaB_n,"
        "gamma_used,certified_bound,empirical_hausdorff,seed\n";
    for (const ProxReport& r : result.reports) {
        out += std::to_string(r.m) + ',' + std::to_string(r.n) + ',';
        out += std::to_string(r.m + 1) + ',' + std::to_string(r.n + 1) + ',';
        for (double x : {r.delta_m, r.delta_n, r.gammaA_m, r.gammaB_m, r.gammaA_n,
                         r.gammaB_n, r.gamma_used, r.certified_bound,
                         r.empirical_hausdorff})
            out += detail::format_double(x) + ',';
        out += std::to_string(r.seed) + '\n';
    }
    if (result.truncated) out += "# truncated: resource cap exceeded\n";
    return out;
}

inline nlohmann::ordered_json report_to_json(const ProxReport& r) {
    nlohmann::ordered_json j;
    j["m"] = r.m;
    j["n"] = r.n;
    j["delta_m"] = r.delta_m;
    j["delta_n"] = r.delta_n;
    j["gammaA_m"] = r.gammaA_m;
    j["gammaB_m"] = r.gammaB_m;
    j["gammaA_n"] = r.gammaA_n;
    j["gammaB_n"] = r.gammaB_n;
    j["gamma_used"] = r.gamma_used;
    j["certified_bound"] = r.certified_bound;
    j["empirical_hausdorff"] = r.empirical_hausdorff;
    j["seed"] = r.seed;
    j["grid_degree"] = r.grid_degree;
    return j;
}

inline ProxReport report_from_json(const nlohmann::json& j) {
    ProxReport r;
    r.m = j.at("m").get<int>();
    r.n = j.at("n").get<int>();
    r.delta_m = j.at("delta_m").get<double>();
    r.delta_n = j.at("delta_n").get<double>();
    r.gammaA_m = j.at("gammaA_m").get<double>();
    r.gammaB_m = j.at("gammaB_m").get<double>();
    r.gammaA_n = j.at("gammaA_n").get<double>();
    r.gammaB_n = j.at("gammaB_n").get<double>();
    r.gamma_used = j.at("gamma_used").get<double>();
    r.certified_bound = j.at("certified_bound").get<double>();
    r.empirical_hausdorff = j.at("empirical_hausdorff").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.grid_degree = j.at("grid_degree").get<int>();
    return r;
}

inline std::string render_json(const SweepResult& result) {
    nlohmann::ordered_json j;
    j["version"] = kVersionString;
    nlohmann::ordered_json cfg;
    cfg["n_min"] = result.config.n_min;
    cfg["n_max"] = result.config.n_max;
    cfg["pairs"] = nlohmann::ordered_json::array();
    for (const auto& [m, n] : result.config.pairs)
        cfg["pairs"].push_back(nlohmann::ordered_json::array({m, n}));
    cfg["quadrature_margin"] = result.config.quadrature_margin;
    cfg["family_size"] = result.config.family_size;
    cfg["samples"] = result.config.samples;
    cfg["seed"] = result.config.seed;
    cfg["epsilon"] = result.config.epsilon;
    cfg["output_path"] = result.config.output_path;
    cfg["format"] = result.config.format == ReportFormat::csv ? "csv" : "json";
    j["config"] = cfg;
    j["truncated"] = result.truncated;
    j["reports"] = nlohmann::ordered_json::array();
    for (const ProxReport& r : result.reports) j["reports"].push_back(report_to_json(r));
    return j.dump(2) + "\n";
}

inline std::string render_report(const SweepResult& result, ReportFormat format) {
    return format == ReportFormat::csv ? render_csv(result) : render_json(result);
}

inline void emit_report(const SweepResult& result, ReportFormat format,
                        const std::string& path) {
    if (result.reports.empty() && !result.truncated)
        throw invalid_parameter("emit_report: nothing to write");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_report: cannot open " + path);
    out << render_report(result, format);
    if (!out) throw std::runtime_error("emit_report: write failed for " + path);
}

} // namespace fuzzyprox
