#include <cstdio>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "fuzzyprox/sweep.hpp"

namespace {

std::vector<std::pair<int, int>> parse_pairs(const std::vector<std::string>& specs) {
    std::vector<std::pair<int, int>> pairs;
    for (const std::string& s : specs) {
        const auto colon = s.find(':');
        if (colon == std::string::npos)
            throw CLI::ValidationError("--pairs", "expected m:n, got '" + s + "'");
        try {
            pairs.emplace_back(std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1)));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--pairs", "expected integers in '" + s + "'");
        }
    }
    return pairs;
}

int run_sweep_command(const fuzzyprox::SweepConfig& config) {
    const fuzzyprox::SweepResult result = fuzzyprox::run_sweep(config);
    fuzzyprox::emit_report(result, config.format, config.output_path);
    std::printf("wrote %zu report(s) to %s%s\n", result.reports.size(),
                config.output_path.c_str(), result.truncated ? " (truncated)" : "");
    for (const fuzzyprox::ProxReport& r : result.reports)
        if (r.empirical_hausdorff > r.certified_bound) {
            std::fprintf(stderr, "consistency violation at (%d, %d): %.17g > %.17g\n",
                         r.m, r.n, r.empirical_hausdorff, r.certified_bound);
            return 3;
        }
    return 0;
}

int run_constants_command(int n, int family_size, std::uint64_t seed, int margin) {
    const fuzzyprox::LevelConstants c =
        fuzzyprox::level_constants(n, family_size, fuzzyprox::delta_trials_for_sweep(),
                                   seed, margin);
    std::printf("n       = %d\n", c.n);
    std::printf("delta   = %.17g\n", c.delta);
    std::printf("gamma_A = %.17g\n", c.gamma_A);
    std::printf("gamma_B = %.17g\n", c.gamma_B);
    return 0;
}

int run_verify_command(int n, int family_size, std::uint64_t seed, double epsilon,
                       int margin) {
    const fuzzyprox::GridPtr grid = fuzzyprox::shared_sphere_grid(2 * n + margin);
    const fuzzyprox::GammaEstimates g = fuzzyprox::gamma_estimates(
        n, grid, family_size, fuzzyprox::derive_seed(seed, 0x9a000u + n));
    const double gamma = std::max(g.gamma_A, g.gamma_B);
    const auto report =
        fuzzyprox::verify_coherent_bridge(n, gamma, epsilon, family_size, seed, grid);
    std::printf("n             = %d\n", n);
    std::printf("gamma         = %.17g\n", report.gamma);
    std::printf("epsilon       = %.17g\n", report.epsilon);
    std::printf("family_size   = %d\n", report.family_size);
    std::printf("worst_gap     = %.17g\n", report.worst_gap);
    std::printf("forward hits  = %zu\n", report.forward_witnesses.size());
    std::printf("backward hits = %zu\n", report.backward_witnesses.size());
    std::printf("nondegenerate = %s\n", report.nondegenerate ? "yes" : "no");
    std::printf("passed        = %s\n", report.passed ? "yes" : "no");
    return report.passed && report.nondegenerate ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified proximity bounds between matrix algebra levels"};
    app.set_version_flag("--version", fuzzyprox::kVersionString);
    app.require_subcommand(1);

    fuzzyprox::SweepConfig config;
    std::vector<std::string> pair_specs;
    std::string format = "csv";
    CLI::App* sweep = app.add_subcommand("sweep", "Run a sweep and write a report");
    sweep->add_option("--n-min", config.n_min, "Smallest level")->required();
    sweep->add_option("--n-max", config.n_max, "Largest level")->required();
    sweep->add_option("--pairs", pair_specs, "Explicit m:n pairs")->delimiter(',');
    sweep->add_option("--seed", config.seed, "RNG seed");
    sweep->add_option("--family-size", config.family_size, "Family size per level");
    sweep->add_option("--samples", config.samples, "Sample states per side");
    sweep->add_option("--epsilon", config.epsilon, "Bridge verification tolerance");
    sweep->add_option("--margin", config.quadrature_margin, "Quadrature degree margin");
    sweep->add_option("--out", config.output_path, "Output path")->required();
    sweep->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    int level = 1;
    int family_size = 64;
    std::uint64_t seed = 1u;
    double epsilon = 0.05;
    int margin = 2;
    CLI::App* constants = app.add_subcommand("constants", "Print per-level constants");
    constants->add_option("--n", level, "Level")->required();
    constants->add_option("--family-size", family_size, "Family size");
    constants->add_option("--seed", seed, "RNG seed");
    constants->add_option("--margin", margin, "Quadrature degree margin");

    CLI::App* verify = app.add_subcommand("verify", "Verify the bridge at one level");
    verify->add_option("--n", level, "Level")->required();
    verify->add_option("--family-size", family_size, "Family size");
    verify->add_option("--seed", seed, "RNG seed");
    verify->add_option("--epsilon", epsilon, "Gap tolerance")->check(CLI::PositiveNumber);
    verify->add_option("--margin", margin, "Quadrature degree margin");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) {
            config.pairs = parse_pairs(pair_specs);
            config.format =
                format == "json" ? fuzzyprox::ReportFormat::json : fuzzyprox::ReportFormat::csv;
            return run_sweep_command(config);
        }
        if (constants->parsed())
            return run_constants_command(level, family_size, seed, margin);
        return run_verify_command(level, family_size, seed, epsilon, margin);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
