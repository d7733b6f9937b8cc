#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "runner.hpp"

namespace {

int run_command(const std::string& config_path, const lrg::cli::RunOptions& opts) {
    lrg::cli::ExperimentConfig config;
    try {
        config = lrg::cli::load_config(config_path);
    } catch (const lrg::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    try {
        const lrg::cli::RunArtifacts artifacts =
            lrg::cli::run_experiment(config, opts);
        std::cout << "wrote " << artifacts.row_count << " rows to "
                  << artifacts.results_csv.string() << "\n";
        if (artifacts.svg_count > 0)
            std::cout << "wrote " << artifacts.svg_count << " charts to "
                      << artifacts.output_dir.string() << "\n";
        std::cout << "manifest: " << artifacts.manifest.string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return 2;
    }
}

int validate_command(const std::string& config_path) {
    const std::vector<std::string> violations =
        lrg::cli::validate_config_file(config_path);
    if (violations.empty()) {
        std::cout << "ok\n";
        std::cout << lrg::cli::describe(lrg::cli::load_config(config_path));
        return 0;
    }
    for (const auto& v : violations) std::cout << "invalid: " << v << "\n";
    return 0;  // diagnostics are the output
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Randomized low-rank gradient estimation lab"};
    app.require_subcommand(1);

    std::string config_path;
    lrg::cli::RunOptions opts;
    std::string out_dir;
    std::uint64_t seed_override = 0;
    bool no_svg = false;

    CLI::App* run = app.add_subcommand("run", "Run an experiment config");
    run->add_option("config", config_path, "Path to the experiment config (JSON)")
        ->required();
    CLI::Option* out_opt =
        run->add_option("--out", out_dir, "Output directory override");
    CLI::Option* seed_opt =
        run->add_option("--seed", seed_override, "Master seed override");
    run->add_option("--threads", opts.threads,
                    "Worker threads for experiment cells (0 = hardware)");
    run->add_flag("--no-svg", no_svg, "Skip SVG chart emission");

    CLI::App* validate = app.add_subcommand(
        "validate", "Check a config and print the resolved grids");
    validate->add_option("config", config_path, "Path to the experiment config")
        ->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        if (*out_opt) opts.output_dir = out_dir;
        if (*seed_opt) opts.seed = seed_override;
        opts.svg_enabled = !no_svg;
        return run_command(config_path, opts);
    }
    return validate_command(config_path);
}
