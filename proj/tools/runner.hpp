#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "config.hpp"

namespace lrg::cli {

struct RunOptions {
    std::optional<std::string> output_dir;   // --out beats env beats config
    std::optional<std::uint64_t> seed;       // --seed override
    int threads = 0;                         // 0 = hardware concurrency
    bool svg_enabled = true;                 // --no-svg clears
};

struct RunArtifacts {
    std::filesystem::path output_dir;
    std::filesystem::path results_csv;
    std::filesystem::path manifest;
    int svg_count = 0;
    int row_count = 0;
};

/// Environment variable consulted for the output directory when --out is
/// absent.
inline constexpr const char* kOutputDirEnvVar = "LRG_OUT_DIR";

/// Run the configured experiment and write results.csv, run_manifest.json
/// and (for curve-like experiments) SVG charts into the output directory.
/// Throws ConfigError for configuration problems and Error (naming the
/// failing cell) for runtime failures.
RunArtifacts run_experiment(ExperimentConfig config, const RunOptions& options);

}  // namespace lrg::cli
