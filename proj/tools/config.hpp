#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lrg/quadratic.hpp"

namespace lrg::cli {

enum class ExperimentKind { VerifySamplers, MseCurve, LazyUpdate, WaterfillAudit };

const char* to_string(ExperimentKind kind);
std::optional<ExperimentKind> experiment_from_string(std::string_view name);

struct ProblemConfig {
    int m = 32;
    int n = 32;
    int o = 8;
    std::uint64_t seed = 0;
};

struct OptimizerConfig {
    int outer_iters = 100;
    int inner_steps = 10;
    double step_size = 1e-5;
    std::string schedule = "constant";  // constant | cosine | inv-sqrt
    int batch = 1;
};

/// Parsed and validated experiment description. Grids over c and r expand
/// into one experiment cell per (estimator, law, c, r) combination.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::MseCurve;
    std::uint64_t seed = 0;
    std::string output_dir = "results";
    ProblemConfig problem;
    std::vector<int> r_grid{8};
    std::vector<double> c_grid{1.0};
    std::vector<ProjectionLaw> laws{ProjectionLaw::HaarStiefel};
    std::vector<EstimatorKind> estimators{EstimatorKind::LowRankIpa};
    std::vector<int> sample_counts{1, 4, 16, 64, 256};
    int replications = 100;
    int draws = 100000;              // verify-samplers draw count
    int spectra = 100;               // waterfill-audit spectrum count
    std::string sigma_source = "exact";  // exact | warmup
    int warmup_samples = 256;
    double zo_sigma = 1e-3;
    OptimizerConfig optimizer;
    bool svg = true;
};

/// Load a config from a JSON file. Throws ConfigError with a field-level
/// diagnostic on parse or validation failure.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Collect every constraint violation without running anything; an empty
/// result means the config is runnable.
std::vector<std::string> validate_config_file(const std::filesystem::path& path);

/// Human-readable summary of the resolved grids (used by `validate`).
std::string describe(const ExperimentConfig& config);

}  // namespace lrg::cli
