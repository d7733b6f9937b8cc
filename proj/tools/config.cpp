#include "config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lrg::cli {

using nlohmann::json;

const char* to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::VerifySamplers: return "verify-samplers";
        case ExperimentKind::MseCurve: return "mse-curve";
        case ExperimentKind::LazyUpdate: return "lazy-update";
        case ExperimentKind::WaterfillAudit: return "waterfill-audit";
    }
    return "unknown";
}

std::optional<ExperimentKind> experiment_from_string(std::string_view name) {
    if (name == "verify-samplers") return ExperimentKind::VerifySamplers;
    if (name == "mse-curve") return ExperimentKind::MseCurve;
    if (name == "lazy-update") return ExperimentKind::LazyUpdate;
    if (name == "waterfill-audit") return ExperimentKind::WaterfillAudit;
    return std::nullopt;
}

namespace {

json parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path.string() + ": " +
                          e.what());
    }
}

template <typename T>
std::vector<T> scalar_or_array(const json& node, const std::string& field) {
    std::vector<T> out;
    try {
        if (node.is_array())
            out = node.get<std::vector<T>>();
        else
            out.push_back(node.get<T>());
    } catch (const json::exception&) {
        throw ConfigError("field '" + field + "': expected scalar or array");
    }
    return out;
}

ExperimentConfig from_json(const json& root) {
    ExperimentConfig cfg;
    if (!root.is_object())
        throw ConfigError("config root must be an object");
    if (!root.contains("experiment"))
        throw ConfigError("missing required field 'experiment'");
    const auto kind = experiment_from_string(root["experiment"].get<std::string>());
    if (!kind)
        throw ConfigError("field 'experiment': unknown kind '" +
                          root["experiment"].get<std::string>() + "'");
    cfg.experiment = *kind;

    cfg.seed = root.value("seed", std::uint64_t{0});
    cfg.output_dir = root.value("output_dir", std::string{"results"});

    if (root.contains("problem")) {
        const json& p = root["problem"];
        cfg.problem.m = p.value("m", cfg.problem.m);
        cfg.problem.n = p.value("n", cfg.problem.n);
        cfg.problem.o = p.value("o", cfg.problem.o);
        cfg.problem.seed = p.value("seed", cfg.problem.seed);
    }
    if (root.contains("projection")) {
        const json& pr = root["projection"];
        if (pr.contains("r")) cfg.r_grid = scalar_or_array<int>(pr["r"], "projection.r");
        if (pr.contains("c"))
            cfg.c_grid = scalar_or_array<double>(pr["c"], "projection.c");
    }
    if (root.contains("laws")) {
        cfg.laws.clear();
        for (const auto& item : root["laws"]) {
            const auto law = law_from_string(item.get<std::string>());
            if (!law)
                throw ConfigError("field 'laws': unknown law '" +
                                  item.get<std::string>() + "'");
            cfg.laws.push_back(*law);
        }
    }
    if (root.contains("estimators")) {
        cfg.estimators.clear();
        for (const auto& item : root["estimators"]) {
            const auto est = estimator_from_string(item.get<std::string>());
            if (!est)
                throw ConfigError("field 'estimators': unknown estimator '" +
                                  item.get<std::string>() + "'");
            cfg.estimators.push_back(*est);
        }
    }
    if (root.contains("sample_counts"))
        cfg.sample_counts = root["sample_counts"].get<std::vector<int>>();
    cfg.replications = root.value("replications", cfg.replications);
    cfg.draws = root.value("draws", cfg.draws);
    cfg.spectra = root.value("spectra", cfg.spectra);
    cfg.sigma_source = root.value("sigma_source", cfg.sigma_source);
    cfg.warmup_samples = root.value("warmup_samples", cfg.warmup_samples);
    cfg.zo_sigma = root.value("zo_sigma", cfg.zo_sigma);
    cfg.svg = root.value("svg", cfg.svg);

    if (root.contains("optimizer")) {
        const json& opt = root["optimizer"];
        cfg.optimizer.outer_iters = opt.value("outer_iters", cfg.optimizer.outer_iters);
        cfg.optimizer.inner_steps = opt.value("inner_steps", cfg.optimizer.inner_steps);
        cfg.optimizer.step_size = opt.value("step_size", cfg.optimizer.step_size);
        cfg.optimizer.schedule = opt.value("schedule", cfg.optimizer.schedule);
        cfg.optimizer.batch = opt.value("batch", cfg.optimizer.batch);
    }
    return cfg;
}

void collect_violations(const ExperimentConfig& cfg,
                        std::vector<std::string>& out) {
    const auto complain = [&](const std::string& msg) { out.push_back(msg); };

    if (cfg.problem.m < 1 || cfg.problem.n < 1 || cfg.problem.o < 1)
        complain("problem.m, problem.n, problem.o must be positive");
    if (cfg.r_grid.empty()) complain("projection.r grid must be nonempty");
    for (const int r : cfg.r_grid) {
        if (r < 1)
            complain("projection.r = " + std::to_string(r) + " must be >= 1");
        else if (r > cfg.problem.n)
            complain("projection.r = " + std::to_string(r) +
                     " exceeds problem.n = " + std::to_string(cfg.problem.n));
    }
    if (cfg.c_grid.empty()) complain("projection.c grid must be nonempty");
    for (const double c : cfg.c_grid)
        if (!(c > 0.0)) complain("c must be positive, got " + std::to_string(c));
    if (cfg.laws.empty()) complain("laws list must be nonempty");
    if (cfg.estimators.empty()) complain("estimators list must be nonempty");

    if (cfg.experiment == ExperimentKind::MseCurve) {
        if (cfg.sample_counts.empty())
            complain("sample_counts must be nonempty");
        for (std::size_t i = 0; i < cfg.sample_counts.size(); ++i) {
            if (cfg.sample_counts[i] < 1)
                complain("sample_counts entries must be >= 1");
            else if (i > 0 && cfg.sample_counts[i] <= cfg.sample_counts[i - 1])
                complain("sample_counts must be strictly ascending");
        }
        if (cfg.replications < 30)
            complain("replications must be >= 30, got " +
                     std::to_string(cfg.replications));
    }
    if (cfg.experiment == ExperimentKind::VerifySamplers && cfg.draws < 1)
        complain("draws must be >= 1");
    if (cfg.experiment == ExperimentKind::WaterfillAudit && cfg.spectra < 1)
        complain("spectra must be >= 1");
    if (cfg.sigma_source != "exact" && cfg.sigma_source != "warmup")
        complain("sigma_source must be 'exact' or 'warmup', got '" +
                 cfg.sigma_source + "'");
    if (cfg.warmup_samples < 2) complain("warmup_samples must be >= 2");
    if (!(cfg.zo_sigma > 0.0)) complain("zo_sigma must be positive");

    if (cfg.experiment == ExperimentKind::LazyUpdate) {
        for (const auto est : cfg.estimators)
            if (is_low_rank(est))
                complain(std::string("lazy-update estimators name the inner rule; use "
                                     "ipa or lr2pt, got ") + lrg::to_string(est));
        if (cfg.optimizer.outer_iters < 1) complain("optimizer.outer_iters must be >= 1");
        if (cfg.optimizer.inner_steps < 1) complain("optimizer.inner_steps must be >= 1");
        if (!(cfg.optimizer.step_size > 0.0)) complain("optimizer.step_size must be positive");
        if (cfg.optimizer.batch < 1) complain("optimizer.batch must be >= 1");
        if (cfg.optimizer.schedule != "constant" && cfg.optimizer.schedule != "cosine" &&
            cfg.optimizer.schedule != "inv-sqrt")
            complain("optimizer.schedule must be constant, cosine or inv-sqrt");
    }
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
    const ExperimentConfig cfg = from_json(parse_file(path));
    std::vector<std::string> violations;
    collect_violations(cfg, violations);
    if (!violations.empty()) {
        std::ostringstream msg;
        msg << "invalid config " << path.string() << ":";
        for (const auto& v : violations) msg << "\n  - " << v;
        throw ConfigError(msg.str());
    }
    return cfg;
}

std::vector<std::string> validate_config_file(const std::filesystem::path& path) {
    std::vector<std::string> violations;
    try {
        const ExperimentConfig cfg = from_json(parse_file(path));
        collect_violations(cfg, violations);
    } catch (const ConfigError& e) {
        violations.push_back(e.what());
    }
    return violations;
}

std::string describe(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "experiment: " << to_string(cfg.experiment) << "\n"
        << "problem: m=" << cfg.problem.m << " n=" << cfg.problem.n
        << " o=" << cfg.problem.o << " seed=" << cfg.problem.seed << "\n"
        << "seed: " << cfg.seed << "\n";
    out << "r grid:";
    for (const int r : cfg.r_grid) out << " " << r;
    out << "\nc grid:";
    for (const double c : cfg.c_grid) out << " " << c;
    out << "\nlaws:";
    for (const auto law : cfg.laws) out << " " << lrg::to_string(law);
    out << "\nestimators:";
    for (const auto est : cfg.estimators) out << " " << lrg::to_string(est);
    out << "\ncells: "
        << cfg.laws.size() * cfg.estimators.size() * cfg.c_grid.size() *
               cfg.r_grid.size()
        << "\n";
    return out.str();
}

}  // namespace lrg::cli
