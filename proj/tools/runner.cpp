#include "runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "csv.hpp"
#include "lrg/lazy_descent.hpp"
#include "lrg/mse.hpp"
#include "svg.hpp"

namespace lrg::cli {

namespace {

using nlohmann::json;

struct ResultRow {
    std::string experiment_id;
    std::string estimator;
    std::string law;
    double c = 0.0;
    int r = 0;
    int n = 0;
    double mse = 0.0;
    double std_error = 0.0;
    std::optional<double> term_ipa_lr_var;
    std::optional<double> term_proj_var;
    std::optional<double> term_bias;
    std::optional<double> analytic_mse;
    std::uint64_t seed = 0;
};

std::string row_to_csv(const ResultRow& row) {
    return csv_join({row.experiment_id, row.estimator, row.law,
                     csv_number(row.c), std::to_string(row.r),
                     std::to_string(row.n), csv_number(row.mse),
                     csv_number(row.std_error), csv_number(row.term_ipa_lr_var),
                     csv_number(row.term_proj_var), csv_number(row.term_bias),
                     csv_number(row.analytic_mse), std::to_string(row.seed)});
}

constexpr const char* kCsvHeader =
    "experiment_id,estimator,law,c,r,N,mse,stderr,term_ipa_lr_var,"
    "term_proj_var,term_bias,analytic_mse,seed\r\n";

struct Cell {
    std::size_t index = 0;
    EstimatorKind estimator = EstimatorKind::LowRankIpa;
    bool has_estimator = false;
    ProjectionLaw law = ProjectionLaw::HaarStiefel;
    bool has_law = false;
    double c = 1.0;
    int r = 1;

    std::string describe() const {
        std::string out = "cell " + std::to_string(index);
        if (has_estimator) out += " estimator=" + std::string(lrg::to_string(estimator));
        if (has_law) out += " law=" + std::string(lrg::to_string(law));
        out += " c=" + csv_number(c) + " r=" + std::to_string(r);
        return out;
    }
};

struct CellOutput {
    std::vector<ResultRow> rows;
    // Curve points for chart assembly (per-law series).
    std::vector<double> xs;
    std::vector<double> ys;
};

/// Synthetic strictly positive spectrum for sampler audits: the dependent
/// law's first-moment behaviour is only observable when no direction sits
/// on the probability floor.
SpectralWeights audit_weights(int n, Rng& rng) {
    Vector sigma(n);
    for (int i = 0; i < n; ++i) {
        const double x = rng.gaussian();
        sigma(i) = x * x + 0.05;
    }
    std::sort(sigma.data(), sigma.data() + n, std::greater<double>());
    Matrix basis = thin_qr_signfix(rng.gaussian_matrix(n, n)).q;
    return {std::move(basis), std::move(sigma)};
}

Vector audit_spectrum(int n, Rng& rng) {
    Vector sigma(n);
    const int zeros = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    for (int i = 0; i < n; ++i) {
        const double x = rng.gaussian();
        sigma(i) = i < n - zeros ? x * x + 0.05 : 0.0;
    }
    std::sort(sigma.data(), sigma.data() + n, std::greater<double>());
    return sigma;
}

StepSchedule make_schedule(const OptimizerConfig& opt) {
    if (opt.schedule == "cosine")
        return cosine_steps(opt.step_size, opt.outer_iters);
    if (opt.schedule == "inv-sqrt") return inv_sqrt_steps(opt.step_size);
    return constant_steps(opt.step_size);
}

std::string format_double_compact(double v) { return csv_number(v); }

class Runner {
public:
    Runner(ExperimentConfig cfg, const RunOptions& opts)
        : cfg_(std::move(cfg)), opts_(opts) {
        if (opts.seed) cfg_.seed = *opts.seed;
        problem_ = default_problem(cfg_.problem.m, cfg_.problem.n, cfg_.problem.o,
                                   cfg_.problem.seed);
        // Evaluation point shared by every cell, tied to the problem seed.
        Rng wrng = Rng(cfg_.problem.seed).child(87);
        eval_point_ = wrng.gaussian_matrix(cfg_.problem.m, cfg_.problem.n) /
                      std::sqrt(static_cast<double>(cfg_.problem.n));
        zo_ = ZoConfig{cfg_.zo_sigma};
    }

    RunArtifacts run() {
        build_cells();
        outputs_.resize(cells_.size());
        run_cells();
        return write_artifacts();
    }

private:
    void build_cells() {
        const auto add = [&](Cell cell) {
            cell.index = cells_.size();
            cells_.push_back(cell);
        };
        switch (cfg_.experiment) {
            case ExperimentKind::MseCurve:
            case ExperimentKind::LazyUpdate:
                for (const auto est : cfg_.estimators)
                    for (const auto law : cfg_.laws)
                        for (const double c : cfg_.c_grid)
                            for (const int r : cfg_.r_grid)
                                add({0, est, true, law, true, c, r});
                break;
            case ExperimentKind::VerifySamplers:
                for (const auto law : cfg_.laws)
                    for (const double c : cfg_.c_grid)
                        for (const int r : cfg_.r_grid)
                            add({0, {}, false, law, true, c, r});
                break;
            case ExperimentKind::WaterfillAudit:
                for (const double c : cfg_.c_grid)
                    for (const int r : cfg_.r_grid)
                        add({0, {}, false, {}, false, c, r});
                break;
        }
    }

    void run_cells() {
        const int requested = opts_.threads > 0
                                  ? opts_.threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
        const int workers = std::max(1, std::min<int>(requested,
                                                      static_cast<int>(cells_.size())));
        std::atomic<std::size_t> next{0};
        std::mutex error_mutex;
        std::optional<std::string> first_error;

        const auto work = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= cells_.size()) return;
                try {
                    outputs_[i] = compute_cell(cells_[i]);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error)
                        first_error = cells_[i].describe() + ": " + e.what();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
        if (first_error) throw Error(*first_error);
    }

    CellOutput compute_cell(const Cell& cell) {
        const Rng stream = Rng(cfg_.seed).child(cell.index);
        switch (cfg_.experiment) {
            case ExperimentKind::MseCurve: return curve_cell(cell, stream);
            case ExperimentKind::VerifySamplers: return verify_cell(cell, stream);
            case ExperimentKind::LazyUpdate: return descent_cell(cell, stream);
            case ExperimentKind::WaterfillAudit: return waterfill_cell(cell, stream);
        }
        throw Error("unknown experiment kind");
    }

    std::optional<SpectralWeights> dependent_weights(EstimatorKind estimator,
                                                     const Rng& stream) const {
        const EstimatorKind family = base_family(estimator);
        Matrix sigma_xi;
        if (cfg_.sigma_source == "warmup") {
            Rng warmup_rng = stream.child(0xAA);
            sigma_xi = estimate_sigma_xi(problem_, eval_point_, family,
                                         cfg_.warmup_samples, warmup_rng, zo_);
        } else {
            sigma_xi = sigma_xi_exact(problem_, eval_point_, family);
        }
        return spectral_weights_from_matrix(sigma_xi +
                                            sigma_theta(problem_, eval_point_));
    }

    CellOutput curve_cell(const Cell& cell, const Rng& stream) {
        const ProjectionSpec spec{cfg_.problem.n, cell.r, cell.c};
        std::optional<SpectralWeights> weights;
        if (is_low_rank(cell.estimator) &&
            cell.law == ProjectionLaw::InstanceDependent)
            weights = dependent_weights(cell.estimator, stream);

        const MseCurve curve = mc_mse_curve(
            problem_, eval_point_, cell.estimator, cell.law, spec,
            cfg_.sample_counts, cfg_.replications, stream.child(1),
            weights ? &*weights : nullptr, zo_);

        // Analytic one-shot values where the closed forms exist.
        const Matrix sxi_ipa =
            sigma_xi_exact(problem_, eval_point_, EstimatorKind::Ipa);
        const Matrix sth = sigma_theta(problem_, eval_point_);
        std::optional<double> t1, t2, t3, one_shot;
        const double bias =
            (1.0 - cell.c) * (1.0 - cell.c) * sth.trace();
        switch (cell.estimator) {
            case EstimatorKind::Ipa:
                t1 = sxi_ipa.trace();
                t2 = 0.0;
                t3 = 0.0;
                one_shot = *t1;
                break;
            case EstimatorKind::Lr2pt:
                t1 = sigma_xi_exact(problem_, eval_point_, EstimatorKind::Lr2pt)
                         .trace();
                t2 = 0.0;
                t3 = 0.0;
                one_shot = *t1;
                break;
            case EstimatorKind::LowRankIpa: {
                std::optional<SpectralWeights> analytic_weights = weights;
                if (cell.law == ProjectionLaw::InstanceDependent &&
                    !analytic_weights)
                    analytic_weights = dependent_weights(cell.estimator, stream);
                const Matrix ep2 = analytic_second_moment(
                    cell.law, spec,
                    analytic_weights ? &*analytic_weights : nullptr);
                const MseBreakdown b = mse_decomposition(sxi_ipa, sth, ep2, cell.c);
                t1 = b.ipa_lr_variance;
                t2 = b.projection_variance;
                t3 = b.scalar_bias;
                one_shot = b.total;
                break;
            }
            case EstimatorKind::LowRankLr2pt:
                // Closed form only under per-draw orthogonal frames; the
                // gaussian and dependent laws have no matching expression
                // because the perturbation dimension is coupled to V.
                if (cell.law == ProjectionLaw::HaarStiefel ||
                    cell.law == ProjectionLaw::CoordinateAxis) {
                    const double tr_sigma_g = sxi_ipa.trace() + sth.trace();
                    one_shot = cell.c * cell.c * cfg_.problem.n *
                                   (problem_.m + 2.0 / cell.r) * tr_sigma_g +
                               (1.0 - 2.0 * cell.c) * sth.trace();
                }
                break;
        }

        CellOutput out;
        for (std::size_t i = 0; i < curve.sample_counts.size(); ++i) {
            ResultRow row;
            row.experiment_id = "mse-curve";
            row.estimator = lrg::to_string(cell.estimator);
            row.law = lrg::to_string(cell.law);
            row.c = cell.c;
            row.r = cell.r;
            row.n = curve.sample_counts[i];
            row.mse = curve.mse[i];
            row.std_error = curve.std_error[i];
            row.term_ipa_lr_var = t1;
            row.term_proj_var = t2;
            row.term_bias = t3;
            if (one_shot)
                row.analytic_mse = (*one_shot - bias) / curve.sample_counts[i] + bias;
            row.seed = stream.seed();
            out.rows.push_back(row);
            out.xs.push_back(static_cast<double>(curve.sample_counts[i]));
            out.ys.push_back(curve.mse[i]);
        }
        return out;
    }

    CellOutput verify_cell(const Cell& cell, const Rng& stream) {
        const ProjectionSpec spec{cfg_.problem.n, cell.r, cell.c};
        Rng rng = stream.child(1);
        Rng weights_rng = stream.child(2);
        const SpectralWeights weights = audit_weights(cfg_.problem.n, weights_rng);
        std::optional<InclusionPlan> plan;
        if (cell.law == ProjectionLaw::InstanceDependent)
            plan = compute_inclusion_plan(weights.sigma, cell.r, cell.c);

        Matrix mean = Matrix::Zero(spec.n, spec.n);
        double trace_second = 0.0;
        double frame_err = 0.0;
        for (int i = 0; i < cfg_.draws; ++i) {
            const ProjectionSample sample =
                sample_projection(spec, cell.law, &weights, rng);
            mean += sample.projector();
            const Matrix gram = sample.v.transpose() * sample.v;
            trace_second += gram.squaredNorm();
            if (cell.law == ProjectionLaw::HaarStiefel ||
                cell.law == ProjectionLaw::CoordinateAxis) {
                const Matrix target =
                    (cell.c * spec.n / cell.r) * Matrix::Identity(cell.r, cell.r);
                frame_err = std::max(frame_err,
                                     (gram - target).cwiseAbs().maxCoeff());
            } else if (cell.law == ProjectionLaw::InstanceDependent) {
                Matrix target = Matrix::Zero(cell.r, cell.r);
                for (int k = 0; k < cell.r; ++k)
                    target(k, k) = plan->mu_weights((*sample.selected_indices)[k]);
                frame_err = std::max(frame_err,
                                     (gram - target).cwiseAbs().maxCoeff());
            }
        }
        mean /= cfg_.draws;
        trace_second /= cfg_.draws;

        const double mean_dev =
            (mean - cell.c * Matrix::Identity(spec.n, spec.n)).cwiseAbs().maxCoeff();
        const double analytic_trace =
            analytic_second_moment(cell.law, spec, &weights).trace();

        CellOutput out;
        const auto make_row = [&](const std::string& id, double value,
                                  std::optional<double> analytic) {
            ResultRow row;
            row.experiment_id = id;
            row.law = lrg::to_string(cell.law);
            row.c = cell.c;
            row.r = cell.r;
            row.n = cfg_.draws;
            row.mse = value;
            row.std_error = 0.0;
            row.analytic_mse = analytic;
            row.seed = stream.seed();
            return row;
        };
        out.rows.push_back(make_row("mean-isotropy", mean_dev, 0.0));
        out.rows.push_back(
            make_row("second-moment-trace", trace_second, analytic_trace));
        if (cell.law != ProjectionLaw::Gaussian)
            out.rows.push_back(make_row("frame-gram", frame_err, 0.0));
        return out;
    }

    CellOutput descent_cell(const Cell& cell, const Rng& stream) {
        LazyUpdateConfig run_cfg;
        run_cfg.outer_iters = cfg_.optimizer.outer_iters;
        run_cfg.inner_steps = cfg_.optimizer.inner_steps;
        run_cfg.step_size = make_schedule(cfg_.optimizer);
        run_cfg.law = cell.law;
        run_cfg.spec = {cfg_.problem.n, cell.r, cell.c};
        run_cfg.estimator = cell.estimator;
        run_cfg.zo = zo_;
        run_cfg.batch = cfg_.optimizer.batch;
        if (cell.law == ProjectionLaw::InstanceDependent)
            run_cfg.weights = dependent_weights(cell.estimator, stream);

        const TrainTrace trace =
            run_lazy_update(problem_, eval_point_, run_cfg, stream.child(1));
        const double f_star = objective_minimum(problem_);

        CellOutput out;
        for (const TraceRecord& rec : trace.records) {
            ResultRow row;
            row.experiment_id = "objective-gap";
            row.estimator = lrg::to_string(cell.estimator);
            row.law = lrg::to_string(cell.law);
            row.c = cell.c;
            row.r = cell.r;
            row.n = rec.outer;
            row.mse = rec.objective - f_star;
            row.std_error = 0.0;
            row.analytic_mse = f_star;
            row.seed = stream.seed();
            out.rows.push_back(row);
            out.xs.push_back(static_cast<double>(rec.outer + 1));
            out.ys.push_back(rec.objective - f_star);
        }
        ResultRow final_row = out.rows.back();
        final_row.experiment_id = "objective-final";
        final_row.n = cfg_.optimizer.outer_iters;
        final_row.mse = objective(problem_, trace.theta_final) - f_star;
        out.rows.push_back(final_row);
        return out;
    }

    CellOutput waterfill_cell(const Cell& cell, const Rng& stream) {
        CellOutput out;
        Rng rng = stream.child(1);
        const int n = cfg_.problem.n;
        for (int s = 0; s < cfg_.spectra; ++s) {
            Vector sigma = audit_spectrum(n, rng);
            if (sigma.maxCoeff() <= 0.0) sigma(0) = 1.0;
            const InclusionPlan plan = compute_inclusion_plan(sigma, cell.r, cell.c);

            // Fixed-point residual of the saturation structure.
            double residual = 0.0;
            const int t = plan.saturated;
            double tail = 0.0;
            for (int i = t; i < n; ++i) tail += std::sqrt(sigma(i));
            for (int i = 0; i < n; ++i) {
                double expected;
                if (i < t) {
                    expected = 1.0;
                } else if (tail > 0.0 && cell.r > t) {
                    expected = std::max((cell.r - t) * std::sqrt(sigma(i)) / tail,
                                        1e-12);
                } else if (cell.r > t) {
                    expected = static_cast<double>(cell.r - t) / (n - t);
                } else {
                    expected = 1e-12;
                }
                residual = std::max(residual, std::abs(plan.pi(i) - expected));
            }

            ResultRow consistency;
            consistency.experiment_id = "plan-consistency";
            consistency.c = cell.c;
            consistency.r = cell.r;
            consistency.n = s;
            consistency.mse = residual;
            consistency.std_error = std::abs(plan.pi.sum() - cell.r);
            consistency.analytic_mse = 0.0;
            consistency.seed = stream.seed();
            out.rows.push_back(consistency);

            ResultRow dominance = consistency;
            dominance.experiment_id = "phi-dominance";
            dominance.mse = phi_min(plan, sigma, cell.c);
            dominance.std_error = 0.0;
            dominance.analytic_mse =
                cell.c * cell.c * n / cell.r * sigma.sum();
            out.rows.push_back(dominance);
        }
        return out;
    }

    RunArtifacts write_artifacts() {
        namespace fs = std::filesystem;
        std::string out_dir = cfg_.output_dir;
        if (const char* env = std::getenv(kOutputDirEnvVar); env && *env)
            out_dir = env;
        if (opts_.output_dir) out_dir = *opts_.output_dir;

        RunArtifacts artifacts;
        artifacts.output_dir = fs::path(out_dir);
        fs::create_directories(artifacts.output_dir);

        artifacts.results_csv = artifacts.output_dir / "results.csv";
        {
            std::ofstream csv(artifacts.results_csv, std::ios::binary);
            csv << kCsvHeader;
            for (const CellOutput& output : outputs_)
                for (const ResultRow& row : output.rows) {
                    csv << row_to_csv(row);
                    ++artifacts.row_count;
                }
        }

        if (opts_.svg_enabled && cfg_.svg &&
            (cfg_.experiment == ExperimentKind::MseCurve ||
             cfg_.experiment == ExperimentKind::LazyUpdate))
            artifacts.svg_count = write_charts(artifacts.output_dir);

        artifacts.manifest = artifacts.output_dir / "run_manifest.json";
        write_manifest(artifacts);
        return artifacts;
    }

    int write_charts(const std::filesystem::path& dir) {
        // One panel per (estimator, c, r); one series per law.
        std::map<std::string, ChartSpec> charts;
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            const Cell& cell = cells_[i];
            if (outputs_[i].xs.empty()) continue;
            const std::string key = std::string(lrg::to_string(cell.estimator)) +
                                    "_c" + format_double_compact(cell.c) + "_r" +
                                    std::to_string(cell.r);
            ChartSpec& chart = charts[key];
            if (chart.series.empty()) {
                const bool curve = cfg_.experiment == ExperimentKind::MseCurve;
                chart.title = std::string(to_string(cfg_.experiment)) + "  " +
                              lrg::to_string(cell.estimator) +
                              "  c=" + format_double_compact(cell.c) +
                              "  r=" + std::to_string(cell.r);
                chart.x_label = curve ? "samples" : "outer iteration";
                chart.y_label = curve ? "MSE" : "objective gap";
                chart.log_x = curve;
                chart.log_y = true;
            }
            ChartSeries series;
            series.label = lrg::to_string(cell.law);
            series.color = law_color(series.label);
            series.x = outputs_[i].xs;
            series.y = outputs_[i].ys;
            chart.series.push_back(std::move(series));
        }
        int count = 0;
        for (const auto& [key, chart] : charts) {
            const std::string name =
                std::string(to_string(cfg_.experiment)) + "_" + key + ".svg";
            std::ofstream svg(dir / name, std::ios::binary);
            svg << render_chart(chart);
            ++count;
        }
        return count;
    }

    void write_manifest(const RunArtifacts& artifacts) {
        json manifest;
        manifest["tool"] = "lrg";
        manifest["version"] = "0.1.0";
        manifest["experiment"] = to_string(cfg_.experiment);
        manifest["seed"] = cfg_.seed;
        manifest["threads"] = opts_.threads;
        manifest["rows"] = artifacts.row_count;
        manifest["svg_charts"] = artifacts.svg_count;

        json resolved;
        resolved["problem"] = {{"m", cfg_.problem.m},
                               {"n", cfg_.problem.n},
                               {"o", cfg_.problem.o},
                               {"seed", cfg_.problem.seed}};
        resolved["projection"] = {{"r", cfg_.r_grid}, {"c", cfg_.c_grid}};
        json laws = json::array();
        for (const auto law : cfg_.laws) laws.push_back(lrg::to_string(law));
        resolved["laws"] = laws;
        json estimators = json::array();
        for (const auto est : cfg_.estimators)
            estimators.push_back(lrg::to_string(est));
        resolved["estimators"] = estimators;
        resolved["sample_counts"] = cfg_.sample_counts;
        resolved["replications"] = cfg_.replications;
        resolved["draws"] = cfg_.draws;
        resolved["spectra"] = cfg_.spectra;
        resolved["sigma_source"] = cfg_.sigma_source;
        resolved["warmup_samples"] = cfg_.warmup_samples;
        resolved["zo_sigma"] = cfg_.zo_sigma;
        resolved["optimizer"] = {{"outer_iters", cfg_.optimizer.outer_iters},
                                 {"inner_steps", cfg_.optimizer.inner_steps},
                                 {"step_size", cfg_.optimizer.step_size},
                                 {"schedule", cfg_.optimizer.schedule},
                                 {"batch", cfg_.optimizer.batch}};
        manifest["resolved_config"] = resolved;

        // The single nondeterministic field.
        const auto now = std::chrono::system_clock::now();
        const std::time_t stamp = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&stamp));
        manifest["generated_at"] = buf;

        std::ofstream file(artifacts.manifest, std::ios::binary);
        file << manifest.dump(2) << "\n";
    }

    ExperimentConfig cfg_;
    RunOptions opts_;
    QuadraticProblem problem_;
    Matrix eval_point_;
    ZoConfig zo_;
    std::vector<Cell> cells_;
    std::vector<CellOutput> outputs_;
};

}  // namespace

RunArtifacts run_experiment(ExperimentConfig config, const RunOptions& options) {
    Runner runner(std::move(config), options);
    return runner.run();
}

}  // namespace lrg::cli
