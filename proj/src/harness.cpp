#include "samedge/harness.hpp"

#include "samedge/log_io.hpp"
#include "samedge/rng.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

namespace samedge {

namespace {

// Decorates an objective with a deterministic work clock: evaluations are
// weighted by their relative cost (loss 1, gradient 2, HVP 4). Logging this
// instead of real time keeps reruns byte-identical.
class CountingObjective final : public Objective {
  public:
    explicit CountingObjective(std::shared_ptr<Objective> inner) : inner_(std::move(inner)) {}

    Eigen::Index dim() const override { return inner_->dim(); }
    double loss(const ParamVector& w) const override {
        units_ += 1;
        return inner_->loss(w);
    }
    GradientInfo gradient(const ParamVector& w) const override {
        units_ += 2;
        return inner_->gradient(w);
    }
    ParamVector hvp(const ParamVector& w, const ParamVector& v) const override {
        units_ += 4;
        return inner_->hvp(w, v);
    }
    double work_seconds() const { return 1e-3 * static_cast<double>(units_); }

  private:
    std::shared_ptr<Objective> inner_;
    mutable long long units_ = 0;  // runs are sequential
};

constexpr double kZeroGradThreshold = 1e-12;

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

void validate(const ExperimentConfig& config) {
    validate(config.optim);
    if (config.spectral.k < 1) throw ConfigError("spectral.k must be >= 1");
    if (!(config.spectral.tol > 0.0)) throw ConfigError("spectral.tol must be > 0");
    if (config.spectral.period < 1) throw ConfigError("spectral.period must be >= 1");
    if (config.spectral.max_iters <= config.spectral.k) {
        throw ConfigError("spectral.max_iters must exceed spectral.k");
    }
    if (config.objective.kind == ObjectiveKind::quadratic) {
        if (config.objective.dim < 1) throw ConfigError("objective.dim must be >= 1");
        if (!(config.objective.lambda_min > 0.0) ||
            !(config.objective.lambda_max >= config.objective.lambda_min)) {
            throw ConfigError("objective.lambda_min/lambda_max must satisfy 0 < min <= max");
        }
    } else {
        validate(config.objective.data);
        for (int width : config.objective.widths) {
            if (width < 1) throw ConfigError("objective.widths entries must be >= 1");
        }
        if (!config.objective.widths.empty() && config.objective.widths.size() < 2) {
            throw ConfigError("objective.widths needs at least input and output sizes");
        }
    }
}

PreparedExperiment prepare_experiment(const ExperimentConfig& config) {
    validate(config);
    PreparedExperiment prep;
    if (config.objective.kind == ObjectiveKind::quadratic) {
        Rng rng(mix_seed(config.seed, 1));
        const int d = config.objective.dim;
        Eigen::MatrixXd gauss(d, d);
        for (Eigen::Index i = 0; i < gauss.size(); ++i) gauss.data()[i] = rng.normal();
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();
        Eigen::VectorXd lam(d);
        for (int i = 0; i < d; ++i) {
            lam[i] = rng.log_uniform(config.objective.lambda_min, config.objective.lambda_max);
        }
        const Eigen::MatrixXd h = q * lam.asDiagonal() * q.transpose();
        prep.objective = std::make_shared<QuadraticModel>(h);
        prep.initial_point = rng.normal_vector(d) / std::sqrt(static_cast<double>(d));
    } else {
        const Dataset data = load_dataset(config.objective.data, mix_seed(config.seed, 2));
        std::vector<int> widths = config.objective.widths;
        const int p = static_cast<int>(data.inputs.cols());
        const int q_out = static_cast<int>(data.targets.cols());
        if (widths.empty()) widths = {p, 64, 64, q_out};
        if (widths.front() != p) {
            throw ConfigError("objective.widths front (" + std::to_string(widths.front()) +
                              ") does not match input dimension " + std::to_string(p));
        }
        if (widths.back() != q_out) {
            throw ConfigError("objective.widths back (" + std::to_string(widths.back()) +
                              ") does not match target dimension " + std::to_string(q_out));
        }
        prep.objective = std::make_shared<MlpModel>(widths, config.objective.activation,
                                                    data.inputs, data.targets);
        prep.initial_point = glorot_init(widths, mix_seed(config.seed, 3));
    }
    return prep;
}

RunResult run_experiment(const ExperimentConfig& config) {
    const PreparedExperiment prep = prepare_experiment(config);
    const CountingObjective objective(prep.objective);
    const OptimConfig& optim = config.optim;
    const SpectralConfig& spectral = config.spectral;
    const std::uint64_t spectral_seed = mix_seed(config.seed, 4);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    RunResult result;
    ParamVector w = prep.initial_point;

    const double initial_loss = objective.loss(w);
    const double threshold = optim.divergence_threshold.value_or(
        initial_loss > 0.0 && std::isfinite(initial_loss) ? 1e6 * initial_loss : 1e6);

    bool pending_zero_grad = false;
    for (long t = 0;; ++t) {
        const bool finite_params = w.allFinite();
        const double loss = t == 0 ? initial_loss : (finite_params ? objective.loss(w) : nan);
        const bool diverged = !std::isfinite(loss) || loss > threshold || !finite_params;
        const bool last = diverged || t >= optim.max_steps;

        std::optional<GradientInfo> g;
        if (finite_params) g = objective.gradient(w);

        if (t % spectral.period == 0 || last) {
            StepRecord r;
            r.step = t;
            r.loss = loss;
            r.diverged = diverged;
            r.zero_grad = pending_zero_grad;
            r.gd_edge = gd_edge(optim.eta);
            if (g && g->grad.allFinite()) {
                r.grad_norm = g->norm;
                SpectralOptions opts{spectral.k, spectral.tol, spectral.max_iters,
                                     mix_seed(spectral_seed, static_cast<std::uint64_t>(t))};
                const SpectralEstimate estimate = top_k_eigs(objective, w, opts);
                r.lambda_mags = estimate.eigenvalues.cwiseAbs();
                r.spectral_unconverged = !estimate.converged;
                const ParamVector& v1 = estimate.eigenvectors.front();
                r.align_iterate = g->norm > 0.0 ? alignment(g->grad, v1) : nan;
                if (optim.rho > 0.0 && g->norm >= kZeroGradThreshold) {
                    const GradientInfo uphill =
                        objective.gradient(w + (optim.rho / g->norm) * g->grad);
                    r.uphill_grad_norm = uphill.norm;
                    r.align_uphill =
                        uphill.norm > 0.0 ? alignment(uphill.grad, v1) : nan;
                } else {
                    r.uphill_grad_norm = r.grad_norm;
                    r.align_uphill = r.align_iterate;
                    if (optim.rho > 0.0) r.zero_grad = true;
                }
                r.sam_edge = optim.rho > 0.0
                                 ? (g->norm > 0.0 ? sam_edge(optim.eta, optim.rho, g->norm) : 0.0)
                                 : r.gd_edge;
            } else {
                r.grad_norm = nan;
                r.uphill_grad_norm = nan;
                r.lambda_mags = Eigen::VectorXd::Constant(spectral.k, nan);
                r.sam_edge = nan;
                r.align_iterate = nan;
                r.align_uphill = nan;
            }
            r.wall_s = objective.work_seconds();
            result.records.push_back(std::move(r));
            pending_zero_grad = false;
        }

        if (last) {
            result.diverged = diverged;
            break;
        }

        if (optim.rho > 0.0 && g->norm < kZeroGradThreshold) {
            // Eq.-style SAM update is undefined here; fall back to plain GD
            // for this step and flag the next record.
            w = gd_step_with_grad(w, *g, optim);
            pending_zero_grad = true;
        } else if (optim.rho > 0.0) {
            w = sam_step_with_grad(objective, w, *g, optim);
        } else {
            w = gd_step_with_grad(w, *g, optim);
        }
    }
    return result;
}

GridResult run_grid(const ExperimentConfig& base, const std::vector<double>& etas,
                    const std::vector<double>& rhos, const std::string& out_dir) {
    if (etas.empty()) throw ConfigError("run_grid: eta list must be nonempty");
    if (rhos.empty()) throw ConfigError("run_grid: rho list must be nonempty");
    std::filesystem::create_directories(out_dir);

    GridResult grid;
    for (const double eta : etas) {
        for (const double rho : rhos) {
            GridEntry entry;
            entry.eta = eta;
            entry.rho = rho;
            entry.log_name = "eta" + short_number(eta) + "_rho" + short_number(rho) + ".csv";
            ExperimentConfig config = base;
            config.optim.eta = eta;
            config.optim.rho = rho;
            config.log_path = (std::filesystem::path(out_dir) / entry.log_name).string();
            try {
                const RunResult result = run_experiment(config);
                write_log(config.log_path, result.records, config.spectral.k);
                entry.status = result.diverged ? "diverged" : "ok";
            } catch (const std::exception& e) {
                std::string what = e.what();
                for (char& c : what) {
                    if (c == ',' || c == '\n') c = ';';
                }
                entry.status = "error: " + what;
            }
            grid.entries.push_back(std::move(entry));
        }
    }

    const auto manifest = std::filesystem::path(out_dir) / "manifest.csv";
    std::ofstream out(manifest, std::ios::binary);
    if (!out) throw IoError("cannot write manifest: " + manifest.string());
    out << "eta,rho,log,status\n";
    for (const GridEntry& entry : grid.entries) {
        out << short_number(entry.eta) << ',' << short_number(entry.rho) << ',' << entry.log_name
            << ',' << entry.status << '\n';
    }
    grid.manifest_path = manifest.string();
    return grid;
}

namespace {

double median_of(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

Summary summarize(const std::vector<StepRecord>& records) {
    if (records.size() < 10) throw std::invalid_argument("summarize: need at least 10 records");
    const std::size_t count = std::max<std::size_t>(records.size() / 4, 1);
    std::vector<double> ratios, align_it, align_up;
    for (std::size_t i = records.size() - count; i < records.size(); ++i) {
        const StepRecord& r = records[i];
        if (r.lambda_mags.size() > 0 && std::isfinite(r.lambda_mags[0]) && r.sam_edge > 0.0 &&
            std::isfinite(r.sam_edge)) {
            ratios.push_back(r.lambda_mags[0] / r.sam_edge);
        }
        if (std::isfinite(r.align_iterate)) align_it.push_back(r.align_iterate);
        if (std::isfinite(r.align_uphill)) align_up.push_back(r.align_uphill);
    }
    Summary summary;
    summary.median_lambda_edge_ratio = median_of(std::move(ratios));
    summary.median_align_iterate = median_of(std::move(align_it));
    summary.median_align_uphill = median_of(std::move(align_up));
    summary.final_loss = records.back().loss;
    for (const StepRecord& r : records) summary.diverged = summary.diverged || r.diverged;
    return summary;
}

}  // namespace samedge
