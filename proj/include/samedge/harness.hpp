#pragma once

#include "samedge/dataset.hpp"
#include "samedge/objectives.hpp"
#include "samedge/optim.hpp"
#include "samedge/spectral.hpp"
#include "samedge/types.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace samedge {

enum class ObjectiveKind { quadratic, mlp };

/// What to train. A quadratic objective is generated from the run seed with
/// a log-uniform spectrum in [lambda_min, lambda_max]; an MLP objective
/// loads its dataset per `data` and starts from Glorot-initialized weights.
struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::mlp;
    // quadratic
    int dim = 8;
    double lambda_min = 1e-2;
    double lambda_max = 1e2;
    // mlp
    std::vector<int> widths;  // empty means input_dim-64-64-targets
    Activation activation = Activation::tanh;
    DatasetSpec data;
};

struct SpectralConfig {
    int k = 3;
    double tol = 1e-6;
    int period = 10;  // estimate every this many steps
    int max_iters = 200;
};

struct ExperimentConfig {
    ObjectiveSpec objective;
    OptimConfig optim;
    SpectralConfig spectral;
    std::uint64_t seed = 0;
    std::string log_path;
};

void validate(const ExperimentConfig& config);

/// One instrumented row. wall_s is a deterministic work-proportional clock
/// (weighted count of loss/gradient/HVP evaluations) so that identical
/// configs reproduce logs byte-for-byte; it is monotone in real compute.
struct StepRecord {
    long step = 0;
    double wall_s = 0.0;
    double loss = 0.0;
    double grad_norm = 0.0;
    double uphill_grad_norm = 0.0;
    Eigen::VectorXd lambda_mags;  // k entries, descending
    double gd_edge = 0.0;
    double sam_edge = 0.0;
    double align_iterate = 0.0;
    double align_uphill = 0.0;
    bool diverged = false;
    bool zero_grad = false;
    bool spectral_unconverged = false;
};

struct RunResult {
    std::vector<StepRecord> records;
    bool diverged = false;
};

/// Builds the objective and initial point for a config. Exposed so tests and
/// tools can look at exactly what run_experiment trains.
struct PreparedExperiment {
    std::shared_ptr<Objective> objective;
    ParamVector initial_point;
};
PreparedExperiment prepare_experiment(const ExperimentConfig& config);

/// Trains with sam_step (gd_step when rho = 0) for max_steps or until the
/// loss exceeds the divergence threshold or turns non-finite. A fully
/// populated record is appended every spectral.period steps, at the final
/// step, and when divergence is detected. When rho > 0 and |g| < 1e-12 the
/// SAM offset is skipped for that step (plain GD step) and the next record
/// carries the zero_grad flag.
RunResult run_experiment(const ExperimentConfig& config);

struct GridEntry {
    double eta = 0.0;
    double rho = 0.0;
    std::string log_name;
    std::string status;  // "ok", "diverged" or "error: ..."
};

struct GridResult {
    std::vector<GridEntry> entries;
    std::string manifest_path;
};

/// One run per (eta, rho) pair, each logged to
/// <out_dir>/eta<eta>_rho<rho>.csv, plus a manifest.csv listing every run
/// with its outcome. Per-run errors are recorded in the manifest without
/// aborting the rest of the grid.
GridResult run_grid(const ExperimentConfig& base, const std::vector<double>& etas,
                    const std::vector<double>& rhos, const std::string& out_dir);

/// Medians over the last quartile of records. Requires >= 10 records.
struct Summary {
    double median_lambda_edge_ratio = 0.0;  // |lambda_1| / sam_edge (gd_edge when rho = 0)
    double median_align_iterate = 0.0;
    double median_align_uphill = 0.0;
    double final_loss = 0.0;
    bool diverged = false;
};

Summary summarize(const std::vector<StepRecord>& records);

}  // namespace samedge
