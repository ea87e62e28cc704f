#pragma once

// Experiment runner: grids of optimiser runs, heatmaps of best-error deltas,
// stability sweeps and CSV / gnuplot emission.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spectral_damp/data.hpp"
#include "spectral_damp/model.hpp"
#include "spectral_damp/optim.hpp"

namespace spectral_damp {

struct DatasetSpec {
    std::string name = "mnist";  // mnist | fashion | synthetic
    std::size_t n_train = 1000;
    std::size_t n_test = 10000;
    std::uint64_t seed = 0;
    int pool = 1;  // average-pooling factor for 28x28 images
    // synthetic only
    int synthetic_dim = 20;
    int synthetic_classes = 10;
    double synthetic_separation = 1.0;
};

struct ExperimentData {
    Dataset train;
    Dataset test;
};

ExperimentData load_experiment_data(const DatasetSpec& spec);

struct ExperimentSpec {
    std::string name = "experiment";
    DatasetSpec dataset;
    ModelSpec model;            // input_dim / num_classes are taken from the data
    OptimConfig optimizer;      // lr / damping / eta overridden per grid cell
    std::vector<double> lr_grid{0.01};
    std::vector<double> damping_grid{1e-3};
    std::vector<double> eta_grid{1.0};
    ScheduleSpec schedule;      // base_lr and total_epochs set per run
    long epochs = 500;
    std::vector<std::uint64_t> seeds;
    long trace_every = 10;      // epochs between Ritz / overlap samples
    std::size_t batch_size = 0; // 0: full batch

    // Auto-damping: each grid damping value is used as the floor delta*.
    bool auto_damp = false;
    double ema_coeff = 0.7;
    long update_interval = 100;
    bool strict_floor = true;
    std::size_t hvar_batch_size = 128;
    std::size_t hvar_probes = 8;

    void validate() const;
};

struct EpochRecord {
    long epoch = 0;
    double train_loss = 0.0, train_err = 0.0;
    double test_loss = 0.0, test_err = 0.0;
    double lr = 0.0, delta = 0.0;
    double r_est_curv = 0.0;
    double lambda_1 = 0.0;
    double overlap_top10 = 0.0;
    bool diverged = false;
};

struct RunMetrics {
    std::string run_id;
    OptimizerKind kind = OptimizerKind::sgd;
    double lr = 0.0, delta = 0.0, eta = 1.0;
    std::uint64_t seed = 0;
    bool auto_damp = false;
    std::vector<EpochRecord> epochs;
    bool diverged = false;
    double wall_time = 0.0;  // seconds, not serialised

    const EpochRecord& final_record() const { return epochs.back(); }
    /// First epoch whose train error is <= threshold.
    std::optional<long> epochs_to_train_error(double threshold) const;
};

/// One RunMetrics per (lr, delta, eta) cell and seed, in grid order.
/// Cells run on up to `threads` workers; results are independent of the count.
std::vector<RunMetrics> run_experiment(const ExperimentSpec& spec, const ExperimentData& data,
                                       unsigned threads = 1);

/// Single run of one grid cell.
RunMetrics run_cell(const ExperimentSpec& spec, const ExperimentData& data, double lr, double delta, double eta,
                    std::uint64_t seed);

struct HeatmapCell {
    double delta = 0.0, eta = 1.0;
    double best_train = 0.0, best_test = 0.0;  // best-epoch error, averaged over seeds
    double d_train = 0.0, d_test = 0.0;        // minus the best over all cells
};

/// Cells keyed by (delta, eta) in first-seen order.
std::vector<HeatmapCell> heatmap_deltas(const std::vector<RunMetrics>& metrics);

struct StabilityResult {
    std::optional<double> largest_stable;
    std::vector<std::pair<double, bool>> outcomes;  // (alpha, diverged)
};

/// Largest grid value for which `diverges(alpha)` is false. Grid must be
/// non-empty and ascending.
StabilityResult stability_sweep(const std::function<bool(double)>& diverges, const std::vector<double>& grid);

/// GD on 1/2 w^T H w. Diverged when the loss turns non-finite or the
/// iteration stops contracting: loss(T) >= loss(T/2) while not yet converged.
bool quadratic_gd_diverges(const SymMatrix& h, const ParamVector& w0, double lr, long steps);

/// Preconditioned GD w <- w - lr Phi (eta + delta)^{-1} Phi^T H w with the
/// same divergence test.
bool preconditioned_quadratic_diverges(const SymMatrix& h, const Vector& precond_eigs,
                                       const Matrix& precond_vectors, double delta, const ParamVector& w0,
                                       double lr, long steps);

/// Runs `config` for `steps` full-batch steps on `model`; diverged on a
/// DivergenceError / non-finite loss or when the final loss exceeds the initial one.
bool model_run_diverges(const Model& model, const Dataset& batch, OptimConfig config, double lr, long steps,
                        std::uint64_t seed);

/// Column order: run_id,epoch,train_loss,train_err,test_loss,test_err,lr,delta,
/// r_est_curv,lambda_1,overlap_top10,diverged
void emit_csv(const std::vector<RunMetrics>& metrics, const std::filesystem::path& path);
std::vector<RunMetrics> read_metrics_csv(const std::filesystem::path& path);

/// gnuplot script drawing train/test error curves and damping traces from `csv_path`.
void emit_plot_script(const std::vector<RunMetrics>& metrics, const std::filesystem::path& csv_path,
                      const std::filesystem::path& script_path);

/// Column order: delta,eta,d_train,d_test
void emit_heatmap_csv(const std::vector<HeatmapCell>& cells, const std::filesystem::path& path);

/// Two gnuplot matrix blocks (train, then test): one row per eta, one column per delta.
void emit_heatmap_matrix(const std::vector<HeatmapCell>& cells, const std::filesystem::path& path);

}  // namespace spectral_damp
