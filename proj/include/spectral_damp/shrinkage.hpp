#pragma once

// Damping as linear shrinkage of the curvature estimate, the optimal damping
// level, the Hessian-variance estimator and the online auto-damping rule.

#include <cstdint>
#include <utility>
#include <vector>

#include "spectral_damp/data.hpp"
#include "spectral_damp/linalg.hpp"
#include "spectral_damp/model.hpp"

namespace spectral_damp {

/// delta >= 0, beta = 1 / (1 + delta), kappa = 1 / beta = 1 + delta.
struct ShrinkageParams {
    double delta = 0.0;
    double beta = 1.0;
    double kappa = 1.0;
};

ShrinkageParams shrinkage_from_delta(double delta);
/// Inverse map: delta = (1 - beta) / beta. Requires beta in (0, 1].
ShrinkageParams shrinkage_from_beta(double beta);

/// beta H + (1 - beta) I.
SymMatrix shrunk_matrix(const SymMatrix& h, double beta);

/// Leading-order P^{-1} Tr (H~(beta) - H_true)^2 = beta^2 mu2 + (1 - beta)^2.
double shrinkage_mse(double beta, double mu2);

/// Minimiser of shrinkage_mse: beta* = 1/(1 + mu2), delta* = mu2.
ShrinkageParams optimal_damping(double mu2);

/// P^{-1} Tr X^2.
double spectral_second_moment(const SymMatrix& x);

struct VarianceEstimate {
    double sigma2 = 0.0;              // mean over probes, clipped at 0
    std::vector<double> per_probe;    // raw (unclipped) per-probe estimates
};

/// Hutchinson estimate of P^{-1} Tr[(1/N) sum_i (H_i - Hbar)^2] from
/// matrix-free batch Hessians. For each unit-norm Gaussian probe v:
///   s2 = (1/N) sum_i ||H_i v||^2   (= v^T H_i^2 v)
///   m  = (1/N) sum_i H_i v         (= Hbar v)
///   estimate = s2 - ||m||^2
VarianceEstimate estimate_variance(const std::vector<LinearOperator>& batch_hessians, std::size_t dim,
                                   std::size_t n_probes, std::uint64_t seed);

VarianceEstimate estimate_hessian_variance(const Model& model, const ParamVector& w,
                                           const std::vector<Dataset>& batches, std::size_t n_probes,
                                           std::uint64_t seed);

/// Online damping controller state.
struct DampingState {
    double current_delta = 1e-3;
    double floor = 1e-3;  // initial value delta*
    double ema_coeff = 0.7;
    long update_interval = 100;
    bool strict_floor = true;  // never below floor; otherwise never below 1e-2 * floor
    double last_estimate = 0.0;
    std::vector<std::pair<long, double>> history;

    static DampingState with_floor(double floor, double ema_coeff = 0.7, long update_interval = 100,
                                   bool strict_floor = true);
    double floor_value() const { return strict_floor ? floor : 1e-2 * floor; }
    bool due(long step) const { return update_interval > 0 && step % update_interval == 0; }
    void validate() const;
};

/// On steps that are multiples of update_interval:
/// delta <- max(floor_value, ema * delta + (1 - ema) * sigma2), and records history.
DampingState auto_damp_update(DampingState state, double sigma2, long step);

}  // namespace spectral_damp
