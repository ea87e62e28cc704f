#pragma once

// Optimisers (SGD/heavy-ball, Adam/AdamW with explicit damping, LanczosOPT),
// learning-rate schedules and curvature diagnostics.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "spectral_damp/lanczos.hpp"
#include "spectral_damp/model.hpp"
#include "spectral_damp/shrinkage.hpp"

namespace spectral_damp {

/// Non-finite iterate or ||w|| > kDivergenceNorm.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, long step)
        : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

inline constexpr double kDivergenceNorm = 1e8;

enum class OptimizerKind { sgd, adam, lanczos_opt };
std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& s);

struct OptimConfig {
    OptimizerKind kind = OptimizerKind::sgd;
    double lr = 0.01;
    double momentum = 0.9;      // rho (sgd)
    double beta1 = 0.9;         // adam
    double beta2 = 0.999;       // adam
    double damping = 1e-8;      // delta
    double eta = 1.0;           // sharp-subspace perturbation (lanczos_opt)
    std::size_t lanczos_steps = 50;
    double weight_decay = 0.0;  // gamma
    bool decouple_wd = false;
    bool inside_sqrt = false;   // adam: delta under the square root
    long refresh_every = 1;     // lanczos_opt: steps between decompositions
    std::uint64_t seed = 0;
    std::optional<DampingState> auto_damp;

    /// delta / alpha, logged only.
    double damping_lr_ratio() const { return damping / lr; }
    void validate() const;
};

enum class ScheduleKind { flat, linear_decay, warmup };
std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& s);

struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::flat;
    double base_lr = 0.01;
    double total_epochs = 1.0;  // T
    double floor_ratio = 0.01;  // r
    double warm_factor = 5.0;   // peak multiplier of the warm-up schedule

    void validate() const;
};

/// Learning rate at epoch t in [0, T].
/// linear_decay: a0 up to 0.5T, linear to a0 r at 0.9T, then flat.
/// warmup: a0 up to 0.1T, linear to warm_factor a0 at 0.3T, linear down to a0 r at 0.9T, then flat.
double schedule_lr(const ScheduleSpec& spec, double t);

struct OptimizerState {
    ParamVector w;
    long step = 0;
    ParamVector momentum;  // heavy-ball buffer
    ParamVector adam_m, adam_v;
    std::optional<SpectralDecomposition> last_decomp;
    long decomp_step = -1;

    static OptimizerState init(ParamVector w0);
};

/// Heavy-ball: b <- rho b + g (+ gamma w when coupled); w <- w - lr b;
/// decoupled decay then scales w by (1 - lr gamma).
OptimizerState sgd_step(OptimizerState state, const ParamVector& grad, double lr, const OptimConfig& config);

/// Bias-corrected Adam: w <- w - lr m^ / (sqrt(v^) + delta), or
/// / sqrt(v^ + delta) when inside_sqrt is set.
OptimizerState adam_step(OptimizerState state, const ParamVector& grad, double lr, const OptimConfig& config);

/// Components of the LanczosOPT displacement before the -lr factor.
struct LanczosDirection {
    ParamVector sharp;  // (1/eta) sum_i c_i / (max(lambda_i, 0) + delta) phi_i
    ParamVector flat;   // residual / delta
    ParamVector total() const { return sharp + flat; }
};

LanczosDirection lanczos_opt_direction(const SpectralDecomposition& decomp, const ParamVector& grad,
                                       double delta, double eta);

/// One LanczosOPT step at w_k with the fresh gradient `grad`: decompose the
/// batch Hessian with k Lanczos steps (reusing the cached decomposition when
/// refresh_every allows), then w <- w - lr (sharp + flat).
OptimizerState lanczos_opt_step(OptimizerState state, const Model& model, const Dataset& batch,
                                const ParamVector& grad, double lr, const OptimConfig& config);

/// (lambda_max+ + delta) / (lambda_min+ + delta). Directions outside the
/// Ritz subspace count as zero curvature.
double r_est_curv(const SpectralDecomposition& decomp, double delta);

/// 2 (max_i |phi_i^T H phi_i| / (eta_i + delta))^{-1} for a preconditioner with
/// eigenvalues eta_i and orthonormal eigenvectors phi_i (columns).
double stable_lr_bound(const SymMatrix& h, const Vector& precond_eigs, const Matrix& precond_vectors,
                       double delta);

/// Throws DivergenceError when w is non-finite or ||w|| exceeds kDivergenceNorm.
void check_divergence(const ParamVector& w, long step);

}  // namespace spectral_damp
