#include "spectral_damp/shrinkage.hpp"

#include <algorithm>
#include <cmath>

#include "spectral_damp/random.hpp"

namespace spectral_damp {

ShrinkageParams shrinkage_from_delta(double delta) {
    if (!(delta >= 0.0)) throw std::invalid_argument("shrinkage_from_delta: damping must be >= 0");
    return {delta, 1.0 / (1.0 + delta), 1.0 + delta};
}

ShrinkageParams shrinkage_from_beta(double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("shrinkage_from_beta: beta must lie in (0, 1]");
    return {(1.0 - beta) / beta, beta, 1.0 / beta};
}

SymMatrix shrunk_matrix(const SymMatrix& h, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("shrunk_matrix: beta must lie in [0, 1]");
    return h * beta + SymMatrix::identity(h.dim()) * (1.0 - beta);
}

double shrinkage_mse(double beta, double mu2) {
    if (!(mu2 >= 0.0)) throw std::invalid_argument("shrinkage_mse: second moment must be >= 0");
    return beta * beta * mu2 + (1.0 - beta) * (1.0 - beta);
}

ShrinkageParams optimal_damping(double mu2) {
    if (!(mu2 >= 0.0)) throw std::invalid_argument("optimal_damping: second moment must be >= 0");
    return {mu2, 1.0 / (1.0 + mu2), 1.0 + mu2};
}

double spectral_second_moment(const SymMatrix& x) {
    return x.dense().squaredNorm() / static_cast<double>(x.dim());
}

VarianceEstimate estimate_variance(const std::vector<LinearOperator>& batch_hessians, std::size_t dim,
                                   std::size_t n_probes, std::uint64_t seed) {
    if (batch_hessians.size() < 2) throw std::invalid_argument("estimate_variance: need at least two batches");
    if (n_probes < 1) throw std::invalid_argument("estimate_variance: need at least one probe");
    const auto p = static_cast<Eigen::Index>(dim);
    const auto n = static_cast<double>(batch_hessians.size());
    Rng rng(seed);

    VarianceEstimate out;
    out.per_probe.reserve(n_probes);
    for (std::size_t k = 0; k < n_probes; ++k) {
        const Vector v = unit_gaussian(rng, p);
        double s2 = 0.0;
        Vector mean = Vector::Zero(p);
        for (const auto& h : batch_hessians) {
            const Vector hv = h(v);
            s2 += hv.squaredNorm();
            mean += hv;
        }
        s2 /= n;
        mean /= n;
        out.per_probe.push_back(s2 - mean.squaredNorm());
    }
    double total = 0.0;
    for (double e : out.per_probe) total += e;
    out.sigma2 = std::max(0.0, total / static_cast<double>(n_probes));
    return out;
}

VarianceEstimate estimate_hessian_variance(const Model& model, const ParamVector& w,
                                           const std::vector<Dataset>& batches, std::size_t n_probes,
                                           std::uint64_t seed) {
    std::vector<LinearOperator> ops;
    ops.reserve(batches.size());
    for (const auto& b : batches) ops.push_back(model.hessian_operator(w, b));
    return estimate_variance(ops, model.param_count(), n_probes, seed);
}

DampingState DampingState::with_floor(double floor, double ema_coeff, long update_interval, bool strict_floor) {
    DampingState s;
    s.current_delta = floor;
    s.floor = floor;
    s.ema_coeff = ema_coeff;
    s.update_interval = update_interval;
    s.strict_floor = strict_floor;
    s.validate();
    return s;
}

void DampingState::validate() const {
    if (!(current_delta >= 0.0)) throw std::invalid_argument("DampingState: current damping must be >= 0");
    if (!(floor > 0.0)) throw std::invalid_argument("DampingState: floor must be > 0");
    if (!(ema_coeff >= 0.0 && ema_coeff < 1.0)) throw std::invalid_argument("DampingState: ema_coeff must lie in [0, 1)");
    if (update_interval < 1) throw std::invalid_argument("DampingState: update_interval must be >= 1");
}

DampingState auto_damp_update(DampingState state, double sigma2, long step) {
    if (!(sigma2 >= 0.0)) throw std::invalid_argument("auto_damp_update: variance estimate must be >= 0");
    if (!state.due(step)) return state;
    state.last_estimate = sigma2;
    const double smoothed = state.ema_coeff * state.current_delta + (1.0 - state.ema_coeff) * sigma2;
    state.current_delta = std::max(state.floor_value(), smoothed);
    state.history.emplace_back(step, state.current_delta);
    return state;
}

}  // namespace spectral_damp
