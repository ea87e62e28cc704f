#include "spectral_damp/optim.hpp"

#include <algorithm>
#include <cmath>

#include "spectral_damp/random.hpp"

namespace spectral_damp {

std::string to_string(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::sgd: return "sgd";
        case OptimizerKind::adam: return "adam";
        case OptimizerKind::lanczos_opt: return "lanczos_opt";
    }
    return "?";
}

OptimizerKind optimizer_kind_from_string(const std::string& s) {
    if (s == "sgd" || s == "gd") return OptimizerKind::sgd;
    if (s == "adam") return OptimizerKind::adam;
    if (s == "lanczos_opt" || s == "lopt") return OptimizerKind::lanczos_opt;
    throw std::invalid_argument("unknown optimizer '" + s + "'");
}

void OptimConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("OptimConfig: lr must be > 0");
    if (!(damping >= 0.0)) throw std::invalid_argument("OptimConfig: damping must be >= 0");
    if (kind == OptimizerKind::lanczos_opt && !(damping > 0.0))
        throw std::invalid_argument("OptimConfig: lanczos_opt requires damping > 0");
    if (!(eta >= 1.0)) throw std::invalid_argument("OptimConfig: eta must be >= 1");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("OptimConfig: momentum must lie in [0, 1)");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw std::invalid_argument("OptimConfig: adam betas must lie in [0, 1)");
    if (lanczos_steps < 1) throw std::invalid_argument("OptimConfig: lanczos_steps must be >= 1");
    if (!(weight_decay >= 0.0)) throw std::invalid_argument("OptimConfig: weight_decay must be >= 0");
    if (refresh_every < 1) throw std::invalid_argument("OptimConfig: refresh_every must be >= 1");
    if (auto_damp) auto_damp->validate();
}

std::string to_string(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::flat: return "flat";
        case ScheduleKind::linear_decay: return "linear_decay";
        case ScheduleKind::warmup: return "warmup";
    }
    return "?";
}

ScheduleKind schedule_kind_from_string(const std::string& s) {
    if (s == "flat") return ScheduleKind::flat;
    if (s == "linear_decay" || s == "linear") return ScheduleKind::linear_decay;
    if (s == "warmup") return ScheduleKind::warmup;
    throw std::invalid_argument("unknown schedule '" + s + "'");
}

void ScheduleSpec::validate() const {
    if (!(base_lr > 0.0)) throw std::invalid_argument("ScheduleSpec: base_lr must be > 0");
    if (!(total_epochs > 0.0)) throw std::invalid_argument("ScheduleSpec: total_epochs must be > 0");
    if (!(floor_ratio > 0.0 && floor_ratio <= 1.0)) throw std::invalid_argument("ScheduleSpec: floor_ratio must lie in (0, 1]");
    if (!(warm_factor >= 1.0)) throw std::invalid_argument("ScheduleSpec: warm_factor must be >= 1");
}

double schedule_lr(const ScheduleSpec& spec, double t) {
    spec.validate();
    if (t < 0.0 || t > spec.total_epochs)
        throw std::out_of_range("schedule_lr: epoch " + std::to_string(t) + " outside [0, " +
                                std::to_string(spec.total_epochs) + "]");
    const double a0 = spec.base_lr, r = spec.floor_ratio, u = t / spec.total_epochs;
    switch (spec.kind) {
        case ScheduleKind::flat: return a0;
        case ScheduleKind::linear_decay:
            if (u <= 0.5) return a0;
            if (u <= 0.9) return a0 * (1.0 - (1.0 - r) * (u - 0.5) / 0.4);
            return a0 * r;
        case ScheduleKind::warmup: {
            const double k = spec.warm_factor;
            if (u <= 0.1) return a0;
            if (u <= 0.3) return a0 * (1.0 + (k - 1.0) * (u - 0.1) / 0.2);
            if (u <= 0.9) return a0 * (k - (k - r) * (u - 0.3) / 0.6);
            return a0 * r;
        }
    }
    return a0;
}

OptimizerState OptimizerState::init(ParamVector w0) {
    OptimizerState s;
    const auto p = w0.size();
    s.w = std::move(w0);
    s.momentum = ParamVector::Zero(p);
    s.adam_m = ParamVector::Zero(p);
    s.adam_v = ParamVector::Zero(p);
    return s;
}

void check_divergence(const ParamVector& w, long step) {
    if (!w.allFinite()) throw DivergenceError("non-finite parameters", step);
    if (w.norm() > kDivergenceNorm) throw DivergenceError("parameter norm exceeded divergence bound", step);
}

namespace {

void check_grad(const OptimizerState& state, const ParamVector& grad, const char* who) {
    if (grad.size() != state.w.size()) throw DimensionError(std::string(who) + ": gradient dimension mismatch");
    if (!grad.allFinite()) throw DivergenceError(std::string(who) + ": non-finite gradient", state.step);
}

}  // namespace

OptimizerState sgd_step(OptimizerState state, const ParamVector& grad, double lr, const OptimConfig& config) {
    check_grad(state, grad, "sgd_step");
    if (state.momentum.size() != state.w.size()) state.momentum = ParamVector::Zero(state.w.size());
    state.momentum *= config.momentum;
    state.momentum += grad;
    if (!config.decouple_wd && config.weight_decay > 0.0) state.momentum += config.weight_decay * state.w;
    state.w -= lr * state.momentum;
    if (config.decouple_wd && config.weight_decay > 0.0) state.w *= 1.0 - lr * config.weight_decay;
    check_divergence(state.w, state.step);
    ++state.step;
    return state;
}

OptimizerState adam_step(OptimizerState state, const ParamVector& grad, double lr, const OptimConfig& config) {
    check_grad(state, grad, "adam_step");
    if (state.adam_m.size() != state.w.size()) state.adam_m = ParamVector::Zero(state.w.size());
    if (state.adam_v.size() != state.w.size()) state.adam_v = ParamVector::Zero(state.w.size());
    ParamVector g = grad;
    if (!config.decouple_wd && config.weight_decay > 0.0) g += config.weight_decay * state.w;

    const double b1 = config.beta1, b2 = config.beta2;
    state.adam_m = b1 * state.adam_m + (1.0 - b1) * g;
    state.adam_v = b2 * state.adam_v + (1.0 - b2) * g.cwiseAbs2();
    const double t = static_cast<double>(state.step + 1);
    const ParamVector m_hat = state.adam_m / (1.0 - std::pow(b1, t));
    const ParamVector v_hat = state.adam_v / (1.0 - std::pow(b2, t));
    const ParamVector denom = config.inside_sqrt ? ParamVector((v_hat.array() + config.damping).sqrt().matrix())
                                                 : (v_hat.array().sqrt() + config.damping).matrix();
    state.w -= lr * m_hat.cwiseQuotient(denom);
    if (config.decouple_wd && config.weight_decay > 0.0) state.w *= 1.0 - lr * config.weight_decay;
    check_divergence(state.w, state.step);
    ++state.step;
    return state;
}

LanczosDirection lanczos_opt_direction(const SpectralDecomposition& decomp, const ParamVector& grad,
                                       double delta, double eta) {
    if (!(delta > 0.0)) throw std::invalid_argument("lanczos_opt_direction: damping must be > 0");
    if (!(eta >= 1.0)) throw std::invalid_argument("lanczos_opt_direction: eta must be >= 1");
    const SharpSplit split = project_sharp(decomp, grad);
    const Vector scale = (decomp.ritz_values.cwiseMax(0.0).array() + delta).inverse() / eta;
    LanczosDirection dir;
    dir.sharp = decomp.ritz_vectors * split.coeffs.cwiseProduct(scale);
    dir.flat = split.residual / delta;
    return dir;
}

OptimizerState lanczos_opt_step(OptimizerState state, const Model& model, const Dataset& batch,
                                const ParamVector& grad, double lr, const OptimConfig& config) {
    check_grad(state, grad, "lanczos_opt_step");
    const double delta = config.damping;
    if (!(delta > 0.0)) throw std::invalid_argument("lanczos_opt_step: damping must be > 0");

    ParamVector g = grad;
    const double gamma = (!config.decouple_wd) ? config.weight_decay : 0.0;
    if (gamma > 0.0) g += gamma * state.w;

    const bool stale = !state.last_decomp || state.step - state.decomp_step >= config.refresh_every;
    if (stale) {
        LinearOperator h = model.hessian_operator(state.w, batch);
        if (gamma > 0.0) h = [h, gamma](const Vector& v) -> Vector { return h(v) + gamma * v; };
        const std::size_t k = std::min(config.lanczos_steps, model.param_count());
        try {
            state.last_decomp = lanczos(h, model.param_count(), k,
                                        derive_seed(config.seed, static_cast<std::uint64_t>(state.step)));
        } catch (const NonFiniteError& e) {
            throw DivergenceError(e.what(), state.step);
        }
        state.decomp_step = state.step;
    }
    const auto dir = lanczos_opt_direction(*state.last_decomp, g, delta, config.eta);
    state.w -= lr * (dir.sharp + dir.flat);
    if (config.decouple_wd && config.weight_decay > 0.0) state.w *= 1.0 - lr * config.weight_decay;
    check_divergence(state.w, state.step);
    ++state.step;
    return state;
}

double r_est_curv(const SpectralDecomposition& decomp, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("r_est_curv: damping must be > 0");
    if (decomp.steps() == 0) throw std::invalid_argument("r_est_curv: empty decomposition");
    const double hi = std::max(decomp.ritz_values.maxCoeff(), 0.0);
    const double lo = decomp.has_complement() ? 0.0 : std::max(decomp.ritz_values.minCoeff(), 0.0);
    return (hi + delta) / (lo + delta);
}

double stable_lr_bound(const SymMatrix& h, const Vector& precond_eigs, const Matrix& precond_vectors,
                       double delta) {
    const auto p = static_cast<Eigen::Index>(h.dim());
    if (precond_vectors.rows() != p || precond_vectors.cols() != precond_eigs.size())
        throw DimensionError("stable_lr_bound: preconditioner eigendata does not match H");
    double worst = 0.0;
    for (Eigen::Index i = 0; i < precond_eigs.size(); ++i) {
        const double denom = precond_eigs[i] + delta;
        if (denom == 0.0) throw std::domain_error("stable_lr_bound: zero preconditioner denominator");
        const auto phi = precond_vectors.col(i);
        worst = std::max(worst, std::abs(phi.dot(h.dense() * phi)) / denom);
    }
    if (worst == 0.0) throw std::domain_error("stable_lr_bound: curvature vanishes in every direction");
    return 2.0 / worst;
}

}  // namespace spectral_damp
