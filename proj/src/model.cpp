#include "spectral_damp/model.hpp"

#include <cmath>

namespace spectral_damp {

namespace {

using RowVector = Eigen::RowVectorXd;

void check_params(const ParamVector& w, std::size_t p, const char* who) {
    if (static_cast<std::size_t>(w.size()) != p)
        throw DimensionError(std::string(who) + ": expected " + std::to_string(p) + " parameters, got " +
                             std::to_string(w.size()));
}

void check_batch(const Dataset& batch, int input_dim, const char* who) {
    if (batch.inputs.cols() != input_dim)
        throw DimensionError(std::string(who) + ": batch input dimension " +
                             std::to_string(batch.inputs.cols()) + " does not match model " +
                             std::to_string(input_dim));
    if (batch.labels.empty()) throw DimensionError(std::string(who) + ": empty batch");
}

/// Numerically stable row softmax in place; returns per-row log-sum-exp.
Vector softmax_rows(Matrix& z) {
    Vector lse(z.rows());
    for (Eigen::Index n = 0; n < z.rows(); ++n) {
        const double mx = z.row(n).maxCoeff();
        z.row(n).array() = (z.row(n).array() - mx).exp();
        const double s = z.row(n).sum();
        z.row(n) /= s;
        lse[n] = mx + std::log(s);
    }
    return lse;
}

/// Mean cross-entropy and error rate given logits (before softmax) and probabilities.
void ce_and_error(const Matrix& logits, const Vector& lse, const Dataset& batch, LossEval& out) {
    double total = 0.0;
    std::size_t wrong = 0;
    for (Eigen::Index n = 0; n < logits.rows(); ++n) {
        const int y = batch.labels[static_cast<std::size_t>(n)];
        total += lse[n] - logits(n, y);
        Eigen::Index arg;
        logits.row(n).maxCoeff(&arg);
        if (arg != y) ++wrong;
    }
    out.loss = total / static_cast<double>(logits.rows());
    out.error_rate = static_cast<double>(wrong) / static_cast<double>(logits.rows());
}

void require_finite(const LossEval& e, const char* who) {
    if (!std::isfinite(e.loss) || (e.gradient.size() && !e.gradient.allFinite()))
        throw NonFiniteError(std::string(who) + ": non-finite loss or gradient");
}

/// (p o a) - p o rowsum(p o a): the softmax Jacobian applied row-wise.
Matrix softmax_jvp(const Matrix& p, const Matrix& a) {
    Matrix pa = p.cwiseProduct(a);
    const Vector s = pa.rowwise().sum();
    pa -= p.cwiseProduct(s.replicate(1, p.cols()));
    return pa;
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::softmax_regression: return "softmax_regression";
        case ModelKind::mlp: return "mlp";
        case ModelKind::quadratic: return "quadratic";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "softmax_regression" || s == "logistic") return ModelKind::softmax_regression;
    if (s == "mlp") return ModelKind::mlp;
    if (s == "quadratic") return ModelKind::quadratic;
    throw std::invalid_argument("unknown model kind '" + s + "'");
}

std::size_t ModelSpec::param_count() const {
    const auto d = static_cast<std::size_t>(input_dim);
    const auto c = static_cast<std::size_t>(num_classes);
    const auto h = static_cast<std::size_t>(hidden);
    switch (kind) {
        case ModelKind::softmax_regression: return (d + 1) * c;
        case ModelKind::mlp: return h * d + h + c * h + c;
        case ModelKind::quadratic: return d;
    }
    return 0;
}

LossEval Model::loss(const ParamVector& w, const Dataset& batch) const {
    LossEval e = loss_grad(w, batch);
    e.gradient.resize(0);
    return e;
}

LinearOperator Model::hessian_operator(const ParamVector& w, const Dataset& batch) const {
    return [this, w, &batch](const Vector& v) { return hvp(w, batch, v); };
}

// ---------------------------------------------------------------------------
// Softmax regression

SoftmaxRegression::SoftmaxRegression(int input_dim, int num_classes) {
    if (input_dim <= 0 || num_classes < 2)
        throw std::invalid_argument("SoftmaxRegression: need input_dim > 0 and at least two classes");
    spec_.kind = ModelKind::softmax_regression;
    spec_.input_dim = input_dim;
    spec_.num_classes = num_classes;
    spec_.hidden = 0;
}

Matrix SoftmaxRegression::probabilities(const ParamVector& w, const Matrix& inputs) const {
    const Eigen::Index d = spec_.input_dim, c = spec_.num_classes;
    const Eigen::Map<const Matrix> theta(w.data(), d + 1, c);
    Matrix z = inputs * theta.topRows(d);
    z.rowwise() += theta.row(d);
    softmax_rows(z);
    return z;
}

LossEval SoftmaxRegression::loss(const ParamVector& w, const Dataset& batch) const {
    check_params(w, param_count(), "SoftmaxRegression::loss");
    check_batch(batch, spec_.input_dim, "SoftmaxRegression::loss");
    const Eigen::Index d = spec_.input_dim, c = spec_.num_classes;
    const Eigen::Map<const Matrix> theta(w.data(), d + 1, c);
    Matrix logits = batch.inputs * theta.topRows(d);
    logits.rowwise() += theta.row(d);
    Matrix p = logits;
    const Vector lse = softmax_rows(p);
    LossEval out;
    ce_and_error(logits, lse, batch, out);
    require_finite(out, "SoftmaxRegression::loss");
    return out;
}

LossEval SoftmaxRegression::loss_grad(const ParamVector& w, const Dataset& batch) const {
    check_params(w, param_count(), "SoftmaxRegression::loss_grad");
    check_batch(batch, spec_.input_dim, "SoftmaxRegression::loss_grad");
    const Eigen::Index d = spec_.input_dim, c = spec_.num_classes;
    const auto n = static_cast<double>(batch.size());
    const Eigen::Map<const Matrix> theta(w.data(), d + 1, c);

    Matrix logits = batch.inputs * theta.topRows(d);
    logits.rowwise() += theta.row(d);
    Matrix g = logits;
    const Vector lse = softmax_rows(g);

    LossEval out;
    ce_and_error(logits, lse, batch, out);

    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, batch.labels[static_cast<std::size_t>(i)]) -= 1.0;
    g /= n;
    out.gradient.resize(static_cast<Eigen::Index>(param_count()));
    Eigen::Map<Matrix> grad(out.gradient.data(), d + 1, c);
    grad.topRows(d).noalias() = batch.inputs.transpose() * g;
    grad.row(d) = g.colwise().sum();
    require_finite(out, "SoftmaxRegression::loss_grad");
    return out;
}

namespace {

ParamVector softmax_hvp_from_probs(const Matrix& inputs, const Matrix& p, const ParamVector& v,
                                   Eigen::Index d, Eigen::Index c) {
    const Eigen::Map<const Matrix> vt(v.data(), d + 1, c);
    Matrix a = inputs * vt.topRows(d);
    a.rowwise() += vt.row(d);
    const Matrix r = softmax_jvp(p, a) / static_cast<double>(inputs.rows());
    ParamVector out(v.size());
    Eigen::Map<Matrix> o(out.data(), d + 1, c);
    o.topRows(d).noalias() = inputs.transpose() * r;
    o.row(d) = r.colwise().sum();
    return out;
}

}  // namespace

ParamVector SoftmaxRegression::hvp(const ParamVector& w, const Dataset& batch, const ParamVector& v) const {
    check_params(w, param_count(), "SoftmaxRegression::hvp");
    check_params(v, param_count(), "SoftmaxRegression::hvp");
    check_batch(batch, spec_.input_dim, "SoftmaxRegression::hvp");
    const Matrix p = probabilities(w, batch.inputs);
    return softmax_hvp_from_probs(batch.inputs, p, v, spec_.input_dim, spec_.num_classes);
}

LinearOperator SoftmaxRegression::hessian_operator(const ParamVector& w, const Dataset& batch) const {
    check_params(w, param_count(), "SoftmaxRegression::hessian_operator");
    check_batch(batch, spec_.input_dim, "SoftmaxRegression::hessian_operator");
    auto p = std::make_shared<const Matrix>(probabilities(w, batch.inputs));
    const Eigen::Index d = spec_.input_dim, c = spec_.num_classes;
    const std::size_t count = param_count();
    return [p, &batch, d, c, count](const Vector& v) {
        check_params(v, count, "SoftmaxRegression::hessian_operator");
        return softmax_hvp_from_probs(batch.inputs, *p, v, d, c);
    };
}

ParamVector SoftmaxRegression::initial_params(std::uint64_t) const {
    return ParamVector::Zero(static_cast<Eigen::Index>(param_count()));
}

// ---------------------------------------------------------------------------
// MLP

namespace {

struct MlpView {
    Eigen::Map<const Matrix> w1;
    Eigen::Map<const Vector> b1;
    Eigen::Map<const Matrix> w2;
    Eigen::Map<const Vector> b2;

    MlpView(const ParamVector& p, Eigen::Index d, Eigen::Index h, Eigen::Index c)
        : w1(p.data(), h, d),
          b1(p.data() + h * d, h),
          w2(p.data() + h * d + h, c, h),
          b2(p.data() + h * d + h + c * h, c) {}
};

struct MlpGradView {
    Eigen::Map<Matrix> w1;
    Eigen::Map<Vector> b1;
    Eigen::Map<Matrix> w2;
    Eigen::Map<Vector> b2;

    MlpGradView(ParamVector& p, Eigen::Index d, Eigen::Index h, Eigen::Index c)
        : w1(p.data(), h, d),
          b1(p.data() + h * d, h),
          w2(p.data() + h * d + h, c, h),
          b2(p.data() + h * d + h + c * h, c) {}
};

}  // namespace

Mlp::Mlp(int input_dim, int hidden, int num_classes) {
    if (input_dim <= 0 || hidden <= 0 || num_classes < 2)
        throw std::invalid_argument("Mlp: sizes must be positive and at least two classes");
    spec_.kind = ModelKind::mlp;
    spec_.input_dim = input_dim;
    spec_.hidden = hidden;
    spec_.num_classes = num_classes;
}

LossEval Mlp::loss_grad(const ParamVector& w, const Dataset& batch) const {
    check_params(w, param_count(), "Mlp::loss_grad");
    check_batch(batch, spec_.input_dim, "Mlp::loss_grad");
    const Eigen::Index d = spec_.input_dim, h = spec_.hidden, c = spec_.num_classes;
    const MlpView m(w, d, h, c);
    const auto n = static_cast<double>(batch.size());

    Matrix z1 = batch.inputs * m.w1.transpose();
    z1.rowwise() += m.b1.transpose();
    const Matrix a = z1.array().tanh().matrix();
    Matrix logits = a * m.w2.transpose();
    logits.rowwise() += m.b2.transpose();
    Matrix g2 = logits;
    const Vector lse = softmax_rows(g2);

    LossEval out;
    ce_and_error(logits, lse, batch, out);

    for (Eigen::Index i = 0; i < g2.rows(); ++i) g2(i, batch.labels[static_cast<std::size_t>(i)]) -= 1.0;
    g2 /= n;
    const Matrix dz1 = (g2 * m.w2).cwiseProduct((1.0 - a.array().square()).matrix());

    out.gradient.resize(static_cast<Eigen::Index>(param_count()));
    MlpGradView gv(out.gradient, d, h, c);
    gv.w2.noalias() = g2.transpose() * a;
    gv.b2 = g2.colwise().sum().transpose();
    gv.w1.noalias() = dz1.transpose() * batch.inputs;
    gv.b1 = dz1.colwise().sum().transpose();
    require_finite(out, "Mlp::loss_grad");
    return out;
}

ParamVector Mlp::hvp(const ParamVector& w, const Dataset& batch, const ParamVector& v) const {
    check_params(w, param_count(), "Mlp::hvp");
    check_params(v, param_count(), "Mlp::hvp");
    check_batch(batch, spec_.input_dim, "Mlp::hvp");
    const Eigen::Index d = spec_.input_dim, h = spec_.hidden, c = spec_.num_classes;
    const MlpView m(w, d, h, c);
    const MlpView dv(v, d, h, c);
    const auto n = static_cast<double>(batch.size());
    const Matrix& x = batch.inputs;

    // Forward pass.
    Matrix z1 = x * m.w1.transpose();
    z1.rowwise() += m.b1.transpose();
    const Matrix a = z1.array().tanh().matrix();
    const Matrix da_dz = (1.0 - a.array().square()).matrix();
    Matrix p = a * m.w2.transpose();
    p.rowwise() += m.b2.transpose();
    softmax_rows(p);
    Matrix g2 = p;
    for (Eigen::Index i = 0; i < g2.rows(); ++i) g2(i, batch.labels[static_cast<std::size_t>(i)]) -= 1.0;
    g2 /= n;
    const Matrix da = g2 * m.w2;

    // Directional derivatives (R-operator) of the forward pass.
    Matrix rz1 = x * dv.w1.transpose();
    rz1.rowwise() += dv.b1.transpose();
    const Matrix ra = da_dz.cwiseProduct(rz1);
    Matrix rz2 = ra * m.w2.transpose() + a * dv.w2.transpose();
    rz2.rowwise() += dv.b2.transpose();
    const Matrix rg2 = softmax_jvp(p, rz2) / n;

    // ... and of the backward pass.
    const Matrix rda = rg2 * m.w2 + g2 * dv.w2;
    const Matrix rdz1 = rda.cwiseProduct(da_dz) - 2.0 * da.cwiseProduct(a).cwiseProduct(ra);

    ParamVector out(v.size());
    MlpGradView o(out, d, h, c);
    o.w2.noalias() = rg2.transpose() * a + g2.transpose() * ra;
    o.b2 = rg2.colwise().sum().transpose();
    o.w1.noalias() = rdz1.transpose() * x;
    o.b1 = rdz1.colwise().sum().transpose();
    if (!out.allFinite()) throw NonFiniteError("Mlp::hvp: non-finite product");
    return out;
}

ParamVector Mlp::initial_params(std::uint64_t seed) const {
    const Eigen::Index d = spec_.input_dim, h = spec_.hidden, c = spec_.num_classes;
    ParamVector w = ParamVector::Zero(static_cast<Eigen::Index>(param_count()));
    MlpGradView m(w, d, h, c);
    Rng rng(seed);
    auto fill = [&rng](auto& mat, double fan_in, double fan_out) {
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (Eigen::Index j = 0; j < mat.cols(); ++j)
            for (Eigen::Index i = 0; i < mat.rows(); ++i) mat(i, j) = u(rng);
    };
    fill(m.w1, static_cast<double>(d), static_cast<double>(h));
    fill(m.w2, static_cast<double>(h), static_cast<double>(c));
    return w;
}

// ---------------------------------------------------------------------------
// Quadratic

QuadraticModel::QuadraticModel(SymMatrix hessian, ParamVector w0)
    : hessian_(std::move(hessian)), w0_(std::move(w0)) {
    spec_.kind = ModelKind::quadratic;
    spec_.input_dim = static_cast<int>(hessian_.dim());
    spec_.num_classes = 0;
    spec_.hidden = 0;
    if (w0_.size() != 0) check_params(w0_, hessian_.dim(), "QuadraticModel");
}

LossEval QuadraticModel::loss_grad(const ParamVector& w, const Dataset&) const {
    check_params(w, param_count(), "QuadraticModel::loss_grad");
    LossEval out;
    out.gradient = matvec(hessian_, w);
    out.loss = 0.5 * w.dot(out.gradient);
    out.error_rate = 0.0;
    require_finite(out, "QuadraticModel::loss_grad");
    return out;
}

ParamVector QuadraticModel::hvp(const ParamVector& w, const Dataset&, const ParamVector& v) const {
    check_params(w, param_count(), "QuadraticModel::hvp");
    return matvec(hessian_, v);
}

ParamVector QuadraticModel::initial_params(std::uint64_t seed) const {
    if (w0_.size() != 0) return w0_;
    Rng rng(seed);
    return unit_gaussian(rng, static_cast<Eigen::Index>(param_count()));
}

std::unique_ptr<Model> make_model(const ModelSpec& spec) {
    switch (spec.kind) {
        case ModelKind::softmax_regression:
            return std::make_unique<SoftmaxRegression>(spec.input_dim, spec.num_classes);
        case ModelKind::mlp: return std::make_unique<Mlp>(spec.input_dim, spec.hidden, spec.num_classes);
        case ModelKind::quadratic:
            throw std::invalid_argument("make_model: quadratic models are built from a Hessian directly");
    }
    throw std::invalid_argument("make_model: unknown kind");
}

SymMatrix dense_hessian(const Model& model, const ParamVector& w, const Dataset& batch, std::size_t cap) {
    const std::size_t p = model.param_count();
    if (p > cap)
        throw DimensionError("dense_hessian: P = " + std::to_string(p) + " exceeds dense cap " +
                             std::to_string(cap));
    const auto op = model.hessian_operator(w, batch);
    Matrix h(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    Vector e = Vector::Zero(static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(p); ++i) {
        e[i] = 1.0;
        h.col(i) = op(e);
        e[i] = 0.0;
    }
    return SymMatrix::symmetrized(h);
}

}  // namespace spectral_damp
