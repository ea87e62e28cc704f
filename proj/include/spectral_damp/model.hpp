#pragma once

// Differentiable losses with exact gradients and Hessian-vector products.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "spectral_damp/data.hpp"
#include "spectral_damp/linalg.hpp"

namespace spectral_damp {

/// Matrix-free symmetric operator v -> A v.
using LinearOperator = std::function<Vector(const Vector&)>;

/// Raised when a forward/backward pass produces a non-finite value.
class NonFiniteError : public std::runtime_error {
public:
    explicit NonFiniteError(const std::string& what, std::optional<long> step = std::nullopt)
        : std::runtime_error(step ? what + " at step " + std::to_string(*step) : what), step_(step) {}
    std::optional<long> step() const { return step_; }

private:
    std::optional<long> step_;
};

enum class ModelKind { softmax_regression, mlp, quadratic };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct ModelSpec {
    ModelKind kind = ModelKind::softmax_regression;
    int input_dim = 0;
    int num_classes = 0;
    int hidden = 32;  // mlp only

    /// Weight + bias count.
    std::size_t param_count() const;
};

struct LossEval {
    double loss = 0.0;
    ParamVector gradient;
    double error_rate = 0.0;
};

class Model {
public:
    virtual ~Model() = default;

    virtual std::size_t param_count() const = 0;
    virtual const ModelSpec& spec() const = 0;

    /// Mean loss over `batch`, its gradient and the misclassification rate.
    virtual LossEval loss_grad(const ParamVector& w, const Dataset& batch) const = 0;

    /// Loss and error rate only.
    virtual LossEval loss(const ParamVector& w, const Dataset& batch) const;

    /// Exact Hessian of the batch loss applied to v.
    virtual ParamVector hvp(const ParamVector& w, const Dataset& batch, const ParamVector& v) const = 0;

    /// Hessian operator at a fixed (w, batch). Implementations cache the
    /// forward pass so repeated products are cheap. `batch` must outlive it.
    virtual LinearOperator hessian_operator(const ParamVector& w, const Dataset& batch) const;

    /// Deterministic starting point.
    virtual ParamVector initial_params(std::uint64_t seed) const = 0;
};

/// Multiclass logistic regression. Parameters are laid out as a
/// (d + 1) x C column-major matrix: column c holds class c's weights
/// followed by its bias.
class SoftmaxRegression final : public Model {
public:
    SoftmaxRegression(int input_dim, int num_classes);

    std::size_t param_count() const override { return spec_.param_count(); }
    const ModelSpec& spec() const override { return spec_; }
    LossEval loss_grad(const ParamVector& w, const Dataset& batch) const override;
    LossEval loss(const ParamVector& w, const Dataset& batch) const override;
    ParamVector hvp(const ParamVector& w, const Dataset& batch, const ParamVector& v) const override;
    LinearOperator hessian_operator(const ParamVector& w, const Dataset& batch) const override;
    /// Zero weights (the loss is convex).
    ParamVector initial_params(std::uint64_t seed) const override;

    /// Row-wise softmax probabilities, N x C.
    Matrix probabilities(const ParamVector& w, const Matrix& inputs) const;

private:
    ModelSpec spec_;
};

/// One hidden tanh layer followed by softmax cross-entropy.
/// Layout: W1 (h x d, column-major), b1 (h), W2 (C x h), b2 (C).
class Mlp final : public Model {
public:
    Mlp(int input_dim, int hidden, int num_classes);

    std::size_t param_count() const override { return spec_.param_count(); }
    const ModelSpec& spec() const override { return spec_; }
    LossEval loss_grad(const ParamVector& w, const Dataset& batch) const override;
    ParamVector hvp(const ParamVector& w, const Dataset& batch, const ParamVector& v) const override;
    /// Glorot-uniform weights, zero biases.
    ParamVector initial_params(std::uint64_t seed) const override;

private:
    ModelSpec spec_;
};

/// L(w) = 1/2 w^T H w. The batch argument is ignored.
class QuadraticModel final : public Model {
public:
    explicit QuadraticModel(SymMatrix hessian, ParamVector w0 = {});

    std::size_t param_count() const override { return hessian_.dim(); }
    const ModelSpec& spec() const override { return spec_; }
    LossEval loss_grad(const ParamVector& w, const Dataset& batch) const override;
    ParamVector hvp(const ParamVector& w, const Dataset& batch, const ParamVector& v) const override;
    ParamVector initial_params(std::uint64_t seed) const override;
    const SymMatrix& hessian() const { return hessian_; }

private:
    ModelSpec spec_;
    SymMatrix hessian_;
    ParamVector w0_;
};

std::unique_ptr<Model> make_model(const ModelSpec& spec);

/// Materialises the batch Hessian column by column from hvp(e_i).
SymMatrix dense_hessian(const Model& model, const ParamVector& w, const Dataset& batch,
                        std::size_t cap = kDenseCap);

}  // namespace spectral_damp
