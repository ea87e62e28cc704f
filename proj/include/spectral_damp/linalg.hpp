#pragma once

// Dense symmetric linear algebra kernels shared by every other module.
//
// All routines are pure functions over immutable inputs and may be called
// concurrently.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace spectral_damp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Flat model parameter / gradient / probe vector of dimension P.
using ParamVector = Vector;

/// Largest dimension for which dense (oracle) paths are allowed.
inline constexpr std::size_t kDenseCap = 2048;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense symmetric P x P matrix. Symmetry is exact: every write is mirrored.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t dim);

    /// Builds from the upper triangle of `m` (the lower triangle is ignored).
    static SymMatrix from_upper(const Matrix& m);
    /// Builds from (m + m^T) / 2.
    static SymMatrix symmetrized(const Matrix& m);
    static SymMatrix identity(std::size_t dim);
    static SymMatrix diagonal(const Vector& d);

    std::size_t dim() const { return static_cast<std::size_t>(data_.rows()); }
    double operator()(std::size_t i, std::size_t j) const { return data_(i, j); }
    void set(std::size_t i, std::size_t j, double v);

    const Matrix& dense() const { return data_; }

    SymMatrix operator+(const SymMatrix& o) const;
    SymMatrix operator-(const SymMatrix& o) const;
    SymMatrix operator*(double s) const;

    double trace() const { return data_.trace(); }
    double frobenius_norm() const { return data_.norm(); }

private:
    Matrix data_;
};

/// y = A x. Throws DimensionError on mismatch.
ParamVector matvec(const SymMatrix& a, const ParamVector& x);

struct EigenDecomposition {
    Vector values;   // descending
    Matrix vectors;  // orthonormal columns, column i pairs with values[i]
};

/// Full eigendecomposition of a small symmetric matrix (oracle path).
EigenDecomposition dense_eigh(const SymMatrix& a, std::size_t cap = kDenseCap);

/// Eigenvalues only, descending.
Vector dense_eigvalsh(const SymMatrix& a, std::size_t cap = kDenseCap);

struct OrthoResult {
    ParamVector vector;
    bool zero = false;  // residual vanished: v lay in span(basis)
};

/// Two-pass classical Gram-Schmidt of `v` against orthonormal `basis`.
OrthoResult orthogonalize(const ParamVector& v, std::span<const ParamVector> basis);

/// Same, with the basis stored as the leading `count` columns of `basis`.
OrthoResult orthogonalize(const ParamVector& v, const Matrix& basis, Eigen::Index count);

/// Orthonormal columns via Householder QR of a P x r matrix.
Matrix orthonormal_columns(const Matrix& m);

}  // namespace spectral_damp
