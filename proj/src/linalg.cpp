#include "spectral_damp/linalg.hpp"

#include <cmath>

namespace spectral_damp {

namespace {

void require_finite(const Matrix& m) {
    if (!m.allFinite()) throw std::invalid_argument("SymMatrix: non-finite entry");
}

}  // namespace

SymMatrix::SymMatrix(std::size_t dim) : data_(Matrix::Zero(dim, dim)) {
    if (dim == 0) throw DimensionError("SymMatrix: dimension must be positive");
}

SymMatrix SymMatrix::from_upper(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw DimensionError("SymMatrix::from_upper: matrix must be square and non-empty");
    SymMatrix out;
    out.data_ = m.selfadjointView<Eigen::Upper>();
    require_finite(out.data_);
    return out;
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw DimensionError("SymMatrix::symmetrized: matrix must be square and non-empty");
    Matrix s = 0.5 * (m + m.transpose());
    // (a+b)/2 and (b+a)/2 agree bit for bit, but mirror anyway.
    return from_upper(s);
}

SymMatrix SymMatrix::identity(std::size_t dim) {
    SymMatrix out(dim);
    out.data_.diagonal().setOnes();
    return out;
}

SymMatrix SymMatrix::diagonal(const Vector& d) {
    SymMatrix out(static_cast<std::size_t>(d.size()));
    out.data_.diagonal() = d;
    require_finite(out.data_);
    return out;
}

void SymMatrix::set(std::size_t i, std::size_t j, double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("SymMatrix::set: non-finite value");
    if (i >= dim() || j >= dim()) throw std::out_of_range("SymMatrix::set: index out of range");
    data_(i, j) = v;
    data_(j, i) = v;
}

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
    if (dim() != o.dim()) throw DimensionError("SymMatrix +: dimension mismatch");
    SymMatrix out;
    out.data_ = data_ + o.data_;
    return out;
}

SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
    if (dim() != o.dim()) throw DimensionError("SymMatrix -: dimension mismatch");
    SymMatrix out;
    out.data_ = data_ - o.data_;
    return out;
}

SymMatrix SymMatrix::operator*(double s) const {
    SymMatrix out;
    out.data_ = data_ * s;
    return out;
}

ParamVector matvec(const SymMatrix& a, const ParamVector& x) {
    if (static_cast<std::size_t>(x.size()) != a.dim())
        throw DimensionError("matvec: matrix is " + std::to_string(a.dim()) + "x" +
                             std::to_string(a.dim()) + ", vector has " +
                             std::to_string(x.size()) + " entries");
    return a.dense() * x;
}

EigenDecomposition dense_eigh(const SymMatrix& a, std::size_t cap) {
    if (a.dim() > cap)
        throw DimensionError("dense_eigh: dimension " + std::to_string(a.dim()) +
                             " exceeds dense cap " + std::to_string(cap));
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a.dense(), Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw ConvergenceError("dense_eigh: eigensolver did not converge");
    // Eigen returns ascending order.
    EigenDecomposition out;
    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

Vector dense_eigvalsh(const SymMatrix& a, std::size_t cap) {
    if (a.dim() > cap)
        throw DimensionError("dense_eigvalsh: dimension " + std::to_string(a.dim()) +
                             " exceeds dense cap " + std::to_string(cap));
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a.dense(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw ConvergenceError("dense_eigvalsh: eigensolver did not converge");
    return solver.eigenvalues().reverse();
}

OrthoResult orthogonalize(const ParamVector& v, std::span<const ParamVector> basis) {
    const double input_norm = v.norm();
    ParamVector r = v;
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) {
            if (b.size() != r.size()) throw DimensionError("orthogonalize: basis dimension mismatch");
        }
        // Classical Gram-Schmidt: all coefficients from the same iterate.
        Vector coeffs(static_cast<Eigen::Index>(basis.size()));
        for (std::size_t i = 0; i < basis.size(); ++i) coeffs[static_cast<Eigen::Index>(i)] = basis[i].dot(r);
        for (std::size_t i = 0; i < basis.size(); ++i) r -= coeffs[static_cast<Eigen::Index>(i)] * basis[i];
    }
    const bool zero = r.norm() < 1e-14 * input_norm || input_norm == 0.0;
    return {std::move(r), zero};
}

OrthoResult orthogonalize(const ParamVector& v, const Matrix& basis, Eigen::Index count) {
    if (basis.rows() != v.size()) throw DimensionError("orthogonalize: basis dimension mismatch");
    const double input_norm = v.norm();
    ParamVector r = v;
    if (count > 0) {
        const auto q = basis.leftCols(count);
        for (int pass = 0; pass < 2; ++pass) r.noalias() -= q * (q.transpose() * r);
    }
    const bool zero = r.norm() < 1e-14 * input_norm || input_norm == 0.0;
    return {std::move(r), zero};
}

Matrix orthonormal_columns(const Matrix& m) {
    Eigen::HouseholderQR<Matrix> qr(m);
    Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
    // Fix signs so that R has a positive diagonal (deterministic Haar sample).
    const Matrix& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (r(j, j) < 0) q.col(j) *= -1.0;
    return q;
}

}  // namespace spectral_damp
