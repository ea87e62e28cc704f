#include "spectral_damp/lanczos.hpp"

#include <algorithm>
#include <cmath>

#include "spectral_damp/random.hpp"

namespace spectral_damp {

SpectralDecomposition lanczos(const LinearOperator& apply, std::size_t dim, std::size_t steps,
                              std::uint64_t seed) {
    if (dim == 0) throw DimensionError("lanczos: dimension must be positive");
    if (steps < 1 || steps > dim)
        throw std::invalid_argument("lanczos: need 1 <= steps <= dim, got steps = " + std::to_string(steps) +
                                    ", dim = " + std::to_string(dim));
    const auto p = static_cast<Eigen::Index>(dim);
    const auto k = static_cast<Eigen::Index>(steps);

    Matrix q(p, k);
    Vector alpha(k), beta(k);
    Rng rng(seed);
    q.col(0) = unit_gaussian(rng, p);

    // Running bound on ||T|| used to scale the breakdown test.
    double anorm = 0.0;
    Eigen::Index used = k;
    bool breakdown = false;

    for (Eigen::Index j = 0; j < k; ++j) {
        Vector w = apply(q.col(j));
        if (w.size() != p) throw DimensionError("lanczos: operator returned wrong dimension");
        if (!w.allFinite()) throw NonFiniteError("lanczos: operator produced non-finite values");
        alpha[j] = q.col(j).dot(w);
        w -= alpha[j] * q.col(j);
        if (j > 0) w -= beta[j - 1] * q.col(j - 1);
        // Full reorthogonalisation, two classical Gram-Schmidt passes.
        for (int pass = 0; pass < 2; ++pass) w.noalias() -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
        beta[j] = w.norm();
        anorm = std::max(anorm, std::abs(alpha[j]) + beta[j] + (j > 0 ? beta[j - 1] : 0.0));

        if (j + 1 == k) break;
        if (beta[j] <= 1e-10 * std::max(anorm, 1e-300)) {
            used = j + 1;
            breakdown = true;
            break;
        }
        q.col(j + 1) = w / beta[j];
    }

    Eigen::SelfAdjointEigenSolver<Matrix> tri;
    const Vector sub = beta.head(std::max<Eigen::Index>(used - 1, 0));
    if (used == 1) {
        Matrix t(1, 1);
        t(0, 0) = alpha[0];
        tri.compute(t);
    } else {
        tri.computeFromTridiagonal(alpha.head(used), sub, Eigen::ComputeEigenvectors);
    }
    if (tri.info() != Eigen::Success) throw ConvergenceError("lanczos: tridiagonal eigensolver failed");

    SpectralDecomposition out;
    out.dim = dim;
    out.requested_steps = steps;
    out.breakdown = breakdown;
    out.ritz_values = tri.eigenvalues().reverse();
    const Matrix s = tri.eigenvectors().rowwise().reverse();
    out.ritz_vectors.noalias() = q.leftCols(used) * s;

    const double last_beta = breakdown ? 0.0 : beta[used - 1];
    out.residuals = (last_beta * s.row(used - 1).transpose()).cwiseAbs();
    const double scale = out.ritz_values.cwiseAbs().maxCoeff();
    out.flagged.resize(static_cast<std::size_t>(used));
    for (Eigen::Index i = 0; i < used; ++i)
        out.flagged[static_cast<std::size_t>(i)] = out.residuals[i] > 1e-4 * scale;
    return out;
}

SharpSplit project_sharp(const SpectralDecomposition& decomp, const ParamVector& g) {
    if (static_cast<std::size_t>(g.size()) != decomp.dim)
        throw DimensionError("project_sharp: vector dimension does not match decomposition");
    const Matrix& phi = decomp.ritz_vectors;
    SharpSplit out;
    out.coeffs = phi.transpose() * g;
    out.residual = g - phi * out.coeffs;
    // Second pass tightens orthogonality of the residual.
    const Vector fix = phi.transpose() * out.residual;
    out.residual.noalias() -= phi * fix;
    out.coeffs += fix;
    return out;
}

double gradient_overlap(const SpectralDecomposition& decomp, const ParamVector& g, std::size_t top_n) {
    if (top_n > decomp.steps())
        throw std::invalid_argument("gradient_overlap: top_n exceeds the number of Ritz pairs");
    if (static_cast<std::size_t>(g.size()) != decomp.dim)
        throw DimensionError("gradient_overlap: vector dimension does not match decomposition");
    const double norm = g.norm();
    if (norm == 0.0) throw std::invalid_argument("gradient_overlap: zero gradient");
    const Vector c = decomp.ritz_vectors.leftCols(static_cast<Eigen::Index>(top_n)).transpose() * (g / norm);
    return c.squaredNorm();
}

}  // namespace spectral_damp
