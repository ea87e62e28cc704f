#pragma once

// Lanczos tridiagonalisation of a matrix-free symmetric operator.

#include <cstdint>
#include <vector>

#include "spectral_damp/linalg.hpp"
#include "spectral_damp/model.hpp"

namespace spectral_damp {

struct SpectralDecomposition {
    std::size_t dim = 0;         // P, the operator dimension
    Vector ritz_values;          // descending
    Matrix ritz_vectors;         // P x k, orthonormal columns
    Vector residuals;            // ||A phi_i - lambda_i phi_i|| estimates, |beta_k s_ki|
    std::vector<bool> flagged;   // residual > 1e-4 * ||A||
    std::size_t requested_steps = 0;
    bool breakdown = false;      // invariant subspace found before `requested_steps`

    std::size_t steps() const { return static_cast<std::size_t>(ritz_values.size()); }
    /// True when the Ritz vectors do not span the whole space.
    bool has_complement() const { return steps() < dim; }
};

/// k-step Lanczos with full (two-pass) reorthogonalisation against every
/// previous Lanczos vector. The start vector is a normalised Gaussian drawn
/// from `seed`. On breakdown the decomposition holds k' < k pairs.
SpectralDecomposition lanczos(const LinearOperator& apply, std::size_t dim, std::size_t steps,
                              std::uint64_t seed);

struct SharpSplit {
    Vector coeffs;         // phi_i^T g
    ParamVector residual;  // component of g orthogonal to span{phi_i}
};

/// g = sum_i coeffs_i phi_i + residual.
SharpSplit project_sharp(const SpectralDecomposition& decomp, const ParamVector& g);

/// sum_{i < top_n} (phi_i^T g / ||g||)^2.
double gradient_overlap(const SpectralDecomposition& decomp, const ParamVector& g, std::size_t top_n);

}  // namespace spectral_damp
