#pragma once

#include <cstdint>
#include <random>

#include "spectral_damp/linalg.hpp"

namespace spectral_damp {

using Rng = std::mt19937_64;

inline Vector gaussian_vector(Rng& rng, Eigen::Index n) {
    std::normal_distribution<double> normal;
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
}

inline Matrix gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> normal;
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    return m;
}

/// Gaussian direction normalised to unit length.
inline Vector unit_gaussian(Rng& rng, Eigen::Index n) {
    Vector v = gaussian_vector(rng, n);
    return v / v.norm();
}

/// Derives an independent stream seed (splitmix64 finaliser).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace spectral_damp
