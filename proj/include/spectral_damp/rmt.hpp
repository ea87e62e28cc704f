#pragma once

// Random-matrix checks: the semicircle law, spiked Wigner ensembles and the
// outlier eigenvector overlap law.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "spectral_damp/linalg.hpp"

namespace spectral_damp {

/// Rank-r spikes on top of Wigner noise with entry variance sigma^2 / B.
struct SpikedEnsembleSpec {
    std::size_t dim = 1;         // P
    std::size_t batch_size = 1;  // B
    double noise_scale = 0.0;    // sigma, per-element sampling noise
    std::vector<double> spikes;  // nu_i

    void validate() const;
};

/// Semicircle of radius 2s with s = sigma * sqrt(P / B).
struct SemicircleLaw {
    double scale = 0.0;

    static SemicircleLaw from_spec(const SpikedEnsembleSpec& spec);
    double edge() const { return 2.0 * scale; }
    double density(double x) const;
    double cdf(double x) const;
    /// Outlier threshold: edge plus a Tracy-Widom buffer of 3 s P^(-2/3).
    double outlier_threshold(std::size_t dim) const;
};

/// Symmetric noise: i.i.d. N(0, sigma^2/B) off the diagonal, N(0, 2 sigma^2/B) on it.
SymMatrix sample_fluctuation(const SpikedEnsembleSpec& spec, std::uint64_t seed);

struct SpikedSample {
    SymMatrix batch;      // H_true + X
    Matrix true_vectors;  // P x r, column i is theta_i (pairs with spikes[i])
};

/// H_true = sum nu_i theta_i theta_i^T with Haar-random orthonormal theta_i,
/// plus an independent sample_fluctuation draw.
SpikedSample sample_spiked(const SpikedEnsembleSpec& spec, std::uint64_t seed);

/// Limiting |theta_i^T phi_i|^2: 1 - P sigma^2 / (B nu^2) above threshold, else 0.
double overlap_prediction(double nu, const SpikedEnsembleSpec& spec);

struct OverlapMeasurement {
    std::vector<double> overlaps;  // one per spike, same order as spec.spikes
    bool degenerate = false;       // two paired eigenvalues closer than 1e-8
};

/// Pairs positive spikes (descending) with the top eigenvectors and negative
/// spikes (ascending) with the bottom ones, then returns |theta_i^T phi_i|^2.
OverlapMeasurement measure_overlap(const SymMatrix& batch, const Matrix& true_vectors,
                                   const std::vector<double>& spikes);

/// sup_x |F_empirical(x) - F_semicircle(x)|.
double esd_ks_distance(std::vector<double> eigenvalues, const SemicircleLaw& law);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Number of eigenvalues beyond +-outlier_threshold.
std::size_t count_outliers(const Vector& eigenvalues, const SemicircleLaw& law);

struct OverlapRow {
    double nu = 0.0;
    double s = 0.0;
    double predicted = 0.0;
    double measured_mean = 0.0;
    double measured_std = 0.0;
    std::size_t n_seeds = 0;
};

/// Monte-Carlo check of the overlap law: all spikes in `spec` are planted
/// together; repetition i uses seed + i. Repetitions are spread over
/// `threads` workers; the result does not depend on the thread count.
std::vector<OverlapRow> overlap_experiment(const SpikedEnsembleSpec& spec, std::size_t n_seeds,
                                           std::uint64_t seed, unsigned threads = 1);

/// CSV columns: nu,s,predicted_overlap,measured_mean,measured_std,n_seeds
void write_overlap_csv(const std::vector<OverlapRow>& rows, const std::filesystem::path& path);

}  // namespace spectral_damp
