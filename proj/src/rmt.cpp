#include "spectral_damp/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "spectral_damp/parallel.hpp"
#include "spectral_damp/random.hpp"

namespace spectral_damp {

void SpikedEnsembleSpec::validate() const {
    if (dim < 1) throw std::invalid_argument("SpikedEnsembleSpec: dim must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("SpikedEnsembleSpec: batch_size must be >= 1");
    if (!(noise_scale >= 0.0)) throw std::invalid_argument("SpikedEnsembleSpec: noise_scale must be >= 0");
    if (spikes.size() >= dim) throw std::invalid_argument("SpikedEnsembleSpec: spike rank must be < dim");
}

SemicircleLaw SemicircleLaw::from_spec(const SpikedEnsembleSpec& spec) {
    spec.validate();
    return {spec.noise_scale * std::sqrt(static_cast<double>(spec.dim) / static_cast<double>(spec.batch_size))};
}

double SemicircleLaw::density(double x) const {
    const double r = edge();
    if (scale <= 0.0 || std::abs(x) >= r) return 0.0;
    return std::sqrt(r * r - x * x) / (2.0 * std::numbers::pi * scale * scale);
}

double SemicircleLaw::cdf(double x) const {
    const double r = edge();
    if (scale <= 0.0) return x < 0.0 ? 0.0 : 1.0;
    if (x <= -r) return 0.0;
    if (x >= r) return 1.0;
    return 0.5 + x * std::sqrt(r * r - x * x) / (4.0 * std::numbers::pi * scale * scale) +
           std::asin(x / r) / std::numbers::pi;
}

double SemicircleLaw::outlier_threshold(std::size_t dim) const {
    return edge() + 3.0 * scale * std::pow(static_cast<double>(dim), -2.0 / 3.0);
}

SymMatrix sample_fluctuation(const SpikedEnsembleSpec& spec, std::uint64_t seed) {
    spec.validate();
    const auto p = static_cast<Eigen::Index>(spec.dim);
    SymMatrix x(spec.dim);
    if (spec.noise_scale == 0.0) return x;
    const double sd = spec.noise_scale / std::sqrt(static_cast<double>(spec.batch_size));
    Rng rng(seed);
    std::normal_distribution<double> normal;
    Matrix m(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) m(i, j) = sd * normal(rng);
        m(j, j) = std::numbers::sqrt2 * sd * normal(rng);
    }
    return SymMatrix::from_upper(m);
}

SpikedSample sample_spiked(const SpikedEnsembleSpec& spec, std::uint64_t seed) {
    spec.validate();
    const auto p = static_cast<Eigen::Index>(spec.dim);
    const auto r = static_cast<Eigen::Index>(spec.spikes.size());
    SpikedSample out;
    Rng rng(derive_seed(seed, 1));
    out.true_vectors = r > 0 ? orthonormal_columns(gaussian_matrix(rng, p, r)) : Matrix(p, 0);
    const Vector nu = Eigen::Map<const Vector>(spec.spikes.data(), r);
    Matrix h = out.true_vectors * nu.asDiagonal() * out.true_vectors.transpose();
    h += sample_fluctuation(spec, derive_seed(seed, 2)).dense();
    out.batch = SymMatrix::from_upper(h);
    return out;
}

double overlap_prediction(double nu, const SpikedEnsembleSpec& spec) {
    spec.validate();
    const double s = SemicircleLaw::from_spec(spec).scale;
    if (std::abs(nu) <= s) return 0.0;
    return 1.0 - (s / nu) * (s / nu);
}

OverlapMeasurement measure_overlap(const SymMatrix& batch, const Matrix& true_vectors,
                                   const std::vector<double>& spikes) {
    if (static_cast<std::size_t>(true_vectors.cols()) != spikes.size())
        throw DimensionError("measure_overlap: one true vector per spike required");
    if (static_cast<std::size_t>(true_vectors.rows()) != batch.dim())
        throw DimensionError("measure_overlap: true vectors do not match matrix dimension");
    const auto eig = dense_eigh(batch);
    const auto p = static_cast<Eigen::Index>(batch.dim());

    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < spikes.size(); ++i) (spikes[i] >= 0.0 ? pos : neg).push_back(i);
    std::stable_sort(pos.begin(), pos.end(), [&](auto a, auto b) { return spikes[a] > spikes[b]; });
    std::stable_sort(neg.begin(), neg.end(), [&](auto a, auto b) { return spikes[a] < spikes[b]; });

    OverlapMeasurement out;
    out.overlaps.assign(spikes.size(), 0.0);
    auto pair = [&](std::size_t spike, Eigen::Index col) {
        const double c = true_vectors.col(static_cast<Eigen::Index>(spike)).dot(eig.vectors.col(col));
        out.overlaps[spike] = c * c;
        const double lam = eig.values[col];
        if ((col > 0 && std::abs(eig.values[col - 1] - lam) < 1e-8) ||
            (col + 1 < p && std::abs(eig.values[col + 1] - lam) < 1e-8))
            out.degenerate = true;
    };
    for (std::size_t k = 0; k < pos.size(); ++k) pair(pos[k], static_cast<Eigen::Index>(k));
    for (std::size_t k = 0; k < neg.size(); ++k) pair(neg[k], p - 1 - static_cast<Eigen::Index>(k));
    return out;
}

double esd_ks_distance(std::vector<double> eigenvalues, const SemicircleLaw& law) {
    if (eigenvalues.empty()) throw std::invalid_argument("esd_ks_distance: empty spectrum");
    std::sort(eigenvalues.begin(), eigenvalues.end());
    const auto n = static_cast<double>(eigenvalues.size());
    double d = 0.0;
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
        const double f = law.cdf(eigenvalues[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const auto na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

std::size_t count_outliers(const Vector& eigenvalues, const SemicircleLaw& law) {
    const double t = law.outlier_threshold(static_cast<std::size_t>(eigenvalues.size()));
    return static_cast<std::size_t>((eigenvalues.array().abs() > t).count());
}

std::vector<OverlapRow> overlap_experiment(const SpikedEnsembleSpec& spec, std::size_t n_seeds,
                                           std::uint64_t seed, unsigned threads) {
    spec.validate();
    if (n_seeds == 0) throw std::invalid_argument("overlap_experiment: need at least one seed");
    std::vector<std::vector<double>> measured(n_seeds);
    parallel_for(n_seeds, threads, [&](std::size_t i) {
        const auto sample = sample_spiked(spec, seed + i);
        measured[i] = measure_overlap(sample.batch, sample.true_vectors, spec.spikes).overlaps;
    });

    const double s = SemicircleLaw::from_spec(spec).scale;
    std::vector<OverlapRow> rows;
    for (std::size_t k = 0; k < spec.spikes.size(); ++k) {
        double mean = 0.0;
        for (const auto& m : measured) mean += m[k];
        mean /= static_cast<double>(n_seeds);
        double var = 0.0;
        for (const auto& m : measured) var += (m[k] - mean) * (m[k] - mean);
        var = n_seeds > 1 ? var / static_cast<double>(n_seeds - 1) : 0.0;
        rows.push_back({spec.spikes[k], s, overlap_prediction(spec.spikes[k], spec), mean, std::sqrt(var), n_seeds});
    }
    return rows;
}

void write_overlap_csv(const std::vector<OverlapRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "nu,s,predicted_overlap,measured_mean,measured_std,n_seeds\n";
    for (const auto& r : rows)
        out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", r.nu, r.s, r.predicted,
                           r.measured_mean, r.measured_std, r.n_seeds);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace spectral_damp
