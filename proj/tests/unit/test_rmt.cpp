#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "spectral_damp/rmt.hpp"

using namespace spectral_damp;

namespace {

SpikedEnsembleSpec ens(std::size_t p, std::size_t b, double sigma, std::vector<double> spikes = {}) {
    SpikedEnsembleSpec s;
    s.dim = p;
    s.batch_size = b;
    s.noise_scale = sigma;
    s.spikes = std::move(spikes);
    return s;
}

std::vector<double> as_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("spec validation") {
    CHECK_THROWS(ens(0, 1, 1.0).validate());
    CHECK_THROWS(ens(4, 0, 1.0).validate());
    CHECK_THROWS(ens(4, 1, -1.0).validate());
    CHECK_THROWS(ens(2, 1, 1.0, {1, 2}).validate());
    CHECK_NOTHROW(ens(4, 1, 1.0, {1}).validate());
}

TEST_CASE("zero noise gives a zero fluctuation and exact spikes") {
    CHECK(sample_fluctuation(ens(8, 4, 0.0), 1).frobenius_norm() == 0.0);
    const auto s = sample_spiked(ens(10, 4, 0.0, {3.0, -2.0}), 2);
    const Vector ev = dense_eigvalsh(s.batch);
    CHECK(ev[0] == doctest::Approx(3.0));
    CHECK(ev[9] == doctest::Approx(-2.0));
    for (int i = 1; i < 9; ++i) CHECK(std::abs(ev[i]) < 1e-12);
    const auto m = measure_overlap(s.batch, s.true_vectors, {3.0, -2.0});
    CHECK(m.overlaps[0] == doctest::Approx(1.0));
    CHECK(m.overlaps[1] == doctest::Approx(1.0));
}

TEST_CASE("fluctuation entries have zero mean") {
    const auto spec = ens(8, 4, 1.0);
    double mean = 0.0;
    const int draws = 10000;
    for (int t = 0; t < draws; ++t) mean += sample_fluctuation(spec, static_cast<std::uint64_t>(t)).dense().mean();
    mean /= draws;
    // Per-draw mean of 64 entries has std about sigma/sqrt(B)/8.
    CHECK(std::abs(mean) < 3.0 * (1.0 / std::sqrt(4.0)) / 100.0);
}

TEST_CASE("largest fluctuation eigenvalue sits near the semicircle edge") {
    const auto spec = ens(1024, 100, 1.0);
    const auto law = SemicircleLaw::from_spec(spec);
    CHECK(law.scale == doctest::Approx(std::sqrt(10.24)));
    const Vector ev = dense_eigvalsh(sample_fluctuation(spec, 3));
    CHECK(std::abs(ev[0] - law.edge()) < 0.05 * law.edge());
    CHECK(count_outliers(ev, law) == 0);
    CHECK(esd_ks_distance(as_vec(ev), law) < 0.03);
}

TEST_CASE("spike trace identity and outlier location") {
    const auto spec = ens(1024, 100, 1.0, {2.0 * std::sqrt(10.24)});
    const auto law = SemicircleLaw::from_spec(spec);
    const double nu = spec.spikes[0];
    const auto s = sample_spiked(spec, 5);
    // Same seed stream for the noise: X is reproducible from sample_fluctuation.
    const SymMatrix h_true = s.batch - [&] {
        Matrix t = nu * s.true_vectors.col(0) * s.true_vectors.col(0).transpose();
        return SymMatrix::symmetrized(t);
    }();
    CHECK(std::abs(s.batch.trace() - (nu + h_true.trace())) < 1e-9);
    const Vector ev = dense_eigvalsh(s.batch);
    const double predicted = nu + law.scale * law.scale / nu;
    CHECK(std::abs(ev[0] - predicted) < 0.05 * predicted);
    CHECK((ev.array() > law.outlier_threshold(1024)).count() == 1);
}

TEST_CASE("zero spike is indistinguishable from pure noise") {
    const auto a = dense_eigvalsh(sample_spiked(ens(400, 50, 1.0, {0.0}), 1).batch);
    const auto b = dense_eigvalsh(sample_fluctuation(ens(400, 50, 1.0), 77));
    // Two-sample KS critical value at alpha = 0.01 for n = m = 400 is about 0.115.
    CHECK(ks_two_sample(as_vec(a), as_vec(b)) < 0.115);
}

TEST_CASE("overlap prediction") {
    const auto spec = ens(1000, 100, 1.0);
    CHECK(overlap_prediction(6.0, spec) == doctest::Approx(1.0 - 10.0 / 36.0).epsilon(1e-14));
    CHECK(overlap_prediction(std::sqrt(10.0), spec) == 0.0);
    CHECK(overlap_prediction(2.0, spec) == 0.0);
    CHECK(overlap_prediction(-6.0, spec) == doctest::Approx(1.0 - 10.0 / 36.0));
    CHECK(overlap_prediction(std::sqrt(10.0) * (1 + 1e-9), spec) < 1e-8);
    CHECK(overlap_prediction(1.0, ens(1000, 100, 0.0)) == 1.0);
}

TEST_CASE("semicircle CDF") {
    const SemicircleLaw law{1.7};
    CHECK(law.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(law.cdf(2 * 1.7) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(law.cdf(-2 * 1.7) == doctest::Approx(0.0));
    CHECK(law.cdf(10.0) == 1.0);
    CHECK(law.cdf(-10.0) == 0.0);
    // x = 2s sin(t) removes the square-root endpoint behaviour.
    const double quad = oracle::simpson([&](double t) { return law.density(2 * 1.7 * std::sin(t)) * 2 * 1.7 * std::cos(t); },
                                        -M_PI / 2, std::asin(0.5), 2000);
    CHECK(std::abs(law.cdf(1.7) - quad) < 1e-8);
    // Exact value with s = 1: 0.5 + sqrt(3)/(4 pi) + 1/6.
    CHECK(SemicircleLaw{1.0}.cdf(1.0) == doctest::Approx(0.5 + std::sqrt(3.0) / (4 * M_PI) + 1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("ESD KS distance") {
    const SemicircleLaw law{1.0};
    const std::size_t p = 500;
    std::vector<double> quantiles;
    for (std::size_t i = 0; i < p; ++i) {
        const double target = (static_cast<double>(i) + 0.5) / static_cast<double>(p);
        double lo = -2.0, hi = 2.0;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            (law.cdf(mid) < target ? lo : hi) = mid;
        }
        quantiles.push_back(0.5 * (lo + hi));
    }
    CHECK(esd_ks_distance(quantiles, law) <= 1.0 / static_cast<double>(p));
    CHECK(esd_ks_distance(std::vector<double>(100, 0.0), law) == doctest::Approx(0.5));
}

TEST_CASE("overlap measurement is sign invariant and flags small spikes") {
    const auto spec = ens(300, 30, 1.0, {4.0 * std::sqrt(10.0), 0.5 * std::sqrt(10.0)});
    const auto s = sample_spiked(spec, 8);
    const auto m1 = measure_overlap(s.batch, s.true_vectors, spec.spikes);
    const auto m2 = measure_overlap(s.batch, -s.true_vectors, spec.spikes);
    CHECK(m1.overlaps[0] == doctest::Approx(m2.overlaps[0]).epsilon(1e-14));
    CHECK(m1.overlaps[0] > 0.8);
    CHECK(m1.overlaps[1] < 0.1);
}

TEST_CASE("overlap experiment is thread-count independent and writes CSV") {
    const auto spec = ens(200, 20, 1.0, {3.0 * std::sqrt(10.0)});
    const auto a = overlap_experiment(spec, 4, 10, 1);
    const auto b = overlap_experiment(spec, 4, 10, 3);
    REQUIRE(a.size() == 1);
    CHECK(a[0].measured_mean == b[0].measured_mean);
    CHECK(a[0].measured_std == b[0].measured_std);
    const auto path = std::filesystem::temp_directory_path() / "spectral_damp_overlap.csv";
    write_overlap_csv(a, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "nu,s,predicted_overlap,measured_mean,measured_std,n_seeds");
}
