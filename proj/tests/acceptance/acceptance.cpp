// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit code is
// the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include "oracles.hpp"
#include "spectral_damp/data.hpp"
#include "spectral_damp/harness.hpp"
#include "spectral_damp/lanczos.hpp"
#include "spectral_damp/linalg.hpp"
#include "spectral_damp/model.hpp"
#include "spectral_damp/optim.hpp"
#include "spectral_damp/random.hpp"
#include "spectral_damp/rmt.hpp"
#include "spectral_damp/shrinkage.hpp"

using namespace spectral_damp;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;
std::vector<int> g_only;  // criteria selected on the command line; empty runs all

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
    if (!g_only.empty() && std::find(g_only.begin(), g_only.end(), id) == g_only.end()) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++g_failures;
    fmt::print("{} criterion {:2d} {} [{:.1f}s] {}\n", o.pass ? "PASS" : "FAIL", id, title, secs, o.detail);
    std::fflush(stdout);
}

// ---------------------------------------------------------------- 1
Outcome shrinkage_identity() {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        double lambda = u(rng), delta = u(rng);
        if (lambda == 0.0) lambda = 10.0;
        if (delta == 0.0) delta = 10.0;
        const auto sp = shrinkage_from_delta(delta);
        const double lhs = 1.0 / (lambda + delta);
        const double rhs = (1.0 / sp.kappa) / (sp.beta * lambda + 1.0 - sp.beta);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return {worst < 1e-12, fmt::format("max |diff| = {:.3g}", worst)};
}

// ---------------------------------------------------------------- 2
Outcome optimal_shrinkage() {
    bool ok = true;
    std::string detail;
    for (double mu2 : {0.1, 1.0, 3.0, 10.0}) {
        double best_b = 0.0, best_e = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 10000; ++i) {
            const double b = i * 1e-4;
            const double e = b * b * mu2 + (1.0 - b) * (1.0 - b);
            if (e < best_e) best_e = e, best_b = b;
        }
        const double closed = optimal_damping(mu2).beta;
        ok = ok && std::abs(closed - best_b) <= 1e-3;
        detail += fmt::format("mu2={:g}: beta*={:.4f} grid={:.4f}; ", mu2, closed, best_b);
    }

    // Low-rank truth plus Wigner noise.
    SpikedEnsembleSpec spec{512, 512, 1.0, {5.0, 3.0, 2.0}};
    const auto sample = sample_spiked(spec, 7);
    const Eigen::Index p = 512;
    Matrix h_true = Matrix::Zero(p, p);
    for (std::size_t i = 0; i < spec.spikes.size(); ++i) {
        const Vector th = sample.true_vectors.col(static_cast<Eigen::Index>(i));
        h_true += spec.spikes[i] * th * th.transpose();
    }
    const Matrix noisy = sample.batch.dense();
    const Matrix x = noisy - h_true;
    const double mu2 = (x * x).trace() / static_cast<double>(p);
    const double beta_star = 1.0 / (1.0 + mu2);

    double best_b = 0.0, best_e = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 20; ++i) {
        const double b = i * 0.05;
        const Matrix d = b * noisy + (1.0 - b) * Matrix::Identity(p, p) - h_true;
        const double e = (d * d).trace() / static_cast<double>(p);
        if (e < best_e) best_e = e, best_b = b;
    }
    const bool sim_ok = std::abs(best_b - beta_star) <= 0.05 + 1e-12;
    detail += fmt::format("simulated P=512: mu2={:.4f} beta*={:.4f} grid argmin={:.2f}", mu2, beta_star, best_b);
    return {ok && sim_ok, detail};
}

// ---------------------------------------------------------------- 3
Outcome overlap_law() {
    SpikedEnsembleSpec spec{1024, 100, 1.0, {}};
    const double s = std::sqrt(10.24);
    const std::vector<double> ratios{1.5, 2.0, 3.0, 5.0, 0.8};
    for (double r : ratios) spec.spikes.push_back(r * s);
    const auto rows = overlap_experiment(spec, 20, 1000);
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double nu_over_s = ratios[i];
        const double predicted = nu_over_s > 1.0 ? 1.0 - 1.0 / (nu_over_s * nu_over_s) : 0.0;
        if (nu_over_s > 1.0) {
            ok = ok && std::abs(rows[i].measured_mean - predicted) <= 0.05;
        } else {
            ok = ok && rows[i].measured_mean < 10.0 / 1024.0 * 5.0;
        }
        detail += fmt::format("nu/s={:g}: {:.3f} (pred {:.3f}); ", nu_over_s, rows[i].measured_mean, predicted);
    }
    return {ok, detail};
}

// ---------------------------------------------------------------- 4
double semicircle_cdf_oracle(double x, double s) {
    const double r = 2.0 * s;
    if (x <= -r) return 0.0;
    if (x >= r) return 1.0;
    const double u = x / r;
    return 0.5 + (u * std::sqrt(1.0 - u * u) + std::asin(u)) / M_PI;
}

Outcome semicircle_bulk() {
    SpikedEnsembleSpec spec{1024, 100, 1.0, {}};
    const double s = std::sqrt(1024.0 / 100.0);
    double total = 0.0;
    std::string detail;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Vector ev = dense_eigvalsh(sample_fluctuation(spec, 500 + seed));
        std::vector<double> e(ev.data(), ev.data() + ev.size());
        std::sort(e.begin(), e.end());
        const double n = static_cast<double>(e.size());
        double ks = 0.0;
        for (std::size_t i = 0; i < e.size(); ++i) {
            const double f = semicircle_cdf_oracle(e[i], s);
            ks = std::max({ks, std::abs((i + 1) / n - f), std::abs(i / n - f)});
        }
        total += ks;
        detail += fmt::format("{:.4f} ", ks);
    }
    const double mean = total / 5.0;
    return {mean < 0.03, fmt::format("mean KS = {:.4f} (per seed: {})", mean, detail)};
}

// ---------------------------------------------------------------- 5
Outcome lanczos_fidelity() {
    const std::size_t p = 300;
    // Wigner matrix with five planted, well separated outliers in a random basis.
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    Matrix a(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) a(i, j) = a(j, i) = nd(rng) / std::sqrt(static_cast<double>(p));
    Matrix g(p, 5);
    for (Eigen::Index j = 0; j < 5; ++j)
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(p); ++i) g(i, j) = nd(rng);
    const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(p, 5);
    const double spikes[5] = {20.0, 15.0, 11.0, 8.0, 6.0};
    for (int j = 0; j < 5; ++j) a += spikes[j] * q.col(j) * q.col(j).transpose();
    const SymMatrix h = SymMatrix::symmetrized(a);

    oracle::Mat am(p, oracle::Vec(p));
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) am[i][j] = h(i, j);
    const oracle::Vec exact = oracle::jacobi_eigenvalues(am);
    const Vector library = dense_eigvalsh(h);

    LinearOperator op = [&h](const Vector& v) -> Vector { return h.dense() * v; };
    const auto d50 = lanczos(op, p, 50, 3);
    double top_err = 0.0;
    for (int i = 0; i < 5; ++i)
        top_err = std::max(top_err, std::abs(d50.ritz_values[i] - exact[i]) / std::abs(exact[i]));

    const auto dfull = lanczos(op, p, p, 3);
    double full_err = 0.0;
    if (dfull.steps() != p) full_err = std::numeric_limits<double>::infinity();
    else
        for (std::size_t i = 0; i < p; ++i) full_err = std::max(full_err, std::abs(dfull.ritz_values[i] - exact[i]));
    double dense_err = 0.0;
    for (std::size_t i = 0; i < p; ++i) dense_err = std::max(dense_err, std::abs(library[i] - exact[i]));

    return {top_err < 1e-6 && full_err < 1e-10,
            fmt::format("top-5 rel err (k=50) = {:.2e}; full spectrum abs err (k=P) = {:.2e}; dense_eigh vs Jacobi = {:.2e}",
                        top_err, full_err, dense_err)};
}

// ---------------------------------------------------------------- 6
// Explicit softmax-regression Hessian: block (k, l) = (1/n) X~^T diag(p_k (1[k=l] - p_l)) X~,
// parameter index k (d + 1) + j.
Matrix softmax_hessian_oracle(const Matrix& w_mat, const Dataset& batch) {
    const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
    const Eigen::Index d = batch.input_dim(), c = batch.num_classes;
    Matrix xt(n, d + 1);
    xt.leftCols(d) = batch.inputs;
    xt.col(d).setOnes();
    Matrix prob = xt * w_mat;  // n x C logits
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mx = prob.row(i).maxCoeff();
        double z = 0.0;
        for (Eigen::Index k = 0; k < c; ++k) z += (prob(i, k) = std::exp(prob(i, k) - mx));
        prob.row(i) /= z;
    }
    const Eigen::Index p = (d + 1) * c;
    Matrix hess = Matrix::Zero(p, p);
    for (Eigen::Index k = 0; k < c; ++k)
        for (Eigen::Index l = k; l < c; ++l) {
            Vector a(n);
            for (Eigen::Index i = 0; i < n; ++i) a[i] = prob(i, k) * ((k == l ? 1.0 : 0.0) - prob(i, l));
            const Matrix block = xt.transpose() * a.asDiagonal() * xt / static_cast<double>(n);
            hess.block(k * (d + 1), l * (d + 1), d + 1, d + 1) = block;
            hess.block(l * (d + 1), k * (d + 1), d + 1, d + 1) = block.transpose();
        }
    return hess;
}

Outcome variance_estimator() {
    const Dataset full = downsample(load_named("mnist", Split::train), 28, 4);  // 7x7, d = 49
    const std::size_t n_batches = 20, bsz = 128;
    const Dataset pool = subsample(full, n_batches * bsz, 21);
    std::vector<Dataset> batches;
    for (std::size_t b = 0; b < n_batches; ++b) {
        std::vector<std::size_t> idx(bsz);
        for (std::size_t i = 0; i < bsz; ++i) idx[i] = b * bsz + i;
        batches.push_back(select_rows(pool, idx));
    }
    SoftmaxRegression model(49, 10);
    const std::size_t p = model.param_count();

    // Evaluate away from the symmetric start: a few GD steps on the pooled data.
    ParamVector w = model.initial_params(0);
    for (int t = 0; t < 50; ++t) w -= 1.0 * model.loss_grad(w, pool).gradient;

    const Matrix w_mat = Eigen::Map<const Matrix>(w.data(), 50, 10);
    std::vector<Matrix> hs;
    Matrix mean = Matrix::Zero(p, p);
    for (const auto& b : batches) {
        hs.push_back(softmax_hessian_oracle(w_mat, b));
        mean += hs.back();
    }
    mean /= static_cast<double>(n_batches);
    Matrix m = Matrix::Zero(p, p);
    for (const auto& h : hs) m += (h - mean) * (h - mean);
    m /= static_cast<double>(n_batches);
    const double oracle_val = m.trace() / static_cast<double>(p);

    const auto est = estimate_hessian_variance(model, w, batches, 16, 5);
    const double rel = std::abs(est.sigma2 - oracle_val) / oracle_val;
    const double eff_rank = m.trace() * m.trace() / (m * m).trace();
    return {rel < 0.15, fmt::format("P={} sigma2_hat={:.4e} oracle={:.4e} rel err={:.3f} (effective rank {:.1f})", p,
                                    est.sigma2, oracle_val, rel, eff_rank)};
}

// ---------------------------------------------------------------- 8
// Smallest alpha in [lo, hi] for which `diverges` holds, by bisection.
double onset(const std::function<bool(double)>& diverges, double lo, double hi) {
    for (int i = 0; i < 60; ++i) {
        const double mid = std::sqrt(lo * hi);
        (diverges(mid) ? hi : lo) = mid;
    }
    return hi;
}

Outcome stability_bound() {
    bool ok = true;
    std::string detail;
    const std::size_t dim = 50;
    const long steps = 4000;
    for (double lmax : {1.0, 4.0, 10.0}) {
        std::vector<double> spectrum(dim);
        for (std::size_t i = 0; i < dim; ++i) spectrum[i] = lmax * (0.1 + 0.9 * i / (dim - 1.0));
        const auto q = synthetic_quadratic(spectrum, 40 + static_cast<std::uint64_t>(lmax));

        const double gd = onset([&](double a) { return quadratic_gd_diverges(q.hessian, q.w0, a, steps); },
                                0.02 / lmax, 200.0 / lmax);
        const double gd_rel = std::abs(gd - 2.0 / lmax) / (2.0 / lmax);

        // Preconditioner from a noisy copy of H.
        std::mt19937_64 rng(90 + static_cast<std::uint64_t>(lmax));
        std::normal_distribution<double> nd;
        Matrix noise(dim, dim);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = i; j < dim; ++j) noise(i, j) = noise(j, i) = nd(rng);
        noise *= 0.02 * lmax / std::sqrt(static_cast<double>(dim));
        const auto est = dense_eigh(SymMatrix::symmetrized(q.hessian.dense() + noise));
        const Vector eigs = est.values.cwiseMax(0.0);
        const double delta = 0.05 * lmax;
        const double bound = stable_lr_bound(q.hessian, eigs, est.vectors, delta);
        const double pre = onset(
            [&](double a) {
                return preconditioned_quadratic_diverges(q.hessian, eigs, est.vectors, delta, q.w0, a, steps);
            },
            bound / 100.0, bound * 100.0);
        const double pre_rel = std::abs(pre - bound) / bound;

        ok = ok && gd_rel <= 0.10 && pre_rel <= 0.25;
        detail += fmt::format("lmax={:g}: GD onset {:.4f} vs {:.4f} ({:.1f}%), damped onset {:.4f} vs bound {:.4f} ({:.1f}%); ",
                              lmax, gd, 2.0 / lmax, 100 * gd_rel, pre, bound, 100 * pre_rel);
    }
    return {ok, detail};
}

// ---------------------------------------------------------------- 10
double linear_decay_oracle(double a0, double r, double u) {
    if (u <= 0.5) return a0;
    if (u <= 0.9) return a0 * (1.0 - (1.0 - r) * (u - 0.5) / 0.4);
    return a0 * r;
}

double warmup_oracle(double a0, double r, double kappa, double u) {
    if (u <= 0.1) return a0;
    if (u <= 0.3) return a0 * (1.0 + (kappa - 1.0) * (u - 0.1) / 0.2);
    if (u <= 0.9) return a0 * (kappa - (kappa - r) * (u - 0.3) / 0.6);
    return a0 * r;
}

Outcome schedules() {
    const double a0 = 0.1, r = 0.01, kappa = 5.0, total = 200.0;
    ScheduleSpec lin{ScheduleKind::linear_decay, a0, total, r, kappa};
    ScheduleSpec warm{ScheduleKind::warmup, a0, total, r, kappa};
    ScheduleSpec flat{ScheduleKind::flat, a0, total, r, kappa};
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double u = i / 99.0, t = u * total;
        worst = std::max(worst, std::abs(schedule_lr(lin, t) - linear_decay_oracle(a0, r, u)));
        worst = std::max(worst, std::abs(schedule_lr(warm, t) - warmup_oracle(a0, r, kappa, u)));
        worst = std::max(worst, std::abs(schedule_lr(flat, t) - a0));
    }
    // Continuity: left and right limits at each breakpoint agree.
    double jump = 0.0;
    const double eps = 1e-9;
    for (double b : {0.5, 0.9})
        jump = std::max(jump, std::abs(schedule_lr(lin, (b - eps) * total) - schedule_lr(lin, (b + eps) * total)));
    for (double b : {0.1, 0.3, 0.9})
        jump = std::max(jump, std::abs(schedule_lr(warm, (b - eps) * total) - schedule_lr(warm, (b + eps) * total)));
    return {worst < 1e-12 && jump < 1e-6,
            fmt::format("max |diff| = {:.2e}; max breakpoint jump = {:.2e}", worst, jump)};
}

// ---------------------------------------------------------------- 7 and 9
ExperimentSpec mnist_spec() {
    ExperimentSpec spec;
    spec.name = "mnist";
    spec.dataset.name = "mnist";
    spec.dataset.n_train = 1000;
    spec.dataset.n_test = 10000;
    spec.dataset.seed = 0;
    spec.model.kind = ModelKind::softmax_regression;
    spec.optimizer.kind = OptimizerKind::lanczos_opt;
    spec.optimizer.lanczos_steps = 50;
    spec.optimizer.momentum = 0.0;
    spec.schedule.kind = ScheduleKind::flat;
    spec.epochs = 500;
    spec.seeds = {0};
    spec.trace_every = 10;
    return spec;
}

const ExperimentData& mnist_data() {
    static const ExperimentData data = load_experiment_data(mnist_spec().dataset);
    return data;
}

std::map<std::pair<double, double>, RunMetrics>& lopt_grid() {
    static std::map<std::pair<double, double>, RunMetrics> cells;
    return cells;
}

const RunMetrics& lopt_cell(double delta, double eta) {
    auto& cells = lopt_grid();
    const auto key = std::make_pair(delta, eta);
    auto it = cells.find(key);
    if (it == cells.end()) {
        const RunMetrics m = run_cell(mnist_spec(), mnist_data(), 0.01, delta, eta, 0);
        spdlog::info("{}: final train_err={:.4f} test_err={:.4f} ({:.0f}s)", m.run_id, m.final_record().train_err,
                     m.final_record().test_err, m.wall_time);
        it = cells.emplace(key, m).first;
    }
    return it->second;
}

Outcome mnist_reproduction() {
    const std::vector<double> deltas{1.0, 1e-1, 1e-2, 1e-3};
    const std::vector<double> etas{1.0, 3.0, 10.0};
    for (double d : deltas)
        for (double e : etas) lopt_cell(d, e);

    std::string detail = "(a) eta=1 train/test:";
    bool a_ok = true;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const auto& r = lopt_cell(deltas[i], 1.0).final_record();
        detail += fmt::format(" d={:g}: {:.4f}/{:.4f}", deltas[i], r.train_err, r.test_err);
        if (i == 0) continue;
        const auto& prev = lopt_cell(deltas[i - 1], 1.0).final_record();
        const bool test_up = r.test_err > prev.test_err;
        const bool train_ok = r.train_err <= prev.train_err || std::abs(r.train_err - prev.train_err) < 0.005;
        a_ok = a_ok && test_up && train_ok;
    }

    detail += "; (b) test-minus-train degradation at eta=10:";
    bool b_ok = true;
    for (double d : deltas) {
        const auto& base = lopt_cell(d, 1.0).final_record();
        const auto& pert = lopt_cell(d, 10.0).final_record();
        const double gap = (pert.test_err - base.test_err) - (pert.train_err - base.train_err);
        b_ok = b_ok && gap > 0.0;
        detail += fmt::format(" d={:g}: {:+.4f}", d, gap);
    }

    ExperimentSpec gd = mnist_spec();
    gd.optimizer.kind = OptimizerKind::sgd;
    gd.optimizer.momentum = 0.0;
    const RunMetrics gd_run = run_cell(gd, mnist_data(), 0.01, 0.0, 1.0, 0);
    spdlog::info("{}: final train_err={:.4f} test_err={:.4f}", gd_run.run_id, gd_run.final_record().train_err,
                 gd_run.final_record().test_err);
    const auto lopt_epochs = lopt_cell(1e-3, 1.0).epochs_to_train_error(0.05);
    const auto gd_epochs = gd_run.epochs_to_train_error(0.05);
    const bool c_ok = lopt_epochs && (!gd_epochs || *lopt_epochs <= *gd_epochs);
    auto show = [](const std::optional<long>& e) { return e ? std::to_string(*e) : std::string("never"); };
    detail += fmt::format("; (c) epochs to 5% train error: LanczosOPT d=1e-3 {} vs GD {}", show(lopt_epochs),
                          show(gd_epochs));
    detail += fmt::format("; parts a/b/c = {}/{}/{}", a_ok ? "ok" : "fail", b_ok ? "ok" : "fail",
                          c_ok ? "ok" : "fail");
    return {a_ok && b_ok && c_ok, detail};
}

// Minibatch steps so that the damping controller sees many update intervals.
constexpr std::size_t kAutoBatch = 128;
constexpr long kAutoInterval = 100;
constexpr bool kAutoStrictFloor = false;

Outcome auto_damping() {
    const double alpha = 0.01;
    const std::vector<double> floors{alpha, 3 * alpha, 10 * alpha};
    ExperimentSpec flat = mnist_spec();
    flat.batch_size = kAutoBatch;
    ExperimentSpec spec = flat;
    spec.auto_damp = true;
    spec.strict_floor = kAutoStrictFloor;
    spec.update_interval = kAutoInterval;
    spec.ema_coeff = 0.7;

    bool complete = true;
    double lo = 1.0, hi = 0.0;
    std::string detail = "auto:";
    for (double f : floors) {
        const RunMetrics m = run_cell(spec, mnist_data(), alpha, f, 1.0, 0);
        const auto& r = m.final_record();
        const bool done = !m.diverged && r.epoch == spec.epochs;
        complete = complete && done;
        lo = std::min(lo, r.test_err);
        hi = std::max(hi, r.test_err);
        detail += fmt::format(" d*={:g}: test {:.4f} final delta {:.3g}{}", f, r.test_err, r.delta,
                              done ? "" : " (incomplete)");
        spdlog::info("{}: final train_err={:.4f} test_err={:.4f} delta={:.4g}", m.run_id, r.train_err, r.test_err,
                     r.delta);
    }
    const bool spread_ok = hi - lo <= 0.01;

    bool flat_worse = false;
    detail += "; flat:";
    for (double f : floors) {
        const RunMetrics m = run_cell(flat, mnist_data(), alpha, f, 1.0, 0);
        const bool worse = m.diverged || m.final_record().test_err > hi;
        flat_worse = flat_worse || worse;
        detail += fmt::format(" d={:g}: test {:.4f}{}", f, m.final_record().test_err, m.diverged ? " (diverged)" : "");
        spdlog::info("{}: final train_err={:.4f} test_err={:.4f}", m.run_id, m.final_record().train_err,
                     m.final_record().test_err);
    }
    detail += fmt::format("; auto spread {:.4f}; parts complete/spread/flat-worse = {}/{}/{}", hi - lo,
                          complete ? "ok" : "fail", spread_ok ? "ok" : "fail", flat_worse ? "ok" : "fail");
    return {complete && spread_ok && flat_worse, detail};
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) g_only.push_back(std::stoi(argv[i]));
    spdlog::set_level(spdlog::level::info);
    report(1, "shrinkage identity", shrinkage_identity);
    report(2, "optimal shrinkage", optimal_shrinkage);
    report(3, "outlier overlap law", overlap_law);
    report(4, "semicircle bulk", semicircle_bulk);
    report(5, "Lanczos fidelity", lanczos_fidelity);
    report(6, "Hessian-variance estimator", variance_estimator);
    report(7, "MNIST logistic (delta, eta) study", mnist_reproduction);
    report(8, "stability bound", stability_bound);
    report(9, "auto-damping insensitivity", auto_damping);
    report(10, "learning-rate schedules", schedules);
    fmt::print("{} criteria failed\n", g_failures);
    return g_failures;
}
