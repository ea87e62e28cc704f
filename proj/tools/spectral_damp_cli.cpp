#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "spectral_damp/config.hpp"
#include "spectral_damp/harness.hpp"
#include "spectral_damp/rmt.hpp"
#include "spectral_damp/shrinkage.hpp"

namespace fs = std::filesystem;
using namespace spectral_damp;

namespace {

struct Common {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
};

Config load(const Common& c) {
    Config cfg = Config::load(c.config);
    if (c.seed) cfg.set("seeds", std::to_string(*c.seed));
    return cfg;
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "Experiment config file")->required()->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "Output directory");
    app->add_option("--seed", c.seed, "Override the seeds list with a single seed");
    app->add_option("--threads", c.threads, "Worker threads for grid cells")->check(CLI::PositiveNumber);
}

std::vector<RunMetrics> run_grid(const Common& c, const ExperimentSpec& spec) {
    const ExperimentData data = load_experiment_data(spec.dataset);
    spdlog::info("{}: {} train / {} test examples, {} cells x {} seeds", spec.name, data.train.size(), data.test.size(),
                 spec.lr_grid.size() * spec.damping_grid.size() * spec.eta_grid.size(), spec.seeds.size());
    auto metrics = run_experiment(spec, data, c.threads);
    fs::create_directories(c.out);
    emit_csv(metrics, fs::path(c.out) / "metrics.csv");
    emit_plot_script(metrics, fs::path(c.out) / "metrics.csv", fs::path(c.out) / "metrics.gp");
    return metrics;
}

int cmd_train(const Common& c) {
    const auto metrics = run_grid(c, experiment_from_config(load(c)));
    fmt::print("run_id,final_train_err,final_test_err,diverged,wall_time_s\n");
    for (const auto& m : metrics)
        fmt::print("{},{:.4f},{:.4f},{},{:.1f}\n", m.run_id, m.final_record().train_err, m.final_record().test_err,
                   m.diverged ? 1 : 0, m.wall_time);
    return 0;
}

int cmd_heatmap(const Common& c) {
    const auto metrics = run_grid(c, experiment_from_config(load(c)));
    const auto cells = heatmap_deltas(metrics);
    emit_heatmap_csv(cells, fs::path(c.out) / "heatmap.csv");
    emit_heatmap_matrix(cells, fs::path(c.out) / "heatmap.dat");
    fmt::print("delta,eta,d_train,d_test\n");
    for (const auto& cell : cells) fmt::print("{:g},{:g},{:.4f},{:.4f}\n", cell.delta, cell.eta, cell.d_train, cell.d_test);
    return 0;
}

int cmd_rmt(const Common& c) {
    const RmtConfig r = rmt_from_config(load(c));
    const auto rows = overlap_experiment(r.ensemble, r.n_seeds, r.seed, c.threads);
    fs::create_directories(c.out);
    write_overlap_csv(rows, fs::path(c.out) / "overlap.csv");

    SpikedEnsembleSpec bulk = r.ensemble;
    bulk.spikes.clear();
    const SemicircleLaw law = SemicircleLaw::from_spec(bulk);
    double ks = 0.0;
    const std::size_t n_ks = std::min<std::size_t>(r.n_seeds, 5);
    for (std::size_t i = 0; i < n_ks; ++i) {
        const Vector ev = dense_eigvalsh(sample_fluctuation(bulk, r.seed + i));
        ks += esd_ks_distance(std::vector<double>(ev.data(), ev.data() + ev.size()), law);
    }
    fmt::print("nu,s,predicted_overlap,measured_mean,measured_std\n");
    for (const auto& row : rows)
        fmt::print("{:.4f},{:.4f},{:.4f},{:.4f},{:.4f}\n", row.nu, row.s, row.predicted, row.measured_mean, row.measured_std);
    fmt::print("bulk_ks_distance_mean,{:.5f}\n", ks / static_cast<double>(n_ks));
    return 0;
}

int cmd_estimate(const Common& c) {
    const ExperimentSpec spec = experiment_from_config(load(c));
    const ExperimentData data = load_experiment_data(spec.dataset);
    ModelSpec ms = spec.model;
    ms.input_dim = static_cast<int>(data.train.input_dim());
    ms.num_classes = data.train.num_classes;
    const auto model = make_model(ms);
    const std::uint64_t seed = spec.seeds.front();
    BatchSampler sampler(data.train.size(), std::min(spec.hvar_batch_size, data.train.size()), seed);
    std::vector<Dataset> batches;
    for (const auto& idx : sampler.epoch())
        if (idx.size() == sampler.batch_size()) batches.push_back(select_rows(data.train, idx));
    const auto est = estimate_hessian_variance(*model, model->initial_params(seed), batches, spec.hvar_probes, seed);
    const double raw = std::accumulate(est.per_probe.begin(), est.per_probe.end(), 0.0) /
                       static_cast<double>(est.per_probe.size());
    const double floor = spec.damping_grid.front();
    fmt::print("sigma2_raw,delta_suggested\n{:.17g},{:.17g}\n", raw, std::max(floor, est.sigma2));
    fs::create_directories(c.out);
    std::ofstream out(fs::path(c.out) / "probes.csv");
    out << "probe,estimate\n";
    for (std::size_t i = 0; i < est.per_probe.size(); ++i) out << i << ',' << fmt::format("{:.17g}", est.per_probe[i]) << '\n';
    if (!out) throw std::runtime_error("cannot write probes.csv under '" + c.out + "'");
    return 0;
}

int cmd_stability(const Common& c) {
    const Config cfg = load(c);
    const StabilityConfig s = stability_from_config(cfg);
    fs::create_directories(c.out);
    std::ofstream out(fs::path(c.out) / "stability.csv");
    out << "target,delta,alpha,diverged\n";
    auto report = [&](double delta, const StabilityResult& r) {
        for (const auto& [a, d] : r.outcomes) out << s.target << ',' << fmt::format("{:g},{:g},{}", delta, a, d ? 1 : 0) << '\n';
        if (r.largest_stable)
            fmt::print("{} delta={:g}: largest stable lr {:g}\n", s.target, delta, *r.largest_stable);
        else
            fmt::print("{} delta={:g}: every grid value diverges\n", s.target, delta);
    };

    if (s.target == "quadratic" || s.target == "preconditioned") {
        std::vector<double> spectrum(s.dim);
        for (std::size_t i = 0; i < s.dim; ++i)
            spectrum[i] = s.lambda_max * (0.1 + 0.9 * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(s.dim - 1, 1)));
        const auto q = synthetic_quadratic(spectrum, s.seed);
        if (s.target == "quadratic") {
            report(0.0, stability_sweep([&](double a) { return quadratic_gd_diverges(q.hessian, q.w0, a, s.steps); }, s.grid));
            fmt::print("closed-form threshold 2/lambda_max = {:g}\n", 2.0 / s.lambda_max);
        } else {
            const auto eig = dense_eigh(q.hessian);
            report(s.damping, stability_sweep([&](double a) {
                       return preconditioned_quadratic_diverges(q.hessian, eig.values, eig.vectors, s.damping, q.w0, a, s.steps);
                   }, s.grid));
            fmt::print("bound = {:g}\n", stable_lr_bound(q.hessian, eig.values, eig.vectors, s.damping));
        }
        return 0;
    }
    const ExperimentSpec spec = experiment_from_config(cfg);
    const ExperimentData data = load_experiment_data(spec.dataset);
    ModelSpec ms = spec.model;
    ms.input_dim = static_cast<int>(data.train.input_dim());
    ms.num_classes = data.train.num_classes;
    const auto model = make_model(ms);
    OptimConfig oc = spec.optimizer;
    oc.kind = s.target == "adam" ? OptimizerKind::adam : OptimizerKind::sgd;
    for (double delta : spec.damping_grid) {
        oc.damping = delta;
        report(delta, stability_sweep([&](double a) { return model_run_diverges(*model, data.train, oc, a, s.steps, s.seed); },
                                      s.grid));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Damping, shrinkage and spectral diagnostics for second-order optimisers"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Debug logging");

    Common train, heat, rmt, est, stab;
    add_common(app.add_subcommand("train", "Run every grid cell and write per-epoch metrics"), train);
    add_common(app.add_subcommand("heatmap", "Run a (delta, eta) grid and write best-error deltas"), heat);
    add_common(app.add_subcommand("rmt-validate", "Monte-Carlo eigenvector overlaps and bulk fit"), rmt);
    add_common(app.add_subcommand("estimate-damping", "Hessian-variance estimate at the initial parameters"), est);
    add_common(app.add_subcommand("stability", "Largest non-diverging learning rate over a grid"), stab);

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
    try {
        if (app.got_subcommand("train")) return cmd_train(train);
        if (app.got_subcommand("heatmap")) return cmd_heatmap(heat);
        if (app.got_subcommand("rmt-validate")) return cmd_rmt(rmt);
        if (app.got_subcommand("estimate-damping")) return cmd_estimate(est);
        if (app.got_subcommand("stability")) return cmd_stability(stab);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
