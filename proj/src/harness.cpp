#include "spectral_damp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "spectral_damp/parallel.hpp"
#include "spectral_damp/random.hpp"

namespace spectral_damp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kHvarStream = 0x4876;
constexpr std::uint64_t kBatchStream = 0x4261;
constexpr std::uint64_t kOptimStream = 0x4f70;
constexpr std::uint64_t kTraceStream = 0x5472;

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::string num(double x) { return fmt::format("{:.17g}", x); }

std::string make_run_id(OptimizerKind kind, double lr, double delta, double eta, std::uint64_t seed, bool autod) {
    return fmt::format("{}_lr{:g}_d{:g}_e{:g}_s{}{}", to_string(kind), lr, delta, eta, seed, autod ? "_auto" : "");
}

double best_of(const std::vector<EpochRecord>& recs, double EpochRecord::*field) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : recs)
        if (std::isfinite(r.*field)) best = std::min(best, r.*field);
    return std::isfinite(best) ? best : 1.0;
}

}  // namespace

ExperimentData load_experiment_data(const DatasetSpec& spec) {
    if (spec.n_train == 0) throw std::invalid_argument("DatasetSpec: n_train must be >= 1");
    if (spec.pool < 1) throw std::invalid_argument("DatasetSpec: pool must be >= 1");
    ExperimentData out;
    if (spec.name == "synthetic") {
        const std::size_t n_test = std::max<std::size_t>(spec.n_test, 1);
        Dataset all = synthetic_classification(spec.n_train + n_test, spec.synthetic_dim, spec.synthetic_classes,
                                               spec.synthetic_separation, spec.seed);
        std::vector<std::size_t> tr(spec.n_train), te(n_test);
        for (std::size_t i = 0; i < spec.n_train; ++i) tr[i] = i;
        for (std::size_t i = 0; i < n_test; ++i) te[i] = spec.n_train + i;
        out.train = select_rows(all, tr);
        out.test = select_rows(all, te);
        return out;
    }
    const Dataset train_full = load_named(spec.name, Split::train);
    const Dataset test_full = load_named(spec.name, Split::test);
    out.train = subsample(train_full, spec.n_train, spec.seed);
    if (spec.n_test == 0 || spec.n_test >= test_full.size()) {
        out.test = test_full;
    } else {
        out.test = subsample(test_full, spec.n_test, derive_seed(spec.seed, 1));
    }
    if (spec.pool > 1) {
        out.train = downsample(out.train, 28, spec.pool);
        out.test = downsample(out.test, 28, spec.pool);
    }
    return out;
}

void ExperimentSpec::validate() const {
    if (lr_grid.empty() || damping_grid.empty() || eta_grid.empty())
        throw std::invalid_argument("ExperimentSpec: every grid must be nonempty");
    if (seeds.empty()) throw std::invalid_argument("ExperimentSpec: at least one seed is required");
    if (epochs < 1) throw std::invalid_argument("ExperimentSpec: epochs must be >= 1");
    if (trace_every < 1) throw std::invalid_argument("ExperimentSpec: trace_every must be >= 1");
    for (double lr : lr_grid)
        if (!(lr > 0.0)) throw std::invalid_argument("ExperimentSpec: learning rates must be > 0");
    for (double d : damping_grid)
        if (!(d >= 0.0)) throw std::invalid_argument("ExperimentSpec: damping values must be >= 0");
    for (double e : eta_grid)
        if (!(e >= 1.0)) throw std::invalid_argument("ExperimentSpec: eta values must be >= 1");
    if (auto_damp) {
        DampingState::with_floor(std::max(damping_grid.front(), 1e-300), ema_coeff, update_interval, strict_floor);
        if (hvar_batch_size < 1 || hvar_probes < 1)
            throw std::invalid_argument("ExperimentSpec: variance estimator needs batch size and probes >= 1");
    }
    ScheduleSpec s = schedule;
    s.base_lr = lr_grid.front();
    s.total_epochs = static_cast<double>(epochs);
    s.validate();
}

std::optional<long> RunMetrics::epochs_to_train_error(double threshold) const {
    for (const auto& r : epochs)
        if (std::isfinite(r.train_err) && r.train_err <= threshold) return r.epoch;
    return std::nullopt;
}

RunMetrics run_cell(const ExperimentSpec& spec, const ExperimentData& data, double lr, double delta, double eta,
                    std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    ModelSpec mspec = spec.model;
    mspec.input_dim = static_cast<int>(data.train.input_dim());
    mspec.num_classes = data.train.num_classes;
    const auto model = make_model(mspec);
    const std::size_t p = model->param_count();

    OptimConfig cfg = spec.optimizer;
    cfg.lr = lr;
    cfg.damping = delta;
    cfg.eta = eta;
    cfg.seed = derive_seed(seed, kOptimStream);
    std::optional<DampingState> damp;
    if (spec.auto_damp) {
        damp = DampingState::with_floor(delta, spec.ema_coeff, spec.update_interval, spec.strict_floor);
        cfg.damping = damp->current_delta;
    }
    cfg.validate();

    ScheduleSpec sched = spec.schedule;
    sched.base_lr = lr;
    sched.total_epochs = static_cast<double>(spec.epochs);

    RunMetrics m;
    m.kind = cfg.kind;
    m.lr = lr;
    m.delta = delta;
    m.eta = eta;
    m.seed = seed;
    m.auto_damp = spec.auto_damp;
    m.run_id = make_run_id(cfg.kind, lr, delta, eta, seed, spec.auto_damp);

    const std::size_t n = data.train.size();
    const bool full_batch = spec.batch_size == 0 || spec.batch_size >= n;
    std::optional<BatchSampler> sampler;
    if (!full_batch) sampler.emplace(n, spec.batch_size, derive_seed(seed, kBatchStream));

    std::vector<Dataset> hvar_batches;
    if (damp) {
        BatchSampler hs(n, std::min(spec.hvar_batch_size, n), derive_seed(seed, kHvarStream));
        for (const auto& idx : hs.epoch())
            if (idx.size() == hs.batch_size()) hvar_batches.push_back(select_rows(data.train, idx));
        if (hvar_batches.size() < 2)
            throw std::invalid_argument("auto-damping needs at least two full variance-estimation batches");
    }

    OptimizerState state = OptimizerState::init(model->initial_params(seed));
    ParamVector last_grad;

    auto record = [&](long epoch, double lr_now) {
        EpochRecord r;
        r.epoch = epoch;
        const LossEval tr = model->loss(state.w, data.train);
        const LossEval te = model->loss(state.w, data.test);
        r.train_loss = tr.loss;
        r.train_err = tr.error_rate;
        r.test_loss = te.loss;
        r.test_err = te.error_rate;
        r.lr = lr_now;
        r.delta = cfg.damping;
        r.lambda_1 = kNaN;
        r.overlap_top10 = kNaN;
        switch (cfg.kind) {
            case OptimizerKind::sgd: r.r_est_curv = 1.0; break;
            case OptimizerKind::adam: {
                if (state.step == 0) {
                    r.r_est_curv = 1.0;
                } else {
                    const double bc = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
                    const Vector vh = state.adam_v / bc;
                    const Vector den = cfg.inside_sqrt ? Vector((vh.array() + cfg.damping).sqrt().matrix())
                                                       : (vh.array().sqrt() + cfg.damping).matrix();
                    r.r_est_curv = den.maxCoeff() / den.minCoeff();
                }
                break;
            }
            case OptimizerKind::lanczos_opt:
                r.r_est_curv = state.last_decomp ? r_est_curv(*state.last_decomp, cfg.damping) : kNaN;
                break;
        }
        if (epoch % spec.trace_every == 0) {
            if (cfg.kind == OptimizerKind::lanczos_opt && state.last_decomp && last_grad.size() > 0) {
                r.lambda_1 = state.last_decomp->ritz_values[0];
                if (last_grad.norm() > 0.0)
                    r.overlap_top10 = gradient_overlap(*state.last_decomp, last_grad,
                                                       std::min<std::size_t>(10, state.last_decomp->steps()));
            } else {
                const auto dec = lanczos(model->hessian_operator(state.w, data.train), p,
                                         std::min(cfg.lanczos_steps, p),
                                         derive_seed(seed, kTraceStream + static_cast<std::uint64_t>(epoch)));
                r.lambda_1 = dec.ritz_values[0];
                const ParamVector g = model->loss_grad(state.w, data.train).gradient;
                if (g.norm() > 0.0) r.overlap_top10 = gradient_overlap(dec, g, std::min<std::size_t>(10, dec.steps()));
            }
        }
        if (!std::isfinite(r.train_loss)) {
            r.diverged = true;
            m.diverged = true;
        }
        m.epochs.push_back(r);
    };

    auto mark_diverged = [&](long epoch, double lr_now) {
        EpochRecord r;
        r.epoch = epoch;
        r.train_loss = r.train_err = r.test_loss = r.test_err = kNaN;
        r.lr = lr_now;
        r.delta = cfg.damping;
        r.r_est_curv = r.lambda_1 = r.overlap_top10 = kNaN;
        r.diverged = true;
        m.diverged = true;
        m.epochs.push_back(r);
    };

    try {
        record(0, schedule_lr(sched, 0.0));
    } catch (const NonFiniteError&) {
        mark_diverged(0, lr);
    }

    for (long epoch = 1; epoch <= spec.epochs && !m.diverged; ++epoch) {
        const double lr_now = schedule_lr(sched, static_cast<double>(epoch - 1));
        std::vector<std::vector<std::size_t>> batches;
        if (sampler) batches = sampler->epoch();
        const std::size_t n_batches = sampler ? batches.size() : 1;
        try {
            for (std::size_t b = 0; b < n_batches; ++b) {
                Dataset mini;
                if (sampler) mini = select_rows(data.train, batches[b]);
                const Dataset& batch = sampler ? mini : data.train;
                if (damp && damp->due(state.step)) {
                    const auto est = estimate_hessian_variance(
                        *model, state.w, hvar_batches, spec.hvar_probes,
                        derive_seed(seed, kHvarStream + 1 + static_cast<std::uint64_t>(state.step)));
                    *damp = auto_damp_update(std::move(*damp), est.sigma2, state.step);
                    cfg.damping = damp->current_delta;
                }
                const LossEval ev = model->loss_grad(state.w, batch);
                if (!std::isfinite(ev.loss)) throw DivergenceError("non-finite loss", state.step);
                last_grad = ev.gradient;
                switch (cfg.kind) {
                    case OptimizerKind::sgd: state = sgd_step(std::move(state), ev.gradient, lr_now, cfg); break;
                    case OptimizerKind::adam: state = adam_step(std::move(state), ev.gradient, lr_now, cfg); break;
                    case OptimizerKind::lanczos_opt:
                        state = lanczos_opt_step(std::move(state), *model, batch, ev.gradient, lr_now, cfg);
                        break;
                }
            }
            record(epoch, lr_now);
        } catch (const DivergenceError& e) {
            spdlog::debug("{}: diverged ({})", m.run_id, e.what());
            mark_diverged(epoch, lr_now);
        } catch (const NonFiniteError& e) {
            spdlog::debug("{}: diverged ({})", m.run_id, e.what());
            mark_diverged(epoch, lr_now);
        }
    }
    m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    spdlog::info("{}: final train_err={:.4f} test_err={:.4f}{} ({:.1f}s)", m.run_id, m.final_record().train_err,
                 m.final_record().test_err, m.diverged ? " DIVERGED" : "", m.wall_time);
    return m;
}

std::vector<RunMetrics> run_experiment(const ExperimentSpec& spec, const ExperimentData& data, unsigned threads) {
    spec.validate();
    data.train.validate();
    data.test.validate();
    struct Cell {
        double lr, delta, eta;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (double lr : spec.lr_grid)
        for (double d : spec.damping_grid)
            for (double e : spec.eta_grid)
                for (auto s : spec.seeds) cells.push_back({lr, d, e, s});
    std::vector<RunMetrics> out(cells.size());
    parallel_for(cells.size(), threads, [&](std::size_t i) {
        const Cell& c = cells[i];
        out[i] = run_cell(spec, data, c.lr, c.delta, c.eta, c.seed);
    });
    return out;
}

std::vector<HeatmapCell> heatmap_deltas(const std::vector<RunMetrics>& metrics) {
    if (metrics.empty()) throw std::invalid_argument("heatmap_deltas: empty metrics collection");
    std::vector<HeatmapCell> cells;
    std::vector<int> counts;
    for (const auto& m : metrics) {
        if (m.epochs.empty()) throw std::invalid_argument("heatmap_deltas: run '" + m.run_id + "' has no records");
        auto it = std::find_if(cells.begin(), cells.end(),
                               [&](const HeatmapCell& c) { return c.delta == m.delta && c.eta == m.eta; });
        if (it == cells.end()) {
            cells.push_back({m.delta, m.eta, 0.0, 0.0, 0.0, 0.0});
            counts.push_back(0);
            it = cells.end() - 1;
        }
        const auto idx = static_cast<std::size_t>(it - cells.begin());
        it->best_train += best_of(m.epochs, &EpochRecord::train_err);
        it->best_test += best_of(m.epochs, &EpochRecord::test_err);
        ++counts[idx];
    }
    double g_train = std::numeric_limits<double>::infinity(), g_test = g_train;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        cells[i].best_train /= counts[i];
        cells[i].best_test /= counts[i];
        g_train = std::min(g_train, cells[i].best_train);
        g_test = std::min(g_test, cells[i].best_test);
    }
    for (auto& c : cells) {
        c.d_train = c.best_train - g_train;
        c.d_test = c.best_test - g_test;
    }
    return cells;
}

StabilityResult stability_sweep(const std::function<bool(double)>& diverges, const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("stability_sweep: empty learning-rate grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("stability_sweep: grid must be strictly ascending");
    StabilityResult res;
    for (double a : grid) {
        const bool d = diverges(a);
        res.outcomes.emplace_back(a, d);
        if (!d) res.largest_stable = a;
    }
    return res;
}

namespace {

// Loss no longer contracting between T/2 and T, unless already converged.
bool non_contracting(double loss0, double loss_half, double loss_end) {
    if (!std::isfinite(loss_end)) return true;
    if (loss_end <= 1e-30 * loss0) return false;
    return loss_end >= loss_half * (1.0 - 1e-9);
}

bool quadratic_run_diverges(const Matrix& h, const ParamVector& w0, long steps,
                            const std::function<ParamVector(const ParamVector&)>& precond) {
    if (steps < 2) throw std::invalid_argument("quadratic run: steps must be >= 2");
    ParamVector w = w0;
    auto loss = [&](const ParamVector& x) { return 0.5 * x.dot(h * x); };
    const double l0 = loss(w);
    double l_half = l0;
    for (long t = 1; t <= steps; ++t) {
        w -= precond(h * w);
        if (!w.allFinite() || w.norm() > kDivergenceNorm) return true;
        if (t == steps / 2) l_half = loss(w);
    }
    return non_contracting(l0, l_half, loss(w));
}

}  // namespace

bool quadratic_gd_diverges(const SymMatrix& h, const ParamVector& w0, double lr, long steps) {
    if (w0.size() != static_cast<Eigen::Index>(h.dim())) throw DimensionError("quadratic_gd_diverges: w0 dimension");
    return quadratic_run_diverges(h.dense(), w0, steps, [lr](const ParamVector& g) -> ParamVector { return lr * g; });
}

bool preconditioned_quadratic_diverges(const SymMatrix& h, const Vector& precond_eigs,
                                       const Matrix& precond_vectors, double delta, const ParamVector& w0,
                                       double lr, long steps) {
    const auto p = static_cast<Eigen::Index>(h.dim());
    if (precond_vectors.rows() != p || precond_vectors.cols() != precond_eigs.size() || w0.size() != p)
        throw DimensionError("preconditioned_quadratic_diverges: dimension mismatch");
    if (!(delta > 0.0)) throw std::invalid_argument("preconditioned_quadratic_diverges: damping must be > 0");
    const Vector inv = (precond_eigs.array() + delta).inverse();
    const bool complement = precond_vectors.cols() < p;
    return quadratic_run_diverges(h.dense(), w0, steps, [&](const ParamVector& g) -> ParamVector {
        const Vector c = precond_vectors.transpose() * g;
        ParamVector u = precond_vectors * inv.cwiseProduct(c);
        if (complement) u += (g - precond_vectors * c) / delta;
        return lr * u;
    });
}

bool model_run_diverges(const Model& model, const Dataset& batch, OptimConfig config, double lr, long steps,
                        std::uint64_t seed) {
    config.lr = lr;
    config.seed = derive_seed(seed, kOptimStream);
    config.validate();
    OptimizerState state = OptimizerState::init(model.initial_params(seed));
    const double l0 = model.loss(state.w, batch).loss;
    try {
        for (long t = 0; t < steps; ++t) {
            const LossEval ev = model.loss_grad(state.w, batch);
            if (!std::isfinite(ev.loss)) return true;
            switch (config.kind) {
                case OptimizerKind::sgd: state = sgd_step(std::move(state), ev.gradient, lr, config); break;
                case OptimizerKind::adam: state = adam_step(std::move(state), ev.gradient, lr, config); break;
                case OptimizerKind::lanczos_opt:
                    state = lanczos_opt_step(std::move(state), model, batch, ev.gradient, lr, config);
                    break;
            }
        }
    } catch (const DivergenceError&) {
        return true;
    } catch (const NonFiniteError&) {
        return true;
    }
    const double l_end = model.loss(state.w, batch).loss;
    return !std::isfinite(l_end) || l_end > l0;
}

void emit_csv(const std::vector<RunMetrics>& metrics, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "run_id,epoch,train_loss,train_err,test_loss,test_err,lr,delta,r_est_curv,lambda_1,overlap_top10,diverged\n";
    for (const auto& m : metrics)
        for (const auto& r : m.epochs)
            out << m.run_id << ',' << r.epoch << ',' << num(r.train_loss) << ',' << num(r.train_err) << ','
                << num(r.test_loss) << ',' << num(r.test_err) << ',' << num(r.lr) << ',' << num(r.delta) << ','
                << num(r.r_est_curv) << ',' << num(r.lambda_1) << ',' << num(r.overlap_top10) << ','
                << (r.diverged ? 1 : 0) << '\n';
    finish(out, path);
}

namespace {

void parse_run_id(RunMetrics& m) {
    const std::string& id = m.run_id;
    const auto lr_pos = id.find("_lr");
    if (lr_pos == std::string::npos) return;
    try {
        m.kind = optimizer_kind_from_string(id.substr(0, lr_pos));
    } catch (const std::invalid_argument&) {
        return;
    }
    const auto d_pos = id.find("_d", lr_pos + 3), e_pos = id.find("_e", d_pos + 2), s_pos = id.find("_s", e_pos + 2);
    if (d_pos == std::string::npos || e_pos == std::string::npos || s_pos == std::string::npos) return;
    m.lr = std::strtod(id.c_str() + lr_pos + 3, nullptr);
    m.delta = std::strtod(id.c_str() + d_pos + 2, nullptr);
    m.eta = std::strtod(id.c_str() + e_pos + 2, nullptr);
    m.seed = std::strtoull(id.c_str() + s_pos + 2, nullptr, 10);
    m.auto_damp = id.size() >= 5 && id.compare(id.size() - 5, 5, "_auto") == 0;
}

}  // namespace

std::vector<RunMetrics> read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("'" + path.string() + "' is empty");
    std::vector<RunMetrics> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (f.size() != 12)
            throw std::runtime_error(fmt::format("{}:{}: expected 12 fields, got {}", path.string(), line_no, f.size()));
        if (out.empty() || out.back().run_id != f[0]) {
            RunMetrics m;
            m.run_id = f[0];
            parse_run_id(m);
            out.push_back(std::move(m));
        }
        auto d = [&](int i) { return std::strtod(f[static_cast<std::size_t>(i)].c_str(), nullptr); };
        EpochRecord r;
        r.epoch = std::stol(f[1]);
        r.train_loss = d(2);
        r.train_err = d(3);
        r.test_loss = d(4);
        r.test_err = d(5);
        r.lr = d(6);
        r.delta = d(7);
        r.r_est_curv = d(8);
        r.lambda_1 = d(9);
        r.overlap_top10 = d(10);
        r.diverged = f[11] == "1";
        if (r.diverged) out.back().diverged = true;
        out.back().epochs.push_back(r);
    }
    return out;
}

void emit_plot_script(const std::vector<RunMetrics>& metrics, const std::filesystem::path& csv_path,
                      const std::filesystem::path& script_path) {
    auto out = open_out(script_path);
    const std::string csv = csv_path.string();
    std::filesystem::path png = script_path;
    png.replace_extension(".png");
    out << "set datafile separator ','\n"
        << "set terminal pngcairo size 1500,500\n"
        << "set output '" << png.string() << "'\n"
        << "set multiplot layout 1,3\n"
        << "set xlabel 'epoch'\n"
        << "set key outside bottom center horizontal font ',7'\n";
    auto panel = [&](const char* title, int column, bool logy) {
        out << "set title '" << title << "'\n" << (logy ? "set logscale y\n" : "unset logscale y\n");
        if (metrics.empty()) {
            out << "plot '" << csv << "' using 2:" << column << " every ::1 with lines notitle\n";
            return;
        }
        out << "plot ";
        for (std::size_t i = 0; i < metrics.size(); ++i) {
            out << (i ? ", \\\n     " : "") << "'" << csv << "' using 2:(strcol(1) eq '" << metrics[i].run_id
                << "' ? $" << column << " : 1/0) with lines title '" << metrics[i].run_id << "'";
        }
        out << "\n";
    };
    panel("train error", 4, false);
    panel("test error", 6, false);
    panel("damping", 8, true);
    out << "unset multiplot\n";
    finish(out, script_path);
}

void emit_heatmap_csv(const std::vector<HeatmapCell>& cells, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "delta,eta,d_train,d_test\n";
    for (const auto& c : cells) out << num(c.delta) << ',' << num(c.eta) << ',' << num(c.d_train) << ',' << num(c.d_test) << '\n';
    finish(out, path);
}

void emit_heatmap_matrix(const std::vector<HeatmapCell>& cells, const std::filesystem::path& path) {
    std::set<double> deltas, etas;
    std::map<std::pair<double, double>, const HeatmapCell*> at;
    for (const auto& c : cells) {
        deltas.insert(c.delta);
        etas.insert(c.eta);
        at[{c.delta, c.eta}] = &c;
    }
    auto out = open_out(path);
    auto block = [&](const char* name, double HeatmapCell::*field) {
        out << "# " << name << ": rows eta =";
        for (double e : etas) out << ' ' << num(e);
        out << "; columns delta =";
        for (double d : deltas) out << ' ' << num(d);
        out << '\n';
        for (double e : etas) {
            bool first = true;
            for (double d : deltas) {
                const auto it = at.find({d, e});
                out << (first ? "" : " ") << num(it == at.end() ? kNaN : it->second->*field);
                first = false;
            }
            out << '\n';
        }
    };
    block("d_train", &HeatmapCell::d_train);
    out << "\n\n";
    block("d_test", &HeatmapCell::d_test);
    finish(out, path);
}

}  // namespace spectral_damp
