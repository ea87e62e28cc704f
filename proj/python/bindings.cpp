#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "spectral_damp/config.hpp"
#include "spectral_damp/data.hpp"
#include "spectral_damp/harness.hpp"
#include "spectral_damp/lanczos.hpp"
#include "spectral_damp/linalg.hpp"
#include "spectral_damp/model.hpp"
#include "spectral_damp/optim.hpp"
#include "spectral_damp/rmt.hpp"
#include "spectral_damp/shrinkage.hpp"

namespace py = pybind11;
using namespace spectral_damp;

namespace {

SymMatrix to_sym(const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionError("expected a square matrix");
    return SymMatrix::symmetrized(m);
}

Dataset make_dataset(const Matrix& inputs, const std::vector<int>& labels, int num_classes) {
    Dataset d;
    d.inputs = inputs;
    d.labels = labels;
    d.num_classes = num_classes;
    d.name = "python";
    d.validate();
    return d;
}

py::dict record_dict(const EpochRecord& r) {
    py::dict d;
    d["epoch"] = r.epoch;
    d["train_loss"] = r.train_loss;
    d["train_err"] = r.train_err;
    d["test_loss"] = r.test_loss;
    d["test_err"] = r.test_err;
    d["lr"] = r.lr;
    d["delta"] = r.delta;
    d["r_est_curv"] = r.r_est_curv;
    d["lambda_1"] = r.lambda_1;
    d["overlap_top10"] = r.overlap_top10;
    d["diverged"] = r.diverged;
    return d;
}

}  // namespace

PYBIND11_MODULE(_spectral_damp, m) {
    m.doc() = "Damped second-order optimisation, shrinkage and spiked random-matrix tools";

    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);
    py::register_exception<DataError>(m, "DataError", PyExc_IOError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    // linalg / lanczos
    m.def(
        "dense_eigh",
        [](const Matrix& a) {
            const auto e = dense_eigh(to_sym(a));
            return py::make_tuple(e.values, e.vectors);
        },
        py::arg("a"), "Eigenvalues (descending) and eigenvectors of a symmetric matrix.");

    py::class_<SpectralDecomposition>(m, "SpectralDecomposition")
        .def_readonly("ritz_values", &SpectralDecomposition::ritz_values)
        .def_readonly("ritz_vectors", &SpectralDecomposition::ritz_vectors)
        .def_readonly("residuals", &SpectralDecomposition::residuals)
        .def_readonly("breakdown", &SpectralDecomposition::breakdown)
        .def_property_readonly("steps", &SpectralDecomposition::steps);

    m.def(
        "lanczos",
        [](const Matrix& a, std::size_t steps, std::uint64_t seed) {
            const SymMatrix h = to_sym(a);
            LinearOperator op = [&h](const Vector& v) -> Vector { return h.dense() * v; };
            return lanczos(op, h.dim(), steps, seed);
        },
        py::arg("a"), py::arg("steps"), py::arg("seed") = 0);
    m.def(
        "lanczos_operator",
        [](const std::function<Vector(const Vector&)>& apply, std::size_t dim, std::size_t steps,
           std::uint64_t seed) { return lanczos(apply, dim, steps, seed); },
        py::arg("apply"), py::arg("dim"), py::arg("steps"), py::arg("seed") = 0,
        "Lanczos on a Python callable v -> A v.");

    // shrinkage
    py::class_<ShrinkageParams>(m, "ShrinkageParams")
        .def_readonly("delta", &ShrinkageParams::delta)
        .def_readonly("beta", &ShrinkageParams::beta)
        .def_readonly("kappa", &ShrinkageParams::kappa)
        .def("__repr__", [](const ShrinkageParams& s) {
            return "ShrinkageParams(delta=" + std::to_string(s.delta) + ", beta=" + std::to_string(s.beta) +
                   ", kappa=" + std::to_string(s.kappa) + ")";
        });
    m.def("shrinkage_from_delta", &shrinkage_from_delta, py::arg("delta"));
    m.def("shrinkage_from_beta", &shrinkage_from_beta, py::arg("beta"));
    m.def("shrinkage_mse", &shrinkage_mse, py::arg("beta"), py::arg("mu2"));
    m.def("optimal_damping", &optimal_damping, py::arg("mu2"));
    m.def(
        "shrunk_matrix", [](const Matrix& h, double beta) { return shrunk_matrix(to_sym(h), beta).dense(); },
        py::arg("h"), py::arg("beta"));
    m.def(
        "spectral_second_moment", [](const Matrix& x) { return spectral_second_moment(to_sym(x)); }, py::arg("x"));
    m.def(
        "estimate_variance",
        [](const std::vector<Matrix>& hessians, std::size_t n_probes, std::uint64_t seed) {
            if (hessians.empty()) throw std::invalid_argument("estimate_variance: no matrices");
            std::vector<SymMatrix> syms;
            for (const auto& h : hessians) syms.push_back(to_sym(h));
            std::vector<LinearOperator> ops;
            for (const auto& s : syms) ops.push_back([&s](const Vector& v) -> Vector { return s.dense() * v; });
            const auto est = estimate_variance(ops, syms.front().dim(), n_probes, seed);
            return py::make_tuple(est.sigma2, est.per_probe);
        },
        py::arg("hessians"), py::arg("n_probes") = 8, py::arg("seed") = 0,
        "Hutchinson estimate of the spread of a list of symmetric matrices around their mean.");

    py::class_<DampingState>(m, "DampingState")
        .def_static("with_floor", &DampingState::with_floor, py::arg("floor"), py::arg("ema_coeff") = 0.7,
                    py::arg("update_interval") = 100, py::arg("strict_floor") = true)
        .def_readonly("current_delta", &DampingState::current_delta)
        .def_readonly("floor", &DampingState::floor)
        .def_readonly("history", &DampingState::history);
    m.def("auto_damp_update", &auto_damp_update, py::arg("state"), py::arg("sigma2"), py::arg("step"));

    // rmt
    py::class_<SpikedEnsembleSpec>(m, "SpikedEnsembleSpec")
        .def(py::init([](std::size_t dim, std::size_t batch_size, double noise_scale, std::vector<double> spikes) {
                 SpikedEnsembleSpec s{dim, batch_size, noise_scale, std::move(spikes)};
                 s.validate();
                 return s;
             }),
             py::arg("dim"), py::arg("batch_size"), py::arg("noise_scale") = 1.0,
             py::arg("spikes") = std::vector<double>{})
        .def_readwrite("dim", &SpikedEnsembleSpec::dim)
        .def_readwrite("batch_size", &SpikedEnsembleSpec::batch_size)
        .def_readwrite("noise_scale", &SpikedEnsembleSpec::noise_scale)
        .def_readwrite("spikes", &SpikedEnsembleSpec::spikes);

    py::class_<SemicircleLaw>(m, "SemicircleLaw")
        .def_static("from_spec", &SemicircleLaw::from_spec)
        .def_readonly("scale", &SemicircleLaw::scale)
        .def("edge", &SemicircleLaw::edge)
        .def("density", &SemicircleLaw::density)
        .def("cdf", &SemicircleLaw::cdf);

    m.def(
        "sample_fluctuation", [](const SpikedEnsembleSpec& s, std::uint64_t seed) {
            return sample_fluctuation(s, seed).dense();
        },
        py::arg("spec"), py::arg("seed"));
    m.def(
        "sample_spiked",
        [](const SpikedEnsembleSpec& s, std::uint64_t seed) {
            auto r = sample_spiked(s, seed);
            return py::make_tuple(r.batch.dense(), r.true_vectors);
        },
        py::arg("spec"), py::arg("seed"));
    m.def("overlap_prediction", &overlap_prediction, py::arg("nu"), py::arg("spec"));
    m.def(
        "esd_ks_distance",
        [](const Vector& ev, const SemicircleLaw& law) {
            return esd_ks_distance(std::vector<double>(ev.data(), ev.data() + ev.size()), law);
        },
        py::arg("eigenvalues"), py::arg("law"));

    py::class_<OverlapRow>(m, "OverlapRow")
        .def_readonly("nu", &OverlapRow::nu)
        .def_readonly("s", &OverlapRow::s)
        .def_readonly("predicted", &OverlapRow::predicted)
        .def_readonly("measured_mean", &OverlapRow::measured_mean)
        .def_readonly("measured_std", &OverlapRow::measured_std)
        .def_readonly("n_seeds", &OverlapRow::n_seeds);
    m.def("overlap_experiment", &overlap_experiment, py::arg("spec"), py::arg("n_seeds"), py::arg("seed") = 0,
          py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());

    // models
    py::class_<SoftmaxRegression>(m, "SoftmaxRegression")
        .def(py::init<int, int>(), py::arg("input_dim"), py::arg("num_classes"))
        .def_property_readonly("param_count", &SoftmaxRegression::param_count)
        .def(
            "loss_grad",
            [](const SoftmaxRegression& model, const Vector& w, const Matrix& x, const std::vector<int>& y) {
                const auto e = model.loss_grad(w, make_dataset(x, y, model.spec().num_classes));
                return py::make_tuple(e.loss, e.gradient, e.error_rate);
            },
            py::arg("w"), py::arg("inputs"), py::arg("labels"))
        .def(
            "hvp",
            [](const SoftmaxRegression& model, const Vector& w, const Matrix& x, const std::vector<int>& y,
               const Vector& v) { return model.hvp(w, make_dataset(x, y, model.spec().num_classes), v); },
            py::arg("w"), py::arg("inputs"), py::arg("labels"), py::arg("v"));

    // optim
    m.def(
        "schedule_lr",
        [](const std::string& kind, double base_lr, double total_epochs, double t, double floor_ratio,
           double warm_factor) {
            ScheduleSpec s{schedule_kind_from_string(kind), base_lr, total_epochs, floor_ratio, warm_factor};
            return schedule_lr(s, t);
        },
        py::arg("kind"), py::arg("base_lr"), py::arg("total_epochs"), py::arg("t"), py::arg("floor_ratio") = 0.01,
        py::arg("warm_factor") = 5.0);
    m.def(
        "stable_lr_bound",
        [](const Matrix& h, const Vector& eigs, const Matrix& vecs, double delta) {
            return stable_lr_bound(to_sym(h), eigs, vecs, delta);
        },
        py::arg("h"), py::arg("precond_eigs"), py::arg("precond_vectors"), py::arg("delta"));
    m.def(
        "lanczos_opt_direction",
        [](const SpectralDecomposition& d, const Vector& g, double delta, double eta) {
            const auto dir = lanczos_opt_direction(d, g, delta, eta);
            return py::make_tuple(dir.sharp, dir.flat);
        },
        py::arg("decomp"), py::arg("grad"), py::arg("delta"), py::arg("eta") = 1.0);
    m.def("r_est_curv", &r_est_curv, py::arg("decomp"), py::arg("delta"));

    // harness
    m.def(
        "run_config",
        [](const std::string& text, unsigned threads) {
            const Config cfg = Config::parse(text, "<python>");
            const ExperimentSpec spec = experiment_from_config(cfg);
            std::vector<RunMetrics> runs;
            {
                py::gil_scoped_release release;
                const ExperimentData data = load_experiment_data(spec.dataset);
                runs = run_experiment(spec, data, threads);
            }
            py::list out;
            for (const auto& r : runs) {
                py::dict d;
                d["run_id"] = r.run_id;
                d["lr"] = r.lr;
                d["delta"] = r.delta;
                d["eta"] = r.eta;
                d["seed"] = r.seed;
                d["diverged"] = r.diverged;
                py::list epochs;
                for (const auto& e : r.epochs) epochs.append(record_dict(e));
                d["epochs"] = epochs;
                out.append(d);
            }
            return out;
        },
        py::arg("config_text"), py::arg("threads") = 1,
        "Parse a key = value experiment config, run every grid cell and return per-epoch records.");
    m.def(
        "largest_stable_gd_lr",
        [](const std::vector<double>& spectrum, const std::vector<double>& grid, long steps, std::uint64_t seed) {
            const auto q = synthetic_quadratic(spectrum, seed);
            const auto res = stability_sweep(
                [&](double a) { return quadratic_gd_diverges(q.hessian, q.w0, a, steps); }, grid);
            return res.largest_stable;
        },
        py::arg("spectrum"), py::arg("grid"), py::arg("steps") = 1000, py::arg("seed") = 0);
}
