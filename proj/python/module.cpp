#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ggrf/applications.hpp"
#include "ggrf/cli.hpp"
#include "ggrf/errors.hpp"
#include "ggrf/estimator.hpp"
#include "ggrf/exact_oracle.hpp"
#include "ggrf/generators.hpp"
#include "ggrf/modulation.hpp"
#include "ggrf/neural_mod.hpp"
#include "ggrf/ode.hpp"
#include "ggrf/walker.hpp"

namespace py = pybind11;
using namespace ggrf;

namespace {

// A modulation argument is either a kernel (symmetric modulation of that
// kernel) or a table of values.
using ModArg = std::variant<KernelSpec, std::vector<double>>;

ModulationFn to_fn(const ModArg& f) {
  if (const auto* spec = std::get_if<KernelSpec>(&f)) return kernel_modulation(*spec);
  return ModulationFn::tabulated(std::get<std::vector<double>>(f));
}

WalkConfig walk_config(double p_halt, std::size_t m, double sigma, std::uint64_t seed,
                       unsigned threads) {
  WalkConfig cfg{p_halt, m, sigma, seed, threads};
  cfg.validate();
  return cfg;
}

OdeProblem ode_problem(const Graph& g, std::vector<double> drive, double horizon,
                       std::size_t n_samples, const std::string& op) {
  OdeProblem p;
  p.graph = g;
  p.op = parse_ode_operator(op);
  p.drive = std::move(drive);
  p.horizon = horizon;
  p.n_samples = n_samples;
  p.validate();
  return p;
}

}  // namespace

PYBIND11_MODULE(_ggrf, m) {
  m.doc() = "Graph random features with learnable modulation";
  m.attr("__version__") = cli::kVersion;

  // Translators run newest first, so the base class goes first.
  auto& error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", error.ptr());

  py::class_<Graph>(m, "Graph")
      .def_static(
          "from_edges",
          [](std::size_t n, const std::vector<WeightedEdge>& edges, bool directed) {
            return Graph::from_edges(n, edges, directed);
          },
          py::arg("num_nodes"), py::arg("edges"), py::arg("directed") = false)
      .def_property_readonly("num_nodes", &Graph::num_nodes)
      .def_property_readonly("num_edges", &Graph::num_edges)
      .def("degree", &Graph::degree)
      .def("weighted_degree", &Graph::weighted_degree)
      .def("weight", &Graph::weight)
      .def("edge_list", &Graph::edge_list)
      .def("to_dense", &Graph::to_dense)
      .def("__repr__", [](const Graph& g) {
        return "<Graph nodes=" + std::to_string(g.num_nodes()) +
               " edges=" + std::to_string(g.num_edges()) + ">";
      });

  m.def("load_edge_list", &load_edge_list_file, py::arg("path"), py::arg("directed") = false,
        py::arg("min_nodes") = 0);
  m.def("parse_edge_list", [](const std::string& text, bool directed) {
    std::istringstream in(text);
    return load_edge_list(in, directed);
  }, py::arg("text"), py::arg("directed") = false);
  m.def("normalized_adjacency", &normalized_adjacency);
  m.def("laplacian", [](const Graph& g) { return laplacian_as_operator(g).to_dense(); });
  m.def("spectral_radius", [](const Graph& g, double tol, std::size_t max_iters) {
    return spectral_radius(g, tol, max_iters).value;
  }, py::arg("graph"), py::arg("tol") = 1e-10, py::arg("max_iters") = 100000);

  m.def("erdos_renyi", &erdos_renyi, py::arg("num_nodes"), py::arg("p_edge"), py::arg("seed") = 0);
  m.def("binary_tree", &binary_tree, py::arg("num_nodes"));
  m.def("random_regular", &random_regular, py::arg("num_nodes"), py::arg("degree"),
        py::arg("seed") = 0);
  m.def("triangulated_grid", &triangulated_grid, py::arg("rows"), py::arg("cols"));
  m.def("wavy_grid_mesh", [](std::size_t rows, std::size_t cols) {
    Mesh mesh = wavy_grid_mesh(rows, cols);
    return py::make_tuple(mesh.graph, mesh.positions, mesh.normals);
  }, py::arg("rows"), py::arg("cols"));

  py::class_<KernelSpec>(m, "KernelSpec")
      .def_static("regularised_laplacian", &KernelSpec::regularised_laplacian, py::arg("d"),
                  py::arg("sigma"))
      .def_static("p_step", &KernelSpec::p_step, py::arg("p"), py::arg("alpha"))
      .def_static("diffusion", &KernelSpec::diffusion, py::arg("sigma"))
      .def_static("inverse_cosine", &KernelSpec::inverse_cosine)
      .def_property_readonly("kind", [](const KernelSpec& s) { return to_string(s.kind); })
      .def_readonly("d", &KernelSpec::d)
      .def_readonly("p", &KernelSpec::p)
      .def_readonly("alpha", &KernelSpec::alpha)
      .def_readonly("sigma", &KernelSpec::sigma)
      .def("scale", &KernelSpec::scale)
      .def("prefactor", &KernelSpec::prefactor)
      .def("__repr__", [](const KernelSpec& s) { return "<KernelSpec " + to_string(s.kind) + ">"; });

  m.def("taylor_coeffs", [](const KernelSpec& spec, std::size_t k_max) {
    const CoeffSeq c = taylor_coeffs(spec, k_max);
    return std::vector<double>(c.values().begin(), c.values().end());
  }, py::arg("spec"), py::arg("k_max"));
  m.def("modulation", [](const ModArg& f, std::size_t n) { return to_fn(f).prefix(n); },
        py::arg("f"), py::arg("n"), "First n values of the modulation function.");
  m.def("closed_form_modulation", [](const KernelSpec& spec, std::size_t n, bool absorb_scale) {
    return closed_form_modulation(spec, absorb_scale).prefix(n);
  }, py::arg("spec"), py::arg("n"), py::arg("absorb_scale") = true);
  m.def("symmetric_from_coeffs", [](std::vector<double> coeffs) {
    const std::size_t n = coeffs.size();
    return symmetric_from_coeffs(CoeffSeq(std::move(coeffs))).prefix(n);
  }, py::arg("coeffs"));
  m.def("convolve", [](std::vector<double> f1, std::vector<double> f2, std::size_t k_max) {
    return convolve(ModulationFn::tabulated(std::move(f1)), ModulationFn::tabulated(std::move(f2)), k_max);
  }, py::arg("f1"), py::arg("f2"), py::arg("k_max"));
  m.def("min_batch_size", &min_batch_size, py::arg("m"), py::arg("p_halt"), py::arg("delta"));

  py::class_<FeatureMatrix>(m, "FeatureMatrix")
      .def_static("identity", &FeatureMatrix::identity, py::arg("n"), py::arg("seed") = 0)
      .def_property_readonly("n", &FeatureMatrix::n)
      .def_property_readonly("m", &FeatureMatrix::m)
      .def_property_readonly("p_halt", &FeatureMatrix::p_halt)
      .def_property_readonly("sigma", &FeatureMatrix::sigma)
      .def_property_readonly("seed", &FeatureMatrix::seed)
      .def_property_readonly("nnz", &FeatureMatrix::nnz)
      .def("to_dense", &FeatureMatrix::to_dense)
      .def("save", &FeatureMatrix::save_file)
      .def_static("load", &FeatureMatrix::load_file)
      .def(py::self == py::self);

  m.def("sample_features", [](const Graph& g, const ModArg& f, double p_halt, std::size_t m,
                              double sigma, std::uint64_t seed, unsigned threads) {
    const WalkConfig cfg = walk_config(p_halt, m, sigma, seed, threads);
    py::gil_scoped_release release;
    return sample_features(g, to_fn(f), cfg);
  }, py::arg("graph"), py::arg("f"), py::arg("p_halt") = 0.1, py::arg("m") = 16,
        py::arg("sigma") = 1.0, py::arg("seed") = 0, py::arg("threads") = 0);
  m.def("sample_feature_pair", [](const Graph& g, const ModArg& f1, const ModArg& f2, double p_halt,
                                  std::size_t m, double sigma, std::uint64_t seed, unsigned threads) {
    const WalkConfig cfg = walk_config(p_halt, m, sigma, seed, threads);
    py::gil_scoped_release release;
    return sample_feature_pair(g, to_fn(f1), to_fn(f2), cfg);
  }, py::arg("graph"), py::arg("f1"), py::arg("f2"), py::arg("p_halt") = 0.1, py::arg("m") = 16,
        py::arg("sigma") = 1.0, py::arg("seed") = 0, py::arg("threads") = 0);

  m.def("estimate_gram", &estimate_gram, py::arg("phi1"), py::arg("phi2"),
        py::arg("symmetrize") = false, py::arg("threads") = 0);
  m.def("estimate_kernel", [](const Graph& g, const KernelSpec& spec, double p_halt, std::size_t m,
                              std::uint64_t seed, unsigned threads) {
    const WalkConfig cfg = walk_config(p_halt, m, 1.0, seed, threads);
    py::gil_scoped_release release;
    const ModulationFn f = kernel_modulation(spec);
    const auto [a, b] = sample_feature_pair(normalized_adjacency(g), f, f, cfg);
    return DenseMatrix(spec.prefactor() * estimate_gram(a, b, false, threads));
  }, py::arg("graph"), py::arg("spec"), py::arg("p_halt") = 0.1, py::arg("m") = 16,
        py::arg("seed") = 0, py::arg("threads") = 0,
        "g-GRF estimate of exact_kernel(graph, spec), walking the normalised adjacency.");
  m.def("kernel_matvec", [](const FeatureMatrix& phi1, const FeatureMatrix& phi2,
                            const std::vector<double>& v) { return kernel_matvec(phi1, phi2, v); },
        py::arg("phi1"), py::arg("phi2"), py::arg("v"));
  m.def("relative_frobenius_error", &relative_frobenius_error, py::arg("k"), py::arg("k_hat"));

  m.def("exact_kernel", &exact_kernel, py::arg("graph"), py::arg("spec"));
  m.def("taylor_kernel", [](const DenseMatrix& w, std::vector<double> coeffs, double tail_tol) {
    return taylor_kernel(w, CoeffSeq(std::move(coeffs)), tail_tol).value;
  }, py::arg("w"), py::arg("coeffs"), py::arg("tail_tol") = 1e-12);
  m.def("expm", &expm, py::arg("a"));
  m.def("min_eigenvalue", &min_eigenvalue, py::arg("m"));

  m.def("simulate_exact", [](const Graph& g, std::vector<double> drive, double horizon,
                             const std::string& op, std::size_t n_quad) {
    return simulate_exact(ode_problem(g, std::move(drive), horizon, 1, op), n_quad);
  }, py::arg("graph"), py::arg("drive"), py::arg("horizon") = 1.0,
        py::arg("operator") = "neg-laplacian", py::arg("n_quad") = 2001);
  m.def("simulate_grf", [](const Graph& g, std::vector<double> drive, double horizon,
                           const std::string& op, std::size_t n_samples, std::size_t m,
                           double p_halt, std::uint64_t seed, unsigned threads) {
    const OdeProblem p = ode_problem(g, std::move(drive), horizon, n_samples, op);
    py::gil_scoped_release release;
    return simulate_grf(p, {m, p_halt, seed, threads});
  }, py::arg("graph"), py::arg("drive"), py::arg("horizon") = 1.0,
        py::arg("operator") = "neg-laplacian", py::arg("n_samples") = 10, py::arg("m") = 16,
        py::arg("p_halt") = 0.1, py::arg("seed") = 0, py::arg("threads") = 0);

  m.def("kernel_kmeans", [](const DenseMatrix& k, int clusters, std::size_t max_iters,
                            std::uint64_t seed, std::size_t n_init) {
    return kernel_kmeans(k, clusters, max_iters, seed, n_init).labels;
  }, py::arg("k"), py::arg("clusters"), py::arg("max_iters") = 300, py::arg("seed") = 0,
        py::arg("n_init") = 10);
  m.def("clustering_error", [](const std::vector<int>& a, const std::vector<int>& b) {
    return clustering_error(a, b);
  }, py::arg("labels_a"), py::arg("labels_b"));
  m.def("kernel_regression_predict",
        py::overload_cast<const DenseMatrix&, const DenseMatrix&, const std::vector<bool>&>(
            &kernel_regression_predict),
        py::arg("k_hat"), py::arg("attrs"), py::arg("mask"));
  m.def("angular_error", &angular_error, py::arg("pred"), py::arg("truth"), py::arg("mask"));
  m.def("random_mask", &random_mask, py::arg("n"), py::arg("fraction"), py::arg("seed") = 0);

  py::class_<NeuralModParams>(m, "NeuralModParams")
      .def(py::init([](double w1, double b1, double w2, double b2) {
             return NeuralModParams{w1, b1, w2, b2};
           }),
           py::arg("w1") = -0.5, py::arg("b1") = 1.0, py::arg("w2") = 1.0, py::arg("b2") = 0.0)
      .def_readwrite("w1", &NeuralModParams::w1)
      .def_readwrite("b1", &NeuralModParams::b1)
      .def_readwrite("w2", &NeuralModParams::w2)
      .def_readwrite("b2", &NeuralModParams::b2)
      .def("__call__", [](const NeuralModParams& p, double x) { return neural_mod_eval(p, x); })
      .def("table", [](const NeuralModParams& p, std::size_t n) { return neural_mod_table(p, n); })
      .def(py::self == py::self)
      .def("__repr__", [](const NeuralModParams& p) {
        std::ostringstream s;
        s << "NeuralModParams(w1=" << p.w1 << ", b1=" << p.b1 << ", w2=" << p.w2 << ", b2=" << p.b2 << ")";
        return s.str();
      });
  m.def("implied_coefficients",
        py::overload_cast<const NeuralModParams&, const NeuralModParams&, std::size_t>(
            &implied_coefficients),
        py::arg("f1"), py::arg("f2"), py::arg("k_max"));

  m.def("train_modulation", [](const Graph& walk_graph, std::optional<DenseMatrix> target,
                               std::optional<DenseMatrix> attrs, double holdout, std::size_t epochs,
                               double learning_rate, double gamma, std::size_t m, double p_halt,
                               double sigma, std::uint64_t seed, bool asymmetric,
                               NeuralModParams init, unsigned threads) {
    if (target.has_value() == attrs.has_value()) {
      throw InvalidArgument("pass exactly one of target (Frobenius loss) or attrs (angular loss)");
    }
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.learning_rate = learning_rate;
    cfg.gamma = gamma;
    cfg.m = m;
    cfg.p_halt = p_halt;
    cfg.sigma = sigma;
    cfg.seed = seed;
    cfg.asymmetric = asymmetric;
    cfg.init = init;
    cfg.threads = threads;
    if (target) {
      cfg.loss = FrobeniusLoss{*target};
    } else {
      cfg.loss = AngularLoss{*attrs, holdout};
    }
    TrainResult r;
    {
      py::gil_scoped_release release;
      r = train_modulation(walk_graph, cfg);
    }
    py::dict out;
    out["f1"] = r.f1;
    out["f2"] = r.f2;
    out["trace"] = r.trace;
    out["abort_reason"] = r.abort_reason;
    return out;
  }, py::arg("walk_graph"), py::arg("target") = py::none(), py::arg("attrs") = py::none(),
        py::arg("holdout") = 0.05, py::arg("epochs") = 1000, py::arg("learning_rate") = 0.01,
        py::arg("gamma") = 0.975, py::arg("m") = 16, py::arg("p_halt") = 0.5,
        py::arg("sigma") = 1.0, py::arg("seed") = 0, py::arg("asymmetric") = false,
        py::arg("init") = NeuralModParams{}, py::arg("threads") = 0);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs the command line tool in-process; returns (exit_code, stdout, stderr).");
}
