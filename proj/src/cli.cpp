#include "ggrf/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ggrf/applications.hpp"
#include "ggrf/errors.hpp"
#include "ggrf/estimator.hpp"
#include "ggrf/exact_oracle.hpp"
#include "ggrf/generators.hpp"
#include "ggrf/modulation.hpp"
#include "ggrf/neural_mod.hpp"
#include "ggrf/ode.hpp"
#include "ggrf/parallel.hpp"
#include "ggrf/rng.hpp"
#include "ggrf/walker.hpp"

namespace ggrf::cli {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Binds options and remembers them so every result document echoes its inputs.
class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& flags, T& var, const std::string& desc) {
    auto* o = app_->add_option(flags, var, desc)->capture_default_str();
    dumpers_.emplace_back([key = o->get_single_name(), &var](json& j) { j[key] = var; });
    return o;
  }

  CLI::Option* flag(const std::string& flags, bool& var, const std::string& desc) {
    auto* o = app_->add_flag(flags, var, desc);
    dumpers_.emplace_back([key = o->get_single_name(), &var](json& j) { j[key] = var; });
    return o;
  }

  json dump() const {
    json j = json::object();
    for (const auto& d : dumpers_) d(j);
    return j;
  }

  CLI::App* app() const { return app_; }

 private:
  CLI::App* app_;
  std::vector<std::function<void(json&)>> dumpers_;
};

struct KernelArgs {
  std::string kind = "diffusion";
  int d = 2;
  int p = 2;
  double alpha = 2.0;
  double sigma = 1.0;

  void add(Options& o, const std::string& prefix = "") {
    o.add("--" + prefix + "kernel", kind,
          "regularised_laplacian, p_step_random_walk, diffusion or inverse_cosine");
    o.add("--" + prefix + "sigma", sigma, "regulariser sigma");
    o.add("--" + prefix + "d", d, "exponent of the regularised Laplacian kernel");
    o.add("--" + prefix + "p", p, "exponent of the p-step random walk kernel");
    o.add("--" + prefix + "alpha", alpha, "shift of the p-step random walk kernel (>= 2)");
  }

  KernelSpec spec() const {
    KernelSpec s{parse_kernel_kind(kind), d, p, alpha, sigma};
    s.validate();
    return s;
  }
};

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
  body(out);
  if (!out) throw Error("failed writing '" + path + "'");
}

json versions() {
  return {{"ggrf", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                        "." + std::to_string(EIGEN_MINOR_VERSION)}};
}

struct Document {
  json j;
  Document(const std::string& command, const Options& opts, unsigned threads) {
    j["command"] = command;
    j["versions"] = versions();
    j["inputs"] = opts.dump();
    j["threads"] = resolve_threads(threads);
    j["metrics"] = json::object();
    j["timing"] = json::object();
  }
};

void emit(const Document& doc, const std::string& output, std::ostream& out) {
  if (output.empty()) {
    out << doc.j.dump(2) << '\n';
  } else {
    write_file(output, [&](std::ostream& f) { f << doc.j.dump(2) << '\n'; });
  }
}

std::vector<bool> read_mask_or_draw(std::size_t n, double fraction, std::uint64_t seed) {
  return random_mask(n, fraction, derive_seed(seed, 0x6d61736bULL));
}

NeuralModParams parse_init(const std::string& text) {
  std::array<double, 4> a{};
  std::istringstream ss(text);
  std::string tok;
  std::size_t k = 0;
  while (std::getline(ss, tok, ',')) {
    if (k >= 4) break;
    try {
      a[k++] = std::stod(tok);
    } catch (const std::exception&) {
      throw InvalidArgument("--init expects four comma-separated numbers w1,b1,w2,b2");
    }
  }
  if (k != 4 || std::getline(ss, tok, ',')) {
    throw InvalidArgument("--init expects four comma-separated numbers w1,b1,w2,b2");
  }
  return NeuralModParams::from_array(a);
}

struct MeshArgs {
  std::string mesh;  // "", "grid" or "torus"
  std::size_t rows = 20;
  std::size_t cols = 20;

  void add(Options& o) {
    o.add("--mesh", mesh, "use a generated mesh (grid or torus) with analytic normals")
        ->check(CLI::IsMember({"", "grid", "torus"}));
    o.add("--rows", rows, "mesh rows (or major segments for the torus)");
    o.add("--cols", cols, "mesh columns (or minor segments for the torus)");
  }

  Mesh build() const {
    if (mesh == "grid") return wavy_grid_mesh(rows, cols);
    return torus_mesh(rows, cols);
  }
};

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
  std::string graph;
  bool directed = false;
  KernelArgs kernel;
  double p_halt = 0.1;
  std::size_t walks = 32;
  std::uint64_t seed = 0;
  std::string params;
  bool no_exact = false;
  std::string gram_csv;
  std::string exact_csv;
  std::string output;
};

void run_estimate(const EstimateArgs& a, const Options& opts, unsigned threads, std::ostream& out) {
  Document doc("estimate", opts, threads);
  const Graph g = load_edge_list_file(a.graph, a.directed);
  const KernelSpec spec = a.kernel.spec();
  const Graph walk = normalized_adjacency(g);
  WalkConfig wc{a.p_halt, a.walks, 1.0, a.seed, threads};
  ModulationFn f1;
  ModulationFn f2;
  if (!a.params.empty()) {
    std::ifstream in(a.params);
    if (!in) throw InvalidArgument("cannot open parameter file '" + a.params + "'");
    const auto learned = read_params_json(in);
    f1 = to_modulation(learned.f1);
    f2 = to_modulation(learned.f2);
    wc.sigma = spec.scale();
  } else {
    f1 = f2 = kernel_modulation(spec);
  }
  doc.j["metrics"]["modulation"] = f1.description();
  doc.j["metrics"]["walk_sigma"] = wc.sigma;
  doc.j["metrics"]["num_nodes"] = g.num_nodes();
  doc.j["metrics"]["num_edges"] = g.num_edges();

  auto start = Clock::now();
  const auto [phi1, phi2] = sample_feature_pair(walk, f1, f2, wc);
  doc.j["timing"]["sample_seconds"] = seconds_since(start);
  doc.j["metrics"]["feature_nnz"] = {phi1.nnz(), phi2.nnz()};
  doc.j["metrics"]["feature_seeds"] = {phi1.seed(), phi2.seed()};

  if (g.num_nodes() <= kMaxDenseNodes) {
    start = Clock::now();
    const DenseMatrix k_hat = spec.prefactor() * estimate_gram(phi1, phi2, false, threads);
    doc.j["timing"]["gram_seconds"] = seconds_since(start);
    if (!a.gram_csv.empty()) write_file(a.gram_csv, [&](std::ostream& f) { write_matrix_csv(f, k_hat); });
    if (!a.no_exact) {
      start = Clock::now();
      const DenseMatrix k = exact_kernel(g, spec);
      doc.j["timing"]["exact_seconds"] = seconds_since(start);
      doc.j["metrics"]["relative_frobenius_error"] = relative_frobenius_error(k, k_hat);
      if (!a.exact_csv.empty()) write_file(a.exact_csv, [&](std::ostream& f) { write_matrix_csv(f, k); });
    }
  }
  emit(doc, a.output, out);
}

// --------------------------------------------------------------------- ode

struct OdeArgs {
  std::string graph;
  bool directed = false;
  std::string op = "neg-laplacian";
  double t = 1.0;
  std::size_t samples = 10;
  std::size_t walks = 16;
  double p_halt = 0.1;
  std::uint64_t seed = 0;
  std::size_t source = 0;
  std::string drive;
  KernelArgs drive_kernel;
  bool use_drive_kernel = false;
  std::size_t quad = 2001;
  bool no_exact = false;
  std::string x_csv;
  std::string output;
};

void run_ode(const OdeArgs& a, const Options& opts, unsigned threads, std::ostream& out) {
  Document doc("ode", opts, threads);
  OdeProblem p;
  p.graph = load_edge_list_file(a.graph, a.directed);
  p.op = parse_ode_operator(a.op);
  p.horizon = a.t;
  p.n_samples = a.samples;
  const std::size_t n = p.graph.num_nodes();
  if (!a.drive.empty()) {
    std::ifstream in(a.drive);
    if (!in) throw InvalidArgument("cannot open drive file '" + a.drive + "'");
    p.drive = read_tabulated(in);
  } else {
    if (a.source >= n) throw InvalidArgument("--source node " + std::to_string(a.source) + " is not in the graph");
    std::vector<double> y(n, 0.0);
    y[a.source] = 1.0;
    p.drive = y;
  }
  std::optional<KernelSpec> z;
  if (a.use_drive_kernel) z = a.drive_kernel.spec();

  auto start = Clock::now();
  const auto x_hat = simulate_grf(p, OdeGrfConfig{a.walks, a.p_halt, a.seed, threads}, z);
  doc.j["timing"]["grf_seconds"] = seconds_since(start);
  doc.j["x_hat"] = x_hat;
  if (!a.no_exact && n <= kMaxDenseNodes) {
    start = Clock::now();
    const auto x = simulate_exact(p, a.quad, z);
    doc.j["timing"]["exact_seconds"] = seconds_since(start);
    doc.j["x_exact"] = x;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += (x_hat[i] - x[i]) * (x_hat[i] - x[i]);
      den += x[i] * x[i];
    }
    doc.j["metrics"]["relative_error"] = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  }
  if (!a.x_csv.empty()) {
    write_file(a.x_csv, [&](std::ostream& f) {
      f.precision(std::numeric_limits<double>::max_digits10);
      f << "node,x_hat\n";
      for (std::size_t i = 0; i < n; ++i) f << i << ',' << x_hat[i] << '\n';
    });
  }
  emit(doc, a.output, out);
}

// ----------------------------------------------------------------- cluster

struct ClusterArgs {
  std::string graph;
  bool directed = false;
  int k = 3;
  double sigma2 = 0.2;
  std::size_t walks = 80;
  double p_halt = 0.1;
  std::uint64_t seed = 0;
  std::size_t max_iters = 300;
  std::size_t restarts = 10;
  std::string labels_csv;
  std::string output;
};

void run_cluster(const ClusterArgs& a, const Options& opts, unsigned threads, std::ostream& out) {
  Document doc("cluster", opts, threads);
  const Graph g = load_edge_list_file(a.graph, a.directed);
  if (g.num_nodes() > kMaxDenseNodes) throw InvalidArgument("cluster: graph exceeds the dense limit");
  // K = exp(sigma2 A) on the raw adjacency.
  const ModulationFn f =
      closed_form_modulation(KernelSpec::diffusion(1.0), /*absorb_scale=*/false).scaled(a.sigma2);
  auto start = Clock::now();
  const DenseMatrix k = expm(a.sigma2 * g.to_dense());
  doc.j["timing"]["exact_seconds"] = seconds_since(start);
  start = Clock::now();
  const auto [phi1, phi2] = sample_feature_pair(g, f, f, WalkConfig{a.p_halt, a.walks, 1.0, a.seed, threads});
  const DenseMatrix k_hat = estimate_gram(phi1, phi2, false, threads);
  doc.j["timing"]["grf_seconds"] = seconds_since(start);
  const auto exact = kernel_kmeans(k, a.k, a.max_iters, a.seed, a.restarts);
  const auto approx = kernel_kmeans(k_hat, a.k, a.max_iters, a.seed, a.restarts);
  doc.j["metrics"]["clustering_error"] = clustering_error(exact.labels, approx.labels);
  doc.j["metrics"]["relative_frobenius_error"] = relative_frobenius_error(k, k_hat);
  doc.j["metrics"]["exact_iterations"] = exact.iterations;
  doc.j["metrics"]["grf_iterations"] = approx.iterations;
  doc.j["labels_exact"] = exact.labels;
  doc.j["labels_grf"] = approx.labels;
  if (!a.labels_csv.empty()) {
    write_file(a.labels_csv, [&](std::ostream& o) {
      o << "node,exact,grf\n";
      for (std::size_t i = 0; i < exact.labels.size(); ++i) {
        o << i << ',' << exact.labels[i] << ',' << approx.labels[i] << '\n';
      }
    });
  }
  emit(doc, a.output, out);
}

// ----------------------------------------------------------------- regress

struct RegressArgs {
  std::string graph;
  std::string attrs;
  MeshArgs mesh;
  KernelArgs kernel;
  std::string params;
  double walk_sigma = 1.0;
  double mask_fraction = 0.05;
  std::size_t walks = 16;
  double p_halt = 0.5;
  std::uint64_t seed = 0;
  std::string pred_csv;
  std::string mask_csv;
  std::string output;
};

std::pair<Graph, DenseMatrix> load_attributed(const std::string& graph, const std::string& attrs,
                                              const MeshArgs& mesh) {
  if (!mesh.mesh.empty()) {
    if (!graph.empty() || !attrs.empty()) throw InvalidArgument("use either --mesh or --graph/--attrs, not both");
    Mesh m = mesh.build();
    return {std::move(m.graph), std::move(m.normals)};
  }
  if (graph.empty() || attrs.empty()) throw InvalidArgument("need --graph and --attrs (or --mesh)");
  DenseMatrix v = read_attributes_file(attrs);
  Graph g = load_edge_list_file(graph, false, static_cast<std::size_t>(v.rows()));
  if (g.num_nodes() != static_cast<std::size_t>(v.rows())) {
    throw InvalidArgument("attribute file has " + std::to_string(v.rows()) + " rows but the graph has " +
                          std::to_string(g.num_nodes()) + " nodes");
  }
  return {std::move(g), std::move(v)};
}

void run_regress(const RegressArgs& a, const Options& opts, unsigned threads, std::ostream& out) {
  Document doc("regress", opts, threads);
  const auto [g, attrs] = load_attributed(a.graph, a.attrs, a.mesh);
  const Graph walk = normalized_adjacency(g);
  const auto mask = read_mask_or_draw(g.num_nodes(), a.mask_fraction, a.seed);
  WalkConfig wc{a.p_halt, a.walks, 1.0, a.seed, threads};
  ModulationFn f1;
  ModulationFn f2;
  std::optional<KernelSpec> spec;
  if (!a.params.empty()) {
    std::ifstream in(a.params);
    if (!in) throw InvalidArgument("cannot open parameter file '" + a.params + "'");
    const auto learned = read_params_json(in);
    f1 = to_modulation(learned.f1);
    f2 = to_modulation(learned.f2);
    wc.sigma = a.walk_sigma;
  } else {
    spec = a.kernel.spec();
    f1 = f2 = kernel_modulation(*spec);
  }
  auto start = Clock::now();
  const auto [phi1, phi2] = sample_feature_pair(walk, f1, f2, wc);
  const DenseMatrix pred = kernel_regression_predict(phi1, phi2, attrs, mask);
  doc.j["timing"]["grf_seconds"] = seconds_since(start);
  doc.j["metrics"]["angular_error"] = angular_error(pred, attrs, mask);
  if (spec && g.num_nodes() <= kMaxDenseNodes) {
    const DenseMatrix k = exact_kernel(g, *spec);
    doc.j["metrics"]["exact_kernel_angular_error"] =
        angular_error(kernel_regression_predict(k, attrs, mask), attrs, mask);
  }
  std::vector<std::size_t> masked;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) masked.push_back(i);
  }
  doc.j["masked_nodes"] = masked;
  if (!a.pred_csv.empty()) {
    write_file(a.pred_csv, [&](std::ostream& o) {
      o.precision(std::numeric_limits<double>::max_digits10);
      o << "node,x,y,z\n";
      for (std::size_t i : masked) {
        const auto r = static_cast<Eigen::Index>(i);
        o << i << ',' << pred(r, 0) << ',' << pred(r, 1) << ',' << pred(r, 2) << '\n';
      }
    });
  }
  if (!a.mask_csv.empty()) {
    write_file(a.mask_csv, [&](std::ostream& o) {
      o << "node,masked\n";
      for (std::size_t i = 0; i < mask.size(); ++i) o << i << ',' << (mask[i] ? 1 : 0) << '\n';
    });
  }
  emit(doc, a.output, out);
}

// --------------------------------------------------------------- train-mod

struct TrainArgs {
  std::string graph;
  std::string attrs;
  MeshArgs mesh;
  std::string loss = "frobenius";
  KernelArgs kernel;
  double holdout = 0.05;
  double lr = 0.01;
  double gamma = 0.975;
  std::size_t epochs = 1000;
  std::size_t walks = 16;
  double p_halt = 0.5;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  bool asymmetric = false;
  std::string init = "-0.5,1,1,0";
  std::size_t k_max = 10;
  std::string params_out;
  std::string trace_csv;
  std::string output;
};

int run_train(const TrainArgs& a, const Options& opts, unsigned threads, std::ostream& out) {
  Document doc("train-mod", opts, threads);
  TrainConfig cfg;
  cfg.learning_rate = a.lr;
  cfg.gamma = a.gamma;
  cfg.epochs = a.epochs;
  cfg.m = a.walks;
  cfg.p_halt = a.p_halt;
  cfg.seed = a.seed;
  cfg.threads = threads;
  cfg.asymmetric = a.asymmetric;
  cfg.init = parse_init(a.init);
  Graph walk;
  if (a.loss == "frobenius") {
    if (!a.mesh.mesh.empty() || !a.attrs.empty()) throw InvalidArgument("frobenius loss takes --graph only");
    if (a.graph.empty()) throw InvalidArgument("frobenius loss needs --graph");
    const Graph g = load_edge_list_file(a.graph, false);
    if (g.num_nodes() > kMaxDenseNodes) throw InvalidArgument("frobenius loss needs a graph small enough for the exact oracle");
    const KernelSpec spec = a.kernel.spec();
    walk = normalized_adjacency(g);
    // The target is the normalised series; its regulariser is walked as sigma.
    cfg.loss = FrobeniusLoss{operator_kernel(walk.to_dense(), spec)};
    cfg.sigma = a.sigma > 0.0 ? a.sigma : spec.scale();
  } else if (a.loss == "angular") {
    auto [g, attrs] = load_attributed(a.graph, a.attrs, a.mesh);
    walk = normalized_adjacency(g);
    cfg.loss = AngularLoss{std::move(attrs), a.holdout};
    cfg.sigma = a.sigma > 0.0 ? a.sigma : 1.0;
  } else {
    throw InvalidArgument("--loss must be frobenius or angular");
  }
  doc.j["metrics"]["walk_sigma"] = cfg.sigma;
  const auto start = Clock::now();
  const TrainResult result = train_modulation(walk, cfg);
  doc.j["timing"]["train_seconds"] = seconds_since(start);
  std::ostringstream params;
  write_params_json(params, result);
  doc.j["params"] = json::parse(params.str());
  doc.j["metrics"]["epochs_run"] = result.trace.size();
  if (!result.trace.empty()) {
    doc.j["metrics"]["initial_loss"] = result.trace.front();
    doc.j["metrics"]["final_loss"] = result.trace.back();
  }
  doc.j["metrics"]["f1_table"] = neural_mod_table(result.f1, a.k_max + 1);
  doc.j["metrics"]["implied_coefficients"] = implied_coefficients(result.f1, result.f2, a.k_max);
  if (!a.params_out.empty()) write_file(a.params_out, [&](std::ostream& o) { write_params_json(o, result); });
  if (!a.trace_csv.empty()) write_file(a.trace_csv, [&](std::ostream& o) { write_trace_csv(o, result.trace); });
  int code = 0;
  if (result.abort_reason) {
    doc.j["error"] = *result.abort_reason;
    code = 2;
  }
  emit(doc, a.output, out);
  return code;
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
  std::string family = "er";
  std::string nodes = "100..1600";
  double degree = 10.0;
  KernelArgs kernel;
  double p_halt = 0.5;
  std::size_t walks = 8;
  std::size_t repeats = 3;
  std::uint64_t seed = 0;
  std::size_t max_exact_nodes = 4096;
  std::string csv;
  std::string output;
};

void run_bench_command(const BenchArgs& a, const Options& opts, unsigned threads, std::ostream& out) {
  Document doc("bench", opts, threads);
  BenchConfig cfg;
  cfg.family = a.family;
  cfg.nodes = parse_node_range(a.nodes);
  cfg.degree = a.degree;
  cfg.kernel = a.kernel.spec();
  cfg.p_halt = a.p_halt;
  cfg.m = a.walks;
  cfg.repeats = a.repeats;
  cfg.seed = a.seed;
  cfg.threads = threads;
  cfg.max_exact_nodes = a.max_exact_nodes;
  const auto rows = run_bench(cfg);
  std::vector<double> ns;
  std::vector<double> grf;
  std::vector<double> en;
  std::vector<double> exact;
  json jrows = json::array();
  for (const auto& r : rows) {
    ns.push_back(static_cast<double>(r.n));
    grf.push_back(r.grf_seconds);
    if (std::isfinite(r.exact_seconds)) {
      en.push_back(static_cast<double>(r.n));
      exact.push_back(r.exact_seconds);
    }
    jrows.push_back({{"n", r.n},
                     {"exact_seconds", std::isfinite(r.exact_seconds) ? json(r.exact_seconds) : json(nullptr)},
                     {"grf_seconds", r.grf_seconds},
                     {"error", std::isfinite(r.error) ? json(r.error) : json(nullptr)}});
  }
  doc.j["timing"]["rows"] = jrows;
  if (ns.size() >= 2) doc.j["timing"]["grf_exponent"] = fit_exponent(ns, grf);
  if (en.size() >= 2) doc.j["timing"]["exact_exponent"] = fit_exponent(en, exact);
  if (!a.csv.empty()) {
    write_file(a.csv, [&](std::ostream& o) {
      o.precision(std::numeric_limits<double>::max_digits10);
      o << "n,exact_seconds,grf_seconds,error\n";
      for (const auto& r : rows) {
        o << r.n << ',';
        if (std::isfinite(r.exact_seconds)) o << r.exact_seconds;
        o << ',' << r.grf_seconds << ',';
        if (std::isfinite(r.error)) o << r.error;
        o << '\n';
      }
    });
  }
  emit(doc, a.output, out);
}

// --------------------------------------------------------------- gen-graph

struct GenArgs {
  std::string family = "er";
  std::size_t nodes = 100;
  double p_edge = -1.0;
  double degree = 10.0;
  std::size_t rows = 20;
  std::size_t cols = 20;
  std::uint64_t seed = 0;
  std::string graph_out;
  std::string attrs_out;
  std::string output;
};

void run_gen(const GenArgs& a, const Options& opts, std::ostream& out) {
  Document doc("gen-graph", opts, 1);
  Graph g;
  std::optional<DenseMatrix> normals;
  if (a.family == "wavy-grid" || a.family == "torus") {
    Mesh m = a.family == "torus" ? torus_mesh(a.rows, a.cols) : wavy_grid_mesh(a.rows, a.cols);
    g = std::move(m.graph);
    normals = std::move(m.normals);
  } else if (a.family == "er" && a.p_edge >= 0.0) {
    g = erdos_renyi(a.nodes, a.p_edge, a.seed);
  } else if (a.family == "grid" && opts.app()->count("--rows") + opts.app()->count("--cols") > 0) {
    g = triangulated_grid(a.rows, a.cols);
  } else {
    g = make_graph(a.family, a.nodes, a.degree, a.seed);
  }
  write_file(a.graph_out, [&](std::ostream& o) {
    o << "# " << a.family << " graph, " << g.num_nodes() << " nodes, seed " << a.seed << '\n';
    write_edge_list(o, g, /*undirected_once=*/true);
  });
  if (!a.attrs_out.empty()) {
    if (!normals) throw InvalidArgument("--attrs-out needs a mesh family (wavy-grid or torus)");
    write_file(a.attrs_out, [&](std::ostream& o) { write_attributes(o, *normals); });
  }
  doc.j["metrics"]["num_nodes"] = g.num_nodes();
  doc.j["metrics"]["num_directed_edges"] = g.num_edges();
  emit(doc, a.output, out);
}

}  // namespace

Graph make_graph(std::string_view family, std::size_t n, double degree, std::uint64_t seed) {
  if (family == "er") {
    if (n < 2) throw InvalidArgument("er graphs need at least two nodes");
    return erdos_renyi(n, std::min(1.0, degree / static_cast<double>(n - 1)), seed);
  }
  if (family == "tree") return binary_tree(n);
  if (family == "regular") return random_regular(n, static_cast<std::size_t>(std::llround(degree)), seed);
  if (family == "grid") {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    return triangulated_grid(side, side);
  }
  throw InvalidArgument("unknown graph family '" + std::string(family) + "' (expected er, tree, regular or grid)");
}

std::vector<std::size_t> parse_node_range(std::string_view text) {
  auto parse = [](std::string_view s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || v == 0) {
      throw InvalidArgument("invalid node count '" + std::string(s) + "'");
    }
    return v;
  };
  std::vector<std::size_t> out;
  if (const auto dots = text.find(".."); dots != std::string_view::npos) {
    const std::size_t lo = parse(text.substr(0, dots));
    const std::size_t hi = parse(text.substr(dots + 2));
    if (hi < lo) throw InvalidArgument("node range must be increasing");
    for (std::size_t v = lo; v <= hi; v *= 2) out.push_back(v);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    out.push_back(parse(text.substr(start, end - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
  cfg.kernel.validate();
  if (cfg.repeats < 1) throw InvalidArgument("bench needs at least one repeat");
  const ModulationFn f = kernel_modulation(cfg.kernel);
  std::vector<BenchRow> rows;
  for (std::size_t idx = 0; idx < cfg.nodes.size(); ++idx) {
    const std::size_t n = cfg.nodes[idx];
    const Graph g = make_graph(cfg.family, n, cfg.degree, derive_seed(cfg.seed, idx));
    const Graph walk = normalized_adjacency(g);
    BenchRow row;
    row.n = g.num_nodes();
    std::vector<double> v(row.n, 0.0);
    v[0] = 1.0;
    row.grf_seconds = std::numeric_limits<double>::infinity();
    std::pair<FeatureMatrix, FeatureMatrix> pair;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      const auto start = Clock::now();
      pair = sample_feature_pair(walk, f, f, WalkConfig{cfg.p_halt, cfg.m, 1.0, derive_seed(cfg.seed, idx, r), cfg.threads});
      const auto y = kernel_matvec(pair.first, pair.second, v);
      row.grf_seconds = std::min(row.grf_seconds, seconds_since(start));
      if (!std::isfinite(y[0])) throw NumericalError("bench: non-finite kernel product");
    }
    row.exact_seconds = std::numeric_limits<double>::quiet_NaN();
    row.error = std::numeric_limits<double>::quiet_NaN();
    if (row.n <= cfg.max_exact_nodes) {
      DenseMatrix k;
      row.exact_seconds = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < cfg.repeats; ++r) {
        const auto start = Clock::now();
        k = exact_kernel(g, cfg.kernel);
        row.exact_seconds = std::min(row.exact_seconds, seconds_since(start));
      }
      const DenseMatrix k_hat = cfg.kernel.prefactor() * estimate_gram(pair.first, pair.second, false, cfg.threads);
      row.error = relative_frobenius_error(k, k_hat);
    }
    rows.push_back(row);
  }
  return rows;
}

double fit_exponent(std::span<const double> n, std::span<const double> t) {
  if (n.size() != t.size() || n.size() < 2) throw InvalidArgument("fit_exponent needs two or more points");
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0 && t[i] > 0.0)) throw InvalidArgument("fit_exponent needs positive values");
    sx += std::log(n[i]);
    sy += std::log(t[i]);
  }
  const double mx = sx / static_cast<double>(n.size());
  const double my = sy / static_cast<double>(n.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double dx = std::log(n[i]) - mx;
    sxy += dx * (std::log(t[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"General graph random features: kernel estimation, graph ODEs, clustering, "
               "regression and learned modulation",
               "ggrf"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (default: $GGRF_THREADS or all cores)");

  EstimateArgs est;
  auto* est_cmd = app.add_subcommand("estimate", "estimate a kernel with g-GRFs and compare to the exact oracle");
  Options est_opts(est_cmd);
  est_opts.add("--graph", est.graph, "edge list file")->required()->check(CLI::ExistingFile);
  est_opts.flag("--directed", est.directed, "treat edges as directed");
  est.kernel.add(est_opts);
  est_opts.add("--p-halt", est.p_halt, "termination probability per step");
  est_opts.add("--walks,-m", est.walks, "walks per node");
  est_opts.add("--seed", est.seed, "random seed");
  est_opts.add("--params", est.params, "learned modulation parameters (JSON from train-mod)")->check(CLI::ExistingFile);
  est_opts.flag("--no-exact", est.no_exact, "skip the exact oracle");
  est_opts.add("--gram-csv", est.gram_csv, "write the estimated Gram matrix");
  est_opts.add("--exact-csv", est.exact_csv, "write the exact kernel");
  est_opts.add("--output,-o", est.output, "write the JSON result here instead of stdout");

  OdeArgs ode;
  auto* ode_cmd = app.add_subcommand("ode", "solve dx/dt = W x + y(t) by Monte Carlo with g-GRFs");
  Options ode_opts(ode_cmd);
  ode_opts.add("--graph", ode.graph, "edge list file")->required()->check(CLI::ExistingFile);
  ode_opts.flag("--directed", ode.directed, "treat edges as directed");
  ode_opts.add("--operator", ode.op, "laplacian, neg-laplacian or raw")
      ->check(CLI::IsMember({"laplacian", "neg-laplacian", "raw"}));
  ode_opts.add("--t", ode.t, "time horizon");
  ode_opts.add("--samples,-n", ode.samples, "Monte-Carlo time samples");
  ode_opts.add("--walks,-m", ode.walks, "walks per node");
  ode_opts.add("--p-halt", ode.p_halt, "termination probability per step");
  ode_opts.add("--seed", ode.seed, "random seed");
  ode_opts.add("--source", ode.source, "node driven by a unit constant source (ignored with --drive)");
  ode_opts.add("--drive", ode.drive, "constant drive vector, one value per line")->check(CLI::ExistingFile);
  ode_opts.flag("--use-drive-kernel", ode.use_drive_kernel, "premultiply the drive by the kernel given by --drive-*");
  ode.drive_kernel.add(ode_opts, "drive-");
  ode_opts.add("--quad", ode.quad, "trapezoid nodes for the exact reference");
  ode_opts.flag("--no-exact", ode.no_exact, "skip the exact reference");
  ode_opts.add("--x-csv", ode.x_csv, "write the estimated state");
  ode_opts.add("--output,-o", ode.output, "write the JSON result here instead of stdout");

  ClusterArgs cl;
  auto* cl_cmd = app.add_subcommand("cluster", "kernel k-means with exact and g-GRF kernels exp(sigma2 A)");
  Options cl_opts(cl_cmd);
  cl_opts.add("--graph", cl.graph, "edge list file")->required()->check(CLI::ExistingFile);
  cl_opts.flag("--directed", cl.directed, "treat edges as directed");
  cl_opts.add("--k", cl.k, "number of clusters");
  cl_opts.add("--sigma2", cl.sigma2, "kernel is exp(sigma2 * adjacency)");
  cl_opts.add("--walks,-m", cl.walks, "walks per node");
  cl_opts.add("--p-halt", cl.p_halt, "termination probability per step");
  cl_opts.add("--seed", cl.seed, "random seed (walks and k-means seeding)");
  cl_opts.add("--max-iters", cl.max_iters, "Lloyd iteration cap");
  cl_opts.add("--restarts", cl.restarts, "k-means restarts, best objective kept");
  cl_opts.add("--labels-csv", cl.labels_csv, "write both labelings");
  cl_opts.add("--output,-o", cl.output, "write the JSON result here instead of stdout");

  RegressArgs rg;
  auto* rg_cmd = app.add_subcommand("regress", "predict held-out node vectors by kernel regression");
  Options rg_opts(rg_cmd);
  rg_opts.add("--graph", rg.graph, "edge list file")->check(CLI::ExistingFile);
  rg_opts.add("--attrs", rg.attrs, "attribute file, three numbers per node")->check(CLI::ExistingFile);
  rg.mesh.add(rg_opts);
  rg.kernel.add(rg_opts);
  rg_opts.add("--params", rg.params, "learned modulation parameters (JSON)")->check(CLI::ExistingFile);
  rg_opts.add("--walk-sigma", rg.walk_sigma, "weight multiplier when walking with --params");
  rg_opts.add("--mask-fraction", rg.mask_fraction, "fraction of nodes held out");
  rg_opts.add("--walks,-m", rg.walks, "walks per node");
  rg_opts.add("--p-halt", rg.p_halt, "termination probability per step");
  rg_opts.add("--seed", rg.seed, "random seed (mask and walks)");
  rg_opts.add("--pred-csv", rg.pred_csv, "write predictions for held-out nodes");
  rg_opts.add("--mask-csv", rg.mask_csv, "write the mask");
  rg_opts.add("--output,-o", rg.output, "write the JSON result here instead of stdout");

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train-mod", "train the four-parameter neural modulation function");
  Options tr_opts(tr_cmd);
  tr_opts.add("--graph", tr.graph, "edge list file")->check(CLI::ExistingFile);
  tr_opts.add("--attrs", tr.attrs, "attribute file for the angular loss")->check(CLI::ExistingFile);
  tr.mesh.add(tr_opts);
  tr_opts.add("--loss", tr.loss, "frobenius or angular")->check(CLI::IsMember({"frobenius", "angular"}));
  tr.kernel.add(tr_opts);
  tr_opts.add("--holdout", tr.holdout, "held-out fraction per epoch (angular loss)");
  tr_opts.add("--lr", tr.lr, "initial learning rate");
  tr_opts.add("--gamma", tr.gamma, "learning rate decay per epoch");
  tr_opts.add("--epochs", tr.epochs, "training epochs");
  tr_opts.add("--walks,-m", tr.walks, "walks per node");
  tr_opts.add("--p-halt", tr.p_halt, "termination probability per step");
  tr_opts.add("--sigma-walk", tr.sigma, "weight multiplier while walking (0: kernel scale, or 1 for angular)");
  tr_opts.add("--seed", tr.seed, "random seed");
  tr_opts.flag("--asymmetric", tr.asymmetric, "train separate f1 and f2");
  tr_opts.add("--init", tr.init, "initial w1,b1,w2,b2");
  tr_opts.add("--k-max", tr.k_max, "report implied coefficients up to this power");
  tr_opts.add("--params-out", tr.params_out, "write learned parameters (JSON)");
  tr_opts.add("--trace-csv", tr.trace_csv, "write the per-epoch loss");
  tr_opts.add("--output,-o", tr.output, "write the JSON result here instead of stdout");

  BenchArgs bn;
  auto* bn_cmd = app.add_subcommand("bench", "time exact and g-GRF kernel evaluation over graph sizes");
  Options bn_opts(bn_cmd);
  bn_opts.add("--graph-family", bn.family, "er, tree, regular or grid")
      ->check(CLI::IsMember({"er", "tree", "regular", "grid"}));
  bn_opts.add("--nodes", bn.nodes, "sizes: 'lo..hi' doubling, or a comma list");
  bn_opts.add("--degree", bn.degree, "expected degree (er) or degree (regular)");
  bn.kernel.sigma = 0.5;
  bn.kernel.add(bn_opts);
  bn_opts.add("--p-halt", bn.p_halt, "termination probability per step");
  bn_opts.add("--walks,-m", bn.walks, "walks per node");
  bn_opts.add("--repeats", bn.repeats, "timing repeats, fastest kept");
  bn_opts.add("--seed", bn.seed, "random seed");
  bn_opts.add("--max-exact-nodes", bn.max_exact_nodes, "skip the exact oracle above this size");
  bn_opts.add("--csv", bn.csv, "write n,exact_seconds,grf_seconds,error");
  bn_opts.add("--output,-o", bn.output, "write the JSON result here instead of stdout");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-graph", "generate a graph (and mesh normals) as an edge list");
  Options gen_opts(gen_cmd);
  gen_opts.add("--family", gen.family, "er, tree, regular, grid, wavy-grid or torus")
      ->check(CLI::IsMember({"er", "tree", "regular", "grid", "wavy-grid", "torus"}));
  gen_opts.add("--nodes", gen.nodes, "node count (er, tree, regular, grid)");
  gen_opts.add("--p-edge", gen.p_edge, "edge probability for er (overrides --degree)");
  gen_opts.add("--degree", gen.degree, "expected degree (er) or degree (regular)");
  gen_opts.add("--rows", gen.rows, "rows (grid, wavy-grid) or major segments (torus)");
  gen_opts.add("--cols", gen.cols, "columns (grid, wavy-grid) or minor segments (torus)");
  gen_opts.add("--seed", gen.seed, "random seed");
  gen_opts.add("--graph-out", gen.graph_out, "edge list destination")->required();
  gen_opts.add("--attrs-out", gen.attrs_out, "normals destination (mesh families)");
  gen_opts.add("--output,-o", gen.output, "write the JSON summary here instead of stdout");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    err << "run with --help for usage\n";
    return 1;
  }

  try {
    if (*est_cmd) run_estimate(est, est_opts, threads, out);
    if (*ode_cmd) run_ode(ode, ode_opts, threads, out);
    if (*cl_cmd) run_cluster(cl, cl_opts, threads, out);
    if (*rg_cmd) run_regress(rg, rg_opts, threads, out);
    if (*tr_cmd) return run_train(tr, tr_opts, threads, out);
    if (*bn_cmd) run_bench_command(bn, bn_opts, threads, out);
    if (*gen_cmd) run_gen(gen, gen_opts, out);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace ggrf::cli
