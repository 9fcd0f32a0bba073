#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ggrf/graph.hpp"
#include "ggrf/kernel_spec.hpp"

namespace ggrf::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Generated graph families shared by `gen-graph` and `bench`.
/// er: G(n, degree / (n - 1)); tree: complete binary tree; regular: random
/// `degree`-regular; grid: triangulated sqrt(n) x sqrt(n) lattice.
Graph make_graph(std::string_view family, std::size_t n, double degree, std::uint64_t seed);

/// "100..1600" doubles from the first value up to the second; "10,20,30" is a list.
std::vector<std::size_t> parse_node_range(std::string_view text);

struct BenchConfig {
  std::string family = "er";
  std::vector<std::size_t> nodes{100, 200, 400, 800, 1600};
  double degree = 10.0;
  KernelSpec kernel = KernelSpec::diffusion(0.5);
  double p_halt = 0.5;
  std::size_t m = 8;
  std::size_t repeats = 3;  // best-of timing
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::size_t max_exact_nodes = 4096;
};

struct BenchRow {
  std::size_t n = 0;
  double exact_seconds = 0.0;  // NaN when N exceeds max_exact_nodes
  double grf_seconds = 0.0;    // sampling a feature pair plus one kernel_matvec
  double error = 0.0;          // relative Frobenius error, NaN without the exact kernel
};

std::vector<BenchRow> run_bench(const BenchConfig& cfg);

/// Least-squares slope of log(t) against log(n).
double fit_exponent(std::span<const double> n, std::span<const double> t);

}  // namespace ggrf::cli
