#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ggrf/cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = ggrf::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "ggrf_unit_cli";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"estimate", "--graph", "/no/such/file.edges"}).code == 1);
  CHECK(run({"estimate", "--graph", GGRF_DATA_DIR "/karate.edges", "--walks", "0"}).code == 1);
  CHECK(run({"estimate", "--graph", GGRF_DATA_DIR "/karate.edges", "--bogus"}).code == 1);
}

TEST_CASE("version and help") {
  const Run v = run({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find(ggrf::cli::kVersion) != std::string::npos);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("estimate document") {
  const Run r = run({"estimate", "--graph", GGRF_DATA_DIR "/karate.edges", "--kernel", "diffusion",
                     "--sigma", "0.25", "--p-halt", "0.1", "--walks", "32", "--seed", "7"});
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["command"] == "estimate");
  CHECK(doc["inputs"]["seed"] == 7);
  CHECK(doc["metrics"]["num_nodes"] == 34);
  CHECK(doc["metrics"]["relative_frobenius_error"].get<double>() < 0.2);
  CHECK(doc.contains("timing"));
  CHECK(doc["versions"].contains("ggrf"));
}

TEST_CASE("inverse cosine takes the iterative path") {
  const Run r = run({"estimate", "--graph", GGRF_DATA_DIR "/karate.edges", "--kernel", "inverse_cosine",
                     "--walks", "8"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["metrics"]["modulation"].get<std::string>().find("iterative") != std::string::npos);
}

TEST_CASE("gen-graph writes a loadable edge list") {
  const fs::path out = scratch_dir() / "er.edges";
  const Run r = run({"gen-graph", "--family", "er", "--nodes", "40", "--p-edge", "0.2", "--seed", "3",
                     "--graph-out", out.string()});
  REQUIRE(r.code == 0);
  const Run e = run({"estimate", "--graph", out.string(), "--walks", "4", "--no-exact"});
  CHECK(e.code == 0);
}

TEST_CASE("node ranges") {
  CHECK(ggrf::cli::parse_node_range("100..800") == std::vector<std::size_t>{100, 200, 400, 800});
  CHECK(ggrf::cli::parse_node_range("10,20,30") == std::vector<std::size_t>{10, 20, 30});
  CHECK_THROWS(ggrf::cli::parse_node_range("x..3"));
}

TEST_CASE("exponent fit") {
  const std::vector<double> n{1, 2, 4, 8};
  const std::vector<double> t{3, 12, 48, 192};
  CHECK(ggrf::cli::fit_exponent(n, t) == doctest::Approx(2.0));
}

}
