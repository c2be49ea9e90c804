#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "sweep_io.hpp"

using masep::cli::run_cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "masep_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("prob at t = 0") {
  const Run r = run({"prob", "--p", "0.5", "--t", "0", "--y", "0,1", "--nu", "12", "--x", "0,1", "--pi", "12"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("value  ", 0) == 0);
  CHECK(std::stod(r.out.substr(7)) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("prob JSON record round-trips") {
  const Run r = run({"prob", "--p", "0.7", "--t", "0.5", "--y", "0,1", "--nu", "12", "--x", "0,1", "--pi", "21",
                     "--json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  for (const auto* key : {"p", "t", "y", "nu", "x", "pi", "value", "err", "M", "radius"}) CHECK(j.contains(key));
  CHECK(j["pi"] == "21");
  CHECK(j["y"] == std::vector<int>{0, 1});
  const double v = j["value"];
  CHECK(v > 0.0);
  CHECK(v < 1.0);
  CHECK(nlohmann::json::parse(j.dump()) == j);
}

TEST_CASE("prob matches the oracle-compare row") {
  const Run p = run({"prob", "--p", "0.7", "--t", "0.5", "--y", "0,1", "--nu", "12", "--x", "0,1", "--pi", "21",
                     "--json"});
  const Run c = run({"oracle-compare", "--p", "0.7", "--t", "0.5", "--window", "8"});
  REQUIRE(c.code == 0);
  const std::size_t at = c.out.find("\n0,1,21,");
  REQUIRE(at != std::string::npos);
  std::stringstream row(c.out.substr(at + 8));
  std::string exact;
  std::string oracle;
  std::getline(row, exact, ',');
  std::getline(row, oracle, ',');
  CHECK(std::abs(nlohmann::json::parse(p.out)["value"].get<double>() - std::stod(oracle)) < 1e-6);
  CHECK(c.out.find("status=pass") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 1);
  CHECK(run({"prob", "--p", "0.5"}).code == 1);
  CHECK(run({"prob", "--p", "1.5", "--t", "1", "--y", "0", "--nu", "1", "--x", "0", "--pi", "1"}).code == 1);
  const Run radius = run({"prob", "--p", "0.5", "--t", "1", "--y", "0", "--nu", "1", "--x", "0", "--pi", "1",
                          "--radius", "0.5"});
  CHECK(radius.code == 1);
  CHECK(radius.err.find("0.41421356") != std::string::npos);
  CHECK(run({"verify", "--suite", "nope"}).code == 1);
  CHECK(run({"prob", "--p", "0.5", "--t", "1", "--y", "0,1", "--nu", "12", "--x", "0,1", "--pi", "12", "--max-nodes",
             "32", "--tol", "1e-15"})
            .code == 2);
  CHECK(run({"oracle-compare", "--window", "3"}).code == 4);
  CHECK(run({"sweep", "--p", "0.5", "--y", "0", "--nu", "1", "--t-list", "1", "--out", "/nonexistent/dir/x.csv"})
            .code == 1);
}

TEST_CASE("cross-sector query is zero without nodes") {
  const Run r = run({"prob", "--p", "0.5", "--t", "1", "--y", "0,1", "--nu", "12", "--x", "0,1", "--pi", "11",
                     "--json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["value"].get<double>() == 0.0);
  CHECK(j["M"].get<int>() == 0);
}

TEST_CASE("verify output is deterministic") {
  const std::vector<std::string> args = {"verify", "--suite", "ybe", "--points", "5", "--seed", "3"};
  const Run a = run(args);
  const Run b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("suite,relation,sector,detail,point_seed,deviation,threshold,status\n", 0) == 0);
  CHECK(a.out.find("status=pass") != std::string::npos);
}

TEST_CASE("sweep writes CSV and an SVG equal to plot's") {
  const fs::path csv = scratch("sweep.csv");
  const fs::path svg = scratch("sweep.svg");
  const fs::path svg2 = scratch("replot.svg");
  const Run s = run({"sweep", "--p", "0.6", "--t-list", "0,0.5", "--y", "0,1", "--nu", "21", "--out", csv.string(),
                     "--plot", svg.string()});
  REQUIRE(s.code == 0);
  std::ifstream in(csv);
  const auto rows = masep::cli::read_sweep(in);
  double mass0 = 0.0;
  double mass1 = 0.0;
  for (const auto& row : rows) (row.t == 0.0 ? mass0 : mass1) += row.prob;
  CHECK(mass0 == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(mass1 == doctest::Approx(1.0).epsilon(1e-6));
  REQUIRE(run({"plot", "--in", csv.string(), "--out", svg2.string()}).code == 0);
  CHECK(slurp(svg) == slurp(svg2));
  CHECK(slurp(svg).rfind("<svg", 0) == 0);
}

TEST_CASE("sweep CSV helpers") {
  const masep::cli::SweepRow row{0.5, masep::State({-1, 2}, masep::SpeciesWord::parse("21")), 0.1};
  CHECK(masep::cli::sweep_header(2) == "t,x_1,x_2,pi,prob");
  CHECK(masep::cli::sweep_line(row) == "0.5,-1,2,21,0.10000000000000001");
  std::istringstream bad("t,x_1,pi,prob\n0,1,1\n");
  CHECK_THROWS(masep::cli::read_sweep(bad));
}
