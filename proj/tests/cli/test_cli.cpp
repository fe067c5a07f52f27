#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "config.hpp"
#include "doctest.h"
#include "experiments.hpp"

using namespace pin::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("pin_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::map<std::string, std::string> manifest(const fs::path& dir) {
  std::map<std::string, std::string> kv;
  std::istringstream in(slurp(dir / "manifest.txt"));
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

int run_text(const std::string& experiment, const std::string& text, const fs::path& out, int workers = 1) {
  const auto parsed = parse_config(text, experiment);
  REQUIRE(parsed.ok());
  RunOptions opts;
  opts.out_dir = out;
  opts.workers = workers;
  std::ostringstream log;
  return run(parsed.config, opts, log);
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const auto r = parse_config("seed = 7\nsim.beta_hat = 1\nsim.h_hat = 0, 0.5\nsim.N = 64\n", "sim");
  REQUIRE(r.ok());
  CHECK(r.config.integer("seed") == 7);
  CHECK(r.config.real("law.alpha") == 0.75);
  CHECK(r.config.str("disorder.kind") == "gaussian");
  CHECK(r.config.integer("sim.replicas") == 256);
  CHECK(r.config.reals("sim.h_hat") == std::vector<double>{0.0, 0.5});
  CHECK(r.config.line("sim.N") == 4);
  CHECK(r.config.line("sim.replicas") == 0);
  CHECK_FALSE(r.config.has("sim.c"));
}

TEST_CASE("config errors are all reported with line numbers") {
  const std::string text =
      "seed = 1\n"
      "scan.beta_grid =\n"
      "# comment line\n"
      "scan.N = 4096.5\n"
      "nope.key = 3\n"
      "scan.replicas = 10\n"
      "scan.replicas = 12  # again\n"
      "just words\n"
      "uconv.intersection = maybe\n";
  const auto r = parse_config(text, "scan");
  REQUIRE(r.errors.size() == 6);
  CHECK(r.errors[0].str() == "line 2: scan.beta_grid: empty list");
  CHECK(r.errors[1].str() == "line 4: scan.N: type mismatch, expected an integer");
  CHECK(r.errors[2].str() == "line 5: nope.key: unknown key");
  CHECK(r.errors[3].str() == "line 7: scan.replicas: duplicate key (lines 6 and 7)");
  CHECK(r.errors[4].line == 8);
  CHECK(r.errors[5].str() == "line 9: uconv.intersection: type mismatch, expected true or false");

  const auto missing = parse_config("scan.N = 64\n", "scan");
  REQUIRE(missing.errors.size() == 2);
  CHECK(missing.errors[0].str() == "seed: missing required key");
  CHECK(missing.errors[1].str() == "scan.beta_grid: missing required key");

  CHECK_FALSE(parse_config("seed = 1\n", "nonsense").ok());
  CHECK(parse_config("seed = -1\n", "psi").errors.size() >= 1);
  CHECK(parse_config("seed = 1\nbudget = 0\npsi.delta_hat = 1\npsi.t_grid = 1\n", "psi").errors.at(0).key ==
        "budget");
}

TEST_CASE("hash of the config text") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("psi run at zero coupling gives a column of ones") {
  const auto out = scratch("psi");
  CHECK(run_text("psi", "seed = 1\npsi.delta_hat = 0\npsi.t_grid = 0.5, 1\n", out) == kOk);
  CHECK(slurp(out / "psi.csv") ==
        "# schema: psi v1\nnu,delta_hat,t,psi_hat,psi_hat_c,k_max,trunc_bound\n"
        "0.75,0,0.5,1,1,0,0\n0.75,0,1,1,1,0,0\n");
  const auto m = manifest(out);
  CHECK(m.at("status") == "ok");
  CHECK(m.at("seed") == "1");
  CHECK(m.at("config_hash").rfind("fnv1a64:", 0) == 0);
  CHECK(m.count("wall_time_s") == 1);
  CHECK(m.count("version") == 1);
  CHECK(slurp(out / "config.txt") == "seed = 1\npsi.delta_hat = 0\npsi.t_grid = 0.5, 1\n");
}

TEST_CASE("hc at zero coupling lands on the finite-size floor") {
  const auto out = scratch("hc");
  CHECK(run_text("hc", "seed = 2\nhc.beta = 0\nhc.N = 2048\nhc.replicas = 2\n", out) == kOk);
  std::istringstream in(slurp(out / "critical.csv"));
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  std::getline(in, line);
  const double hc = std::stod(line.substr(line.find(',') + 1));
  CHECK(hc > 0.0);
  CHECK(hc < 4.0 * std::pow(2048.0, -0.75));
}

TEST_CASE("exit codes") {
  SUBCASE("budget partial") {
    const auto out = scratch("budget");
    const auto parsed = parse_config("seed = 1\nhc.beta = 0.1, 0.2\nhc.N = 256\nhc.replicas = 8\n", "hc");
    RunOptions opts;
    opts.out_dir = out;
    opts.budget = 30.0 * 256 * 256 * 8;
    std::ostringstream log;
    CHECK(run(parsed.config, opts, log) == kBudgetPartial);
    CHECK(manifest(out).at("status") == "partial");
    CHECK(fs::exists(out / "critical.csv"));
    CHECK(log.str().find("budget") != std::string::npos);
  }
  SUBCASE("inconsistent settings") {
    const auto out = scratch("domain");
    CHECK(run_text("scan", "seed = 1\nscan.beta_grid = 0.2, 0.3\nscan.N = 64\nscan.replicas = 8\n", out) ==
          kConfigError);
    CHECK(manifest(out).at("status") == "config_error");
  }
  SUBCASE("series non-convergence") {
    const auto out = scratch("diag");
    CHECK(run_text("psi", "seed = 1\npsi.nu = 0.25\npsi.delta_hat = 1\npsi.t_grid = 1\n", out) == kDiagnostic);
    CHECK(manifest(out).at("status") == "diagnostic");
  }
  SUBCASE("coarse-grained enumeration cap") {
    const auto out = scratch("cgcap");
    CHECK(run_text("cg-check", "seed = 1\ncg.N = 5\ncg.t = 5\ncg.instances = 1\n", out) == kBudgetPartial);
  }
}

TEST_CASE("outputs are identical across runs and worker counts") {
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"sim", "seed = 4\nsim.beta_hat = 0.5, 1\nsim.h_hat = 0, 1\nsim.N = 128\nsim.replicas = 24\nsim.c = 2\n"},
      {"hc", "seed = 5\nhc.beta = 0.3\nhc.N = 256\nhc.replicas = 16\nsolver.tol = 1e-3\n"},
      {"cg-check", "seed = 6\ncg.N = 4\ncg.t = 3\ncg.instances = 3\n"},
      {"rege", "seed = 7\nrege.samples = 2000\nrege.write_samples = 5\nrege.gamma_grid = 0.01, 0.05\n"},
      {"uconv", "seed = 8\nuconv.N_list = 64, 128\n"},
      {"smoothing", "seed = 9\nsmoothing.beta = 0.4\nsmoothing.N = 256\nsmoothing.replicas = 16\nsolver.tol = 1e-3\n"},
  };
  for (const auto& [exp, text] : runs) {
    CAPTURE(exp);
    const auto a = scratch(exp + "_a"), b = scratch(exp + "_b");
    CHECK(run_text(exp, text, a, 1) == kOk);
    CHECK(run_text(exp, text, b, 3) == kOk);
    const auto outputs = manifest(a).at("outputs");
    CHECK(outputs == manifest(b).at("outputs"));
    std::istringstream names(outputs);
    for (std::string name; std::getline(names, name, ',');) {
      CAPTURE(name);
      CHECK(slurp(a / name) == slurp(b / name));
    }
  }
}
