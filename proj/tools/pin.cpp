#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "config.hpp"
#include "experiments.hpp"

int main(int argc, char** argv) {
  using namespace pin::cli;
  CLI::App app{"Disordered pinning model experiments"};
  std::string experiment, config_path, out_dir = ".";
  std::uint64_t seed = 0;
  int workers = 0;
  app.add_option("experiment", experiment, "sim | psi | uconv | cg-check | rege | hc | scan | smoothing | alpha-gt1")
      ->required()
      ->check(CLI::IsMember(experiment_names()));
  app.add_option("--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "overrides the configured seed");
  auto* workers_opt = app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "output directory");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  std::ifstream in(config_path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto parsed = parse_config(buf.str(), experiment);
  if (!parsed.ok()) {
    for (const auto& e : parsed.errors) std::cerr << config_path << ": " << e.str() << '\n';
    return kConfigError;
  }

  RunOptions opts;
  opts.out_dir = out_dir;
  opts.config_path = config_path;
  if (*seed_opt) opts.seed = seed;
  if (*workers_opt) opts.workers = workers;
  if (const char* env = std::getenv("PIN_BUDGET"); env && *env) {
    char* end = nullptr;
    const double b = std::strtod(env, &end);
    if (*end != '\0' || !(b > 0.0)) {
      std::cerr << "PIN_BUDGET: expected a positive number, got '" << env << "'\n";
      return kConfigError;
    }
    opts.budget = b;
  }
  try {
    return run(parsed.config, opts, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << experiment << ": " << e.what() << '\n';
    return 1;
  }
}
