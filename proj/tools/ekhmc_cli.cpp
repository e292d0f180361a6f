#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ekhmc/config.hpp"
#include "ekhmc/experiment.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void apply_thread_cap() {
#ifdef _OPENMP
  if (const char* cap = std::getenv("EKHMC_MAX_THREADS")) {
    const int n = std::atoi(cap);
    if (n >= 1) omp_set_num_threads(n);
  }
#endif
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ekhmc: ensemble Kalman Hamiltonian Monte Carlo experiments"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("config", config_path, "flat key = value config file")->required();

  double gmin = 0.1, gmax = 100.0;
  int steps = 200;
  std::string sweep_out = "gamma_sweep.csv";
  CLI::App* sweep = app.add_subcommand(
      "sweep-gamma", "tabulate the linear-problem spectral gap over a gamma range");
  sweep->add_option("--min", gmin, "smallest gamma")->capture_default_str();
  sweep->add_option("--max", gmax, "largest gamma")->capture_default_str();
  sweep->add_option("--steps", steps, "number of log-spaced samples")
      ->capture_default_str();
  sweep->add_option("--out", sweep_out, "output CSV path")->capture_default_str();

  std::string problem_name;
  CLI::App* describe = app.add_subcommand(
      "describe-defaults", "print the default config for a problem");
  describe->add_option("problem", problem_name, "linear | elliptic1d | darcy")
      ->required();

  CLI11_PARSE(app, argc, argv);
  apply_thread_cap();

  if (run->parsed()) {
    ekhmc::ExperimentConfig cfg;
    try {
      cfg = ekhmc::parse_config(read_file(config_path));
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 1;
    }
    return ekhmc::run_experiment(cfg);
  }
  if (sweep->parsed()) return ekhmc::emit_gamma_sweep(gmin, gmax, steps, sweep_out);

  ekhmc::ProblemKind kind;
  if (problem_name == "linear") kind = ekhmc::ProblemKind::kLinear;
  else if (problem_name == "elliptic1d") kind = ekhmc::ProblemKind::kElliptic1d;
  else if (problem_name == "darcy") kind = ekhmc::ProblemKind::kDarcy;
  else {
    std::cerr << "unknown problem '" << problem_name
              << "' (expected linear, elliptic1d or darcy)\n";
    return 1;
  }
  std::cout << ekhmc::default_config(kind).to_text();
  return 0;
}
