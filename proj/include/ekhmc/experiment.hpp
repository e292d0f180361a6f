#pragma once

#include <string>

#include "ekhmc/config.hpp"
#include "ekhmc/inverse_problem.hpp"

namespace ekhmc {

/// The built-in linear benchmark problem (N = 2), used when problem = linear.
LinearProblem make_builtin_linear_problem();

/// Runs the configured experiment and writes positions.csv, trace.csv,
/// metrics_*.csv and summary.json under cfg.output_dir.
/// Returns 0 on success, 2 on numerical failure.
int run_experiment(const ExperimentConfig& cfg);

/// Writes a CSV "gamma,gap" over a log-spaced grid of [min, max].
/// Returns 0 on success.
int emit_gamma_sweep(double gamma_min, double gamma_max, int steps,
                     const std::string& out_path);

}  // namespace ekhmc
