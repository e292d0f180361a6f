#pragma once

#include <Eigen/Dense>

#include "ekhmc/ensemble.hpp"
#include "ekhmc/inverse_problem.hpp"

namespace ekhmc::ref {

/// Serial reference implementations of the OpenMP-parallel kernels. These are
/// deliberately written as plain loops; tests require the parallel versions
/// to reproduce them bit-exactly, and the benchmark target compares timings.

Eigen::MatrixXd forward_batch(const InverseProblem& p, const Eigen::MatrixXd& positions);

Eigen::MatrixXd preconditioned_noise(const CenteredSpread& spread, double scale,
                                     const RngStream& stream);

Eigen::MatrixXd force_exact(const GradientMap& grad_phi, const Ensemble& e);

}  // namespace ekhmc::ref
