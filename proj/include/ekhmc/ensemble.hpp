#pragma once

#include <Eigen/Dense>

#include "ekhmc/rng.hpp"

namespace ekhmc {

/// Positions and momenta of I particles in dimension N, one particle per
/// column. The particle count is written I throughout (the Darcy experiment
/// calls the same quantity J; a single count field covers both).
struct Ensemble {
  Eigen::MatrixXd positions;  // N x I
  Eigen::MatrixXd momenta;    // N x I

  Ensemble() = default;
  Ensemble(Eigen::MatrixXd q, Eigen::MatrixXd p);

  Eigen::Index dim() const { return positions.rows(); }
  Eigen::Index count() const { return positions.cols(); }
};

/// Mean, centered deviation matrix Q and covariance C_q = (1/I) Q Q^T of an
/// ensemble's positions. Normalization is 1/I, not 1/(I-1); the finite-size
/// correction identities depend on this convention.
struct CenteredSpread {
  Eigen::VectorXd mean;        // N
  Eigen::MatrixXd centered;    // N x I
  Eigen::MatrixXd covariance;  // N x N
};

Eigen::VectorXd ensemble_mean(const Eigen::MatrixXd& positions);

CenteredSpread ensemble_covariance(const Eigen::MatrixXd& positions);

/// Generalized (nonsymmetric) square root Q / sqrt(I); satisfies S S^T = C_q.
Eigen::MatrixXd generalized_sqrt(const CenteredSpread& spread);

/// Returns sqrt(scale) * (Q/sqrt(I)) * Xi where Xi is I x I standard normal,
/// column i drawn from stream.substream(i). Each column has covariance
/// scale * C_q in law. Xi is never materialized; memory is O(N*I).
Eigen::MatrixXd preconditioned_noise(const CenteredSpread& spread, double scale,
                                     const RngStream& stream);

/// Maps positions through q -> A q + b and momenta through p -> A p.
Ensemble affine_map(const Ensemble& e, const Eigen::MatrixXd& A,
                    const Eigen::VectorXd& b);

/// Solves against C_q. Uses a plain Cholesky factorization when C_q is
/// numerically positive definite; otherwise solves against
/// C_q + delta I with delta = 1e-10 * trace(C_q)/N (floored at 1e-300 so a
/// collapsed ensemble still yields finite solves of zero right-hand sides).
class CovarianceSolver {
 public:
  explicit CovarianceSolver(const Eigen::MatrixXd& covariance);

  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return llt_.solve(rhs); }
  double shift() const { return shift_; }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double shift_ = 0.0;
};

}  // namespace ekhmc
