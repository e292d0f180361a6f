#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ekhmc/ensemble.hpp"
#include "ekhmc/inverse_problem.hpp"

namespace ekhmc {

/// Mean and covariance blocks of the mean-field dynamics in the linear case.
struct MomentState {
  Eigen::VectorXd m_q;
  Eigen::VectorXd m_p;
  Eigen::MatrixXd c_q;
  Eigen::MatrixXd c_p;
  Eigen::MatrixXd c_qp;

  MomentState operator+(const MomentState& o) const;
  MomentState operator*(double s) const;
  double norm() const;
};

/// The Gibbs steady state (Bc, 0, B, B, 0) of a linear problem.
MomentState gibbs_state(const LinearProblem& p);

/// Right-hand sides of the moment ODE system:
///   dm_q = m_p
///   dm_p = -C_q (B^-1 m_q - c) - gamma m_p
///   dC_q = C_qp + C_qp^T
///   dC_p = -C_q B^-1 C_qp - (C_q B^-1 C_qp)^T - 2 gamma C_p + 2 gamma C_q
///   dC_qp = -gamma C_qp - C_q B^-1 C_q + C_p
MomentState moment_rhs(const MomentState& s, const LinearProblem& p, double gamma);

struct MomentTrajectory {
  std::vector<double> time;
  std::vector<MomentState> state;
};

/// Classical RK4 with fixed step dt; one sample per step (plus the initial
/// state). Throws with the divergence time attached if the state goes
/// non-finite.
MomentTrajectory integrate_moments(const MomentState& s0, const LinearProblem& p,
                                   double gamma, double t_end, double dt);

/// Problem-independent coordinates of the moment system:
///   x1 = B^1/2 (B^-1 m_q - c), x2 = B^-1/2 m_p,
///   X = B^-1/2 C_q B^-1/2, Y = B^-1/2 C_p B^-1/2, Z = B^-1/2 C_qp B^-1/2.
/// The transformed fields reuse the MomentState slots (m_q = x1, m_p = x2,
/// c_q = X, c_p = Y, c_qp = Z).
MomentState to_transformed(const MomentState& s, const LinearProblem& p);
MomentState from_transformed(const MomentState& x, const LinearProblem& p);

/// Steady state (0, 0, X, X, 0) in transformed coordinates for a projection
/// matrix X^2 = X. X = I is the stable Gibbs point; any other projection is a
/// degenerate, unstable steady state.
MomentState steady_states_transformed(const Eigen::MatrixXd& projection);

/// Magnitude of the slowest linearized mode at the Gibbs equilibrium: the
/// smallest |Re| over the roots of x^3 + 3 gamma x^2 + (2 gamma^2 + 6) x +
/// 4 gamma = 0 (computed via companion-matrix eigenvalues).
double spectral_gap(double gamma);

/// Closed-form optimum: x0 = -sqrt(12 - sqrt(128)),
/// gamma0 = -(4 + 3 x0^2)/(4 x0) ~ 1.83, gap0 = -x0.
std::pair<double, double> optimal_gamma();

/// Per-snapshot comparison of empirical ensemble moments against the moment
/// ODE, plus Gaussianity proxies of the positions.
struct MomentTrackingReport {
  std::vector<double> time;
  std::vector<double> moment_rel_err;  // max over the five blocks
  std::vector<double> max_abs_skewness;
  std::vector<double> max_excess_kurtosis;
  double worst_rel_err = 0.0;
  double worst_skewness = 0.0;
  double worst_kurtosis = 0.0;
};

MomentTrackingReport gaussian_preservation_residual(
    const LinearProblem& p, double gamma, const MomentState& s0,
    const std::vector<std::pair<double, Ensemble>>& snapshots);

}  // namespace ekhmc
