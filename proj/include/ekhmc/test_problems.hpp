#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <utility>
#include <vector>

#include "ekhmc/inverse_problem.hpp"
#include "ekhmc/rng.hpp"

namespace ekhmc {

// ---------------------------------------------------------------------------
// One-dimensional elliptic problem with closed-form solution
//   p(x) = u2 x + exp(-u1) (-x^2/2 + x/2),
// observed at x1 and x2.
// ---------------------------------------------------------------------------

struct Elliptic1DProblem {
  double x1 = 0.25;
  double x2 = 0.75;

  Elliptic1DProblem(double a = 0.25, double b = 0.75);
};

/// (p(x1), p(x2)) via the closed form.
Eigen::Vector2d elliptic1d_forward(const Elliptic1DProblem& prob, const Eigen::Vector2d& u);

/// Jacobian of the forward map:
///   d p(x)/d u1 = -exp(-u1) (-x^2/2 + x/2), d p(x)/d u2 = x.
Eigen::Matrix2d elliptic1d_gradient(const Elliptic1DProblem& prob, const Eigen::Vector2d& u);

/// The inverse problem with the reference settings: Gamma = 0.1^2 I_2,
/// Gamma0 = sigma^2 I_2 with sigma = 10, y = (27.5, 79.7).
InverseProblem make_elliptic1d_problem(const Elliptic1DProblem& prob = {},
                                       Eigen::Vector2d y = {27.5, 79.7},
                                       double noise_std = 0.1, double prior_std = 10.0);

/// Exact gradient of the potential of make_elliptic1d_problem, for the HMC
/// gold standard.
GradientMap elliptic1d_potential_gradient(const InverseProblem& p,
                                          const Elliptic1DProblem& prob);

/// Initial particle positions u1 ~ N(-3.5, 0.1^2), u2 ~ U(70, 110).
Eigen::MatrixXd elliptic1d_initial_positions(int count, const RngStream& stream);

// ---------------------------------------------------------------------------
// Karhunen-Loeve cosine expansion of a log-permeability field on [0,1]^2:
//   log a(x; u) = sum_l u_l sqrt(lambda_l) cos(pi <l, x>),
//   lambda_l = (pi^2 |l|^2 + tau^2)^(-alpha).
// ---------------------------------------------------------------------------

struct KLField {
  double tau = 3.0;
  double alpha = 2.0;
  int dim = 256;
  std::vector<std::pair<int, int>> indices;  // nonzero multi-indices, |l|^2 ascending
  Eigen::VectorXd eigen;                     // lambda_l along indices
};

KLField make_kl_field(double tau = 3.0, double alpha = 2.0, int dim = 256);

/// log a at each point; points are (x1, x2) rows of an n x 2 matrix.
Eigen::VectorXd kl_log_permeability(const KLField& field, const Eigen::VectorXd& u,
                                    const Eigen::MatrixXd& points);

// ---------------------------------------------------------------------------
// Darcy flow -div(a grad p) = f on [0,1]^2, p = 0 on the boundary;
// 5-point finite-volume stencil with harmonic-mean face transmissibilities on
// an M x M interior grid, h = 1/(M+1).
// ---------------------------------------------------------------------------

struct DarcyProblem {
  int grid = 32;                 // M
  KLField field;
  double source = 1.0;           // constant source term f
  std::vector<int> obs_idx;      // flat interior-node indices, row-major

  DarcyProblem(int m, KLField f, double src, std::vector<int> obs);
};

/// Uniform interior observation grid of obs_per_side^2 points.
std::vector<int> uniform_observation_grid(int m, int obs_per_side);

DarcyProblem make_darcy_problem(int grid = 32, int kl_dim = 64, int obs_per_side = 7,
                                double source = 1.0, double tau = 3.0, double alpha = 2.0);

/// Interior pressure values (row-major, length M^2).
Eigen::VectorXd darcy_solve(const DarcyProblem& prob, const Eigen::VectorXd& u);

/// Pressure at the observation nodes, in stored order.
Eigen::VectorXd darcy_observe(const DarcyProblem& prob, const Eigen::VectorXd& pressure);

struct SyntheticData {
  Eigen::VectorXd u_true;
  Eigen::VectorXd y;
};

/// u_true ~ N(0, I_d), y = observe(solve(u_true)) + eta, eta ~ N(0, noise_std^2 I).
SyntheticData generate_synthetic_data(const DarcyProblem& prob, const RngStream& stream,
                                      double noise_std = 0.1);

/// The Bayesian inverse problem around the Darcy forward map with
/// Gamma = noise_std^2 I_K and Gamma0 = prior_std^2 I_d (default prior_std = 10).
InverseProblem make_darcy_inverse_problem(const DarcyProblem& prob,
                                          const Eigen::VectorXd& y,
                                          double noise_std = 0.1,
                                          double prior_std = 10.0);

}  // namespace ekhmc
