#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "ekhmc/dynamics.hpp"
#include "ekhmc/ensemble.hpp"
#include "ekhmc/inverse_problem.hpp"
#include "ekhmc/rng.hpp"

namespace ekhmc {

struct PcnConfig {
  double beta = 0.1;
  int iters = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One first-order EKS update of the positions-only ensemble:
///   q^i += eps_eff * drift^i + sqrt(2 eps_eff) * (preconditioned noise)^i
/// with the gradient-free drift shared with EKHMC (including the
/// ((1+N)/I) qhat correction) and eps_eff = eps / (a |drift| + 1).
Eigen::MatrixXd eks_step(const InverseProblem& p, const Eigen::MatrixXd& positions,
                         double eps, double a, const RngStream& stream);

/// One pCN transition: proposal q' = m0 + sqrt(1-beta^2)(q - m0) + beta xi,
/// xi ~ N(0, Gamma0), accepted with probability min(1, exp(misfit(q) -
/// misfit(q'))). Returns the next state and the acceptance flag.
std::pair<Eigen::VectorXd, bool> pcn_step(const InverseProblem& p,
                                          const Eigen::VectorXd& q, double beta,
                                          NormalRng& rng);

struct ChainResult {
  Eigen::MatrixXd samples;  // N x iters, post-transition states
  double acceptance = 0.0;
};

/// Runs a pCN chain; caches the misfit of the current state between steps.
ChainResult run_pcn(const InverseProblem& p, const Eigen::VectorXd& q0,
                    const PcnConfig& cfg);

/// Multiplicatively tunes beta towards an acceptance rate in [0.2, 0.4] using
/// short pilot chains, then returns the tuned value.
double tune_pcn_beta(const InverseProblem& p, const Eigen::VectorXd& q0,
                     double beta0, std::uint64_t seed);

using PotentialFn = std::function<double(const Eigen::VectorXd&)>;

/// One identity-mass leapfrog HMC transition on H = 0.5|p|^2 + Phi(q).
std::pair<Eigen::VectorXd, bool> hmc_step(const PotentialFn& phi,
                                          const GradientMap& grad_phi,
                                          const Eigen::VectorXd& q,
                                          double leapfrog_eps, int leapfrog_steps,
                                          NormalRng& rng);

ChainResult run_hmc(const PotentialFn& phi, const GradientMap& grad_phi,
                    const Eigen::VectorXd& q0, double leapfrog_eps, int leapfrog_steps,
                    int iters, std::uint64_t seed);

}  // namespace ekhmc
