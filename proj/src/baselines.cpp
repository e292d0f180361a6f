#include "ekhmc/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace ekhmc {

void PcnConfig::validate() const {
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("PcnConfig: beta must be in (0, 1]");
  if (iters < 1) throw std::invalid_argument("PcnConfig: iters must be >= 1");
}

Eigen::MatrixXd eks_step(const InverseProblem& p, const Eigen::MatrixXd& positions,
                         double eps, double a, const RngStream& stream) {
  if (positions.cols() < 2) throw std::invalid_argument("eks_step: need >= 2 particles");
  const CenteredSpread spread = ensemble_covariance(positions);
  const Eigen::MatrixXd gvals = forward_batch(p, positions);
  Eigen::MatrixXd drift = gradient_free_position_drift(p, spread, positions, gvals);
  drift.noalias() += ((1.0 + static_cast<double>(positions.rows())) /
                      static_cast<double>(positions.cols())) *
                     spread.centered;
  const double eps_eff = adaptive_step(eps, a, drift);
  return positions + eps_eff * drift +
         preconditioned_noise(spread, 2.0 * eps_eff, stream);
}

std::pair<Eigen::VectorXd, bool> pcn_step(const InverseProblem& p,
                                          const Eigen::VectorXd& q, double beta,
                                          NormalRng& rng) {
  Eigen::VectorXd xi(q.size());
  for (Eigen::Index j = 0; j < xi.size(); ++j) xi[j] = rng.normal();
  const Eigen::VectorXd proposal =
      p.prior_mean() + std::sqrt(1.0 - beta * beta) * (q - p.prior_mean()) +
      beta * Eigen::VectorXd(p.prior_chol().matrixL() * xi);
  const double log_ratio = misfit(p, q) - misfit(p, proposal);
  if (std::log(std::max(rng.uniform(), 1e-300)) < log_ratio) return {proposal, true};
  return {q, false};
}

ChainResult run_pcn(const InverseProblem& p, const Eigen::VectorXd& q0,
                    const PcnConfig& cfg) {
  cfg.validate();
  NormalRng rng{RngStream(cfg.seed)};
  ChainResult out;
  out.samples.resize(q0.size(), cfg.iters);
  Eigen::VectorXd q = q0;
  double phi_l = misfit(p, q);
  const double root = std::sqrt(1.0 - cfg.beta * cfg.beta);
  long accepted = 0;
  Eigen::VectorXd xi(q0.size());
  for (int it = 0; it < cfg.iters; ++it) {
    for (Eigen::Index j = 0; j < xi.size(); ++j) xi[j] = rng.normal();
    const Eigen::VectorXd proposal = p.prior_mean() + root * (q - p.prior_mean()) +
                                     cfg.beta * Eigen::VectorXd(p.prior_chol().matrixL() * xi);
    const double phi_l_prop = misfit(p, proposal);
    if (std::log(std::max(rng.uniform(), 1e-300)) < phi_l - phi_l_prop) {
      q = proposal;
      phi_l = phi_l_prop;
      ++accepted;
    }
    out.samples.col(it) = q;
  }
  out.acceptance = static_cast<double>(accepted) / static_cast<double>(cfg.iters);
  return out;
}

double tune_pcn_beta(const InverseProblem& p, const Eigen::VectorXd& q0,
                     double beta0, std::uint64_t seed) {
  double beta = beta0;
  Eigen::VectorXd q = q0;
  for (int round = 0; round < 40; ++round) {
    PcnConfig pilot{beta, 2000, seed + static_cast<std::uint64_t>(round)};
    const ChainResult r = run_pcn(p, q, pilot);
    q = r.samples.col(pilot.iters - 1);
    if (r.acceptance < 0.2)
      beta = std::max(beta * 0.7, 1e-8);
    else if (r.acceptance > 0.4)
      beta = std::min(beta * 1.4, 1.0);
    else
      break;
  }
  return beta;
}

std::pair<Eigen::VectorXd, bool> hmc_step(const PotentialFn& phi,
                                          const GradientMap& grad_phi,
                                          const Eigen::VectorXd& q,
                                          double leapfrog_eps, int leapfrog_steps,
                                          NormalRng& rng) {
  if (leapfrog_steps < 1)
    throw std::invalid_argument("hmc_step: need at least one leapfrog step");
  if (!(leapfrog_eps > 0.0)) throw std::invalid_argument("hmc_step: eps must be > 0");
  Eigen::VectorXd momentum(q.size());
  for (Eigen::Index j = 0; j < momentum.size(); ++j) momentum[j] = rng.normal();
  const double h0 = 0.5 * momentum.squaredNorm() + phi(q);

  Eigen::VectorXd qq = q;
  momentum -= 0.5 * leapfrog_eps * grad_phi(qq);
  for (int l = 0; l < leapfrog_steps; ++l) {
    qq += leapfrog_eps * momentum;
    if (l + 1 < leapfrog_steps) momentum -= leapfrog_eps * grad_phi(qq);
  }
  momentum -= 0.5 * leapfrog_eps * grad_phi(qq);

  const double h1 = 0.5 * momentum.squaredNorm() + phi(qq);
  if (std::log(std::max(rng.uniform(), 1e-300)) < h0 - h1) return {qq, true};
  return {q, false};
}

ChainResult run_hmc(const PotentialFn& phi, const GradientMap& grad_phi,
                    const Eigen::VectorXd& q0, double leapfrog_eps, int leapfrog_steps,
                    int iters, std::uint64_t seed) {
  NormalRng rng{RngStream(seed)};
  ChainResult out;
  out.samples.resize(q0.size(), iters);
  Eigen::VectorXd q = q0;
  long accepted = 0;
  for (int it = 0; it < iters; ++it) {
    auto [next, ok] = hmc_step(phi, grad_phi, q, leapfrog_eps, leapfrog_steps, rng);
    q = std::move(next);
    accepted += ok ? 1 : 0;
    out.samples.col(it) = q;
  }
  out.acceptance = static_cast<double>(accepted) / static_cast<double>(iters);
  return out;
}

}  // namespace ekhmc
