#include "ekhmc/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "ekhmc/diagnostics.hpp"

namespace ekhmc {

namespace {

// Correction terms of the corrected particle system:
//   (1/I) p^i p^i^T C_q^-1 qhat^i  +  ((1+N)/I) qhat^i.
Eigen::MatrixXd correction_terms(const CenteredSpread& spread, const Ensemble& e) {
  const double inv_count = 1.0 / static_cast<double>(e.count());
  const CovarianceSolver solver(spread.covariance);
  const Eigen::MatrixXd cinv_qhat = solver.solve(spread.centered);  // N x I
  // Column i of the quadratic term is (1/I) <p^i, C_q^-1 qhat^i> p^i.
  const Eigen::RowVectorXd dots =
      (e.momenta.array() * cinv_qhat.array()).colwise().sum();
  Eigen::MatrixXd corr = e.momenta * (inv_count * dots).asDiagonal();
  corr.noalias() += ((1.0 + static_cast<double>(e.dim())) * inv_count) * spread.centered;
  return corr;
}

}  // namespace

void SamplerConfig::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("SamplerConfig: gamma must be > 0");
  if (!(eps > 0.0)) throw std::invalid_argument("SamplerConfig: eps must be > 0");
  if (!(adapt_a >= 0.0)) throw std::invalid_argument("SamplerConfig: adapt_a must be >= 0");
  if (iters < 1) throw std::invalid_argument("SamplerConfig: iters must be >= 1");
}

Eigen::MatrixXd force_exact(const GradientMap& grad_phi, const Ensemble& e) {
  const CenteredSpread spread = ensemble_covariance(e.positions);
  Eigen::MatrixXd grads(e.dim(), e.count());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < e.count(); ++i)
    grads.col(i) = grad_phi(e.positions.col(i));
  Eigen::MatrixXd force = -(spread.covariance * grads);
  force += correction_terms(spread, e);
  return force;
}

Eigen::MatrixXd gradient_free_position_drift(const InverseProblem& p,
                                             const CenteredSpread& spread,
                                             const Eigen::MatrixXd& positions,
                                             const Eigen::MatrixXd& gvals) {
  if (gvals.rows() != p.obs_dim())
    throw std::invalid_argument("gradient-free drift: gvals/observation dimension mismatch");
  if (gvals.cols() != positions.cols())
    throw std::invalid_argument("gradient-free drift: gvals/ensemble count mismatch");
  const double inv_count = 1.0 / static_cast<double>(positions.cols());
  // Prior term -C_q Gamma0^-1 (q - m0).
  const Eigen::MatrixXd prior_pull =
      p.prior_chol().solve(positions.colwise() - p.prior_mean());
  Eigen::MatrixXd drift = -(spread.covariance * prior_pull);
  // Difference-sum misfit term: S(k,i) = <G(q^k) - Gbar, G(q^i) - y>_Gamma.
  const Eigen::MatrixXd g_centered = gvals.colwise() - gvals.rowwise().mean().eval();
  const Eigen::MatrixXd residual_w = p.noise_chol().solve(gvals.colwise() - p.obs());
  const Eigen::MatrixXd s = g_centered.transpose() * residual_w;  // I x I
  drift.noalias() -= inv_count * (positions * s);
  return drift;
}

Eigen::MatrixXd force_gradient_free(const InverseProblem& p, const Ensemble& e,
                                    const Eigen::MatrixXd& gvals) {
  const CenteredSpread spread = ensemble_covariance(e.positions);
  Eigen::MatrixXd force = gradient_free_position_drift(p, spread, e.positions, gvals);
  force += correction_terms(spread, e);
  return force;
}

double adaptive_step(double eps, double a, const Eigen::MatrixXd& force) {
  if (!(eps > 0.0)) throw std::invalid_argument("adaptive_step: eps must be > 0");
  if (!(a >= 0.0)) throw std::invalid_argument("adaptive_step: a must be >= 0");
  if (force.cols() < 1) throw std::invalid_argument("adaptive_step: empty force");
  // Root-mean-square force per particle, so the rescaling is independent of
  // the ensemble size and survives the mean-field limit.
  const double magnitude = force.norm() / std::sqrt(static_cast<double>(force.cols()));
  return eps / (a * magnitude + 1.0);
}

Ensemble hamiltonian_substep(const ForceField& force, Ensemble e, double eps_eff,
                             const Eigen::MatrixXd* first_force) {
  if (!(eps_eff > 0.0)) throw std::invalid_argument("hamiltonian_substep: eps must be > 0");
  const double half = 0.5 * eps_eff;
  Ensemble out = std::move(e);
  out.momenta += half * (first_force ? *first_force : force(out));
  out.positions += eps_eff * out.momenta;
  out.momenta += half * force(out);
  return out;
}

Ensemble ou_substep(Ensemble e, double gamma, double eps_eff, const RngStream& stream) {
  if (!(gamma > 0.0)) throw std::invalid_argument("ou_substep: gamma must be > 0");
  const double decay = std::exp(-gamma * eps_eff);
  const double noise_scale = 1.0 - std::exp(-2.0 * gamma * eps_eff);
  Ensemble out = std::move(e);
  out.momenta *= decay;
  if (noise_scale > 0.0) {
    const CenteredSpread spread = ensemble_covariance(out.positions);
    out.momenta += preconditioned_noise(spread, noise_scale, stream);
  }
  return out;
}

std::pair<Ensemble, StepRecord> ekhmc_step(const ForceField& force, const Ensemble& e,
                                           const SamplerConfig& cfg, int iter) {
  cfg.validate();
  const Eigen::MatrixXd f0 = force(e);
  const double eps_eff = adaptive_step(cfg.eps, cfg.adapt_a, f0);
  Ensemble out = hamiltonian_substep(force, e, eps_eff, &f0);
  const RngStream step_stream = RngStream(cfg.seed).substream(static_cast<std::uint64_t>(iter));
  out = ou_substep(std::move(out), cfg.gamma, eps_eff, step_stream);

  StepRecord rec;
  rec.iter = iter;
  rec.eff_step = eps_eff;
  rec.force_norm = f0.norm() / std::sqrt(static_cast<double>(f0.cols()));
  rec.mean_q = ensemble_mean(out.positions);
  rec.cov_eigs = covariance_spectrum(out.positions);
  return {std::move(out), std::move(rec)};
}

std::pair<Ensemble, std::vector<StepRecord>> run_sampler(const ForceField& force,
                                                         Ensemble init,
                                                         const SamplerConfig& cfg) {
  cfg.validate();
  switch (cfg.momentum_init) {
    case MomentumInit::kZero:
      init.momenta.setZero();
      break;
    case MomentumInit::kGaussianPriorCov: {
      const CenteredSpread spread = ensemble_covariance(init.positions);
      const RngStream init_stream = RngStream(cfg.seed).substream(0x6d6f6dULL);
      init.momenta = preconditioned_noise(spread, 1.0, init_stream);
      break;
    }
  }
  std::vector<StepRecord> trace;
  trace.reserve(static_cast<std::size_t>(cfg.iters));
  Ensemble state = std::move(init);
  for (int it = 0; it < cfg.iters; ++it) {
    auto [next, rec] = ekhmc_step(force, state, cfg, it);
    state = std::move(next);
    trace.push_back(std::move(rec));
    if (!state.positions.allFinite() || !state.momenta.allFinite())
      throw std::runtime_error("run_sampler: non-finite state at iteration " +
                               std::to_string(it));
  }
  return {std::move(state), std::move(trace)};
}

ForceField make_exact_force(GradientMap grad_phi) {
  return [g = std::move(grad_phi)](const Ensemble& e) { return force_exact(g, e); };
}

ForceField make_gradient_free_force(const InverseProblem& p) {
  return [&p](const Ensemble& e) {
    return force_gradient_free(p, e, forward_batch(p, e.positions));
  };
}

GradientMap make_linear_gradient(const LinearProblem& p) {
  return [&p](const Eigen::VectorXd& q) { return linear_gradient(p, q); };
}

}  // namespace ekhmc
