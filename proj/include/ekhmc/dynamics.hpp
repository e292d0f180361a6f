#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "ekhmc/ensemble.hpp"
#include "ekhmc/inverse_problem.hpp"
#include "ekhmc/rng.hpp"

namespace ekhmc {

enum class MomentumInit { kZero, kGaussianPriorCov };

struct SamplerConfig {
  double gamma = 1.83;    // damping
  double eps = 0.1;       // base step size
  double adapt_a = 0.0;   // adaptive step coefficient
  int iters = 100;
  std::uint64_t seed = 0;
  MomentumInit momentum_init = MomentumInit::kZero;

  void validate() const;
};

/// Per-iteration trace record.
struct StepRecord {
  int iter = 0;
  double eff_step = 0.0;       // effective step size used
  Eigen::VectorXd mean_q;      // ensemble position mean after the step
  Eigen::VectorXd cov_eigs;    // eigenvalues of C_q, descending
  double force_norm = 0.0;     // Frobenius norm of the force at step start
};

/// Force field F_H evaluated on a whole ensemble (N x I, one column per
/// particle). Damping and noise are excluded; they live in the OU substep.
using ForceField = std::function<Eigen::MatrixXd(const Ensemble&)>;

/// Hamiltonian force with the exact gradient of Phi:
///   -C_q DPhi(q^i) + (1/I) p^i p^i^T C_q^-1 qhat^i + ((1+N)/I) qhat^i.
Eigen::MatrixXd force_exact(const GradientMap& grad_phi, const Ensemble& e);

/// Gradient-free Hamiltonian force; gvals must be forward_batch(p, positions).
/// The exact-gradient misfit term is replaced by the ensemble difference sum
///   -(1/I) sum_k <G(q^k) - Gbar, G(q^i) - y>_Gamma q^k,
/// which is exact for linear forward maps.
Eigen::MatrixXd force_gradient_free(const InverseProblem& p, const Ensemble& e,
                                    const Eigen::MatrixXd& gvals);

/// Position-drift part of the gradient-free dynamics (the force without the
/// momentum-dependent correction); shared with the first-order EKS baseline.
Eigen::MatrixXd gradient_free_position_drift(const InverseProblem& p,
                                             const CenteredSpread& spread,
                                             const Eigen::MatrixXd& positions,
                                             const Eigen::MatrixXd& gvals);

/// eps / (a * |F_H| + 1), |F_H| the root-mean-square per-particle force
/// magnitude (Frobenius norm / sqrt(I)), which is ensemble-size independent.
double adaptive_step(double eps, double a, const Eigen::MatrixXd& force);

/// Kick-drift-kick: p += (eps/2) F(q,p); q += eps p; p += (eps/2) F(q,p).
/// Forces are recomputed at each kick. If first_force is non-null it must
/// equal the force at the incoming state and is reused for the first kick.
Ensemble hamiltonian_substep(const ForceField& force, Ensemble e, double eps_eff,
                             const Eigen::MatrixXd* first_force = nullptr);

/// Exact OU update of the momenta: p <- exp(-gamma eps) p + eta with eta
/// columns of covariance (1 - exp(-2 gamma eps)) C_q(positions).
Ensemble ou_substep(Ensemble e, double gamma, double eps_eff, const RngStream& stream);

/// One full EKHMC step: force, adaptive step size, Hamiltonian substep, OU
/// substep. Deterministic given (ensemble, cfg.seed, iter).
std::pair<Ensemble, StepRecord> ekhmc_step(const ForceField& force, const Ensemble& e,
                                           const SamplerConfig& cfg, int iter);

/// Folds ekhmc_step cfg.iters times, applying the configured momentum
/// initialization to the initial ensemble first. The returned positions are
/// the posterior sample approximation.
std::pair<Ensemble, std::vector<StepRecord>> run_sampler(const ForceField& force,
                                                         Ensemble init,
                                                         const SamplerConfig& cfg);

/// ForceField adapters.
ForceField make_exact_force(GradientMap grad_phi);
ForceField make_gradient_free_force(const InverseProblem& p);
GradientMap make_linear_gradient(const LinearProblem& p);

}  // namespace ekhmc
