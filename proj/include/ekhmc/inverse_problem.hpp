#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>

namespace ekhmc {

using ForwardMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using GradientMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Bayesian inverse problem y = G(q) + eta with Gaussian prior N(prior_mean,
/// prior_cov) and noise N(0, noise_cov). The standard setting has a zero prior
/// mean; the mean field exists so that affine reparameterizations (which
/// shift the prior) stay inside the same abstraction.
///
/// Cholesky factors of both covariances are precomputed; every weighted norm
/// evaluates through triangular solves. Instances are immutable after
/// construction and safe to share across threads, provided the forward map is
/// a pure function.
class InverseProblem {
 public:
  InverseProblem(ForwardMap forward, Eigen::VectorXd obs, Eigen::MatrixXd noise_cov,
                 Eigen::MatrixXd prior_cov,
                 Eigen::VectorXd prior_mean = Eigen::VectorXd());

  const ForwardMap& forward() const { return forward_; }
  const Eigen::VectorXd& obs() const { return obs_; }
  const Eigen::MatrixXd& noise_cov() const { return noise_cov_; }
  const Eigen::MatrixXd& prior_cov() const { return prior_cov_; }
  const Eigen::VectorXd& prior_mean() const { return prior_mean_; }
  Eigen::Index dim() const { return prior_cov_.rows(); }
  Eigen::Index obs_dim() const { return obs_.size(); }

  const Eigen::LLT<Eigen::MatrixXd>& noise_chol() const { return noise_chol_; }
  const Eigen::LLT<Eigen::MatrixXd>& prior_chol() const { return prior_chol_; }

  /// 0.5 * ||v||^2_C via the precomputed factor of C.
  static double half_sq_norm(const Eigen::LLT<Eigen::MatrixXd>& chol,
                             const Eigen::VectorXd& v);

 private:
  ForwardMap forward_;
  Eigen::VectorXd obs_;
  Eigen::MatrixXd noise_cov_;
  Eigen::MatrixXd prior_cov_;
  Eigen::VectorXd prior_mean_;
  Eigen::LLT<Eigen::MatrixXd> noise_chol_;
  Eigen::LLT<Eigen::MatrixXd> prior_chol_;
};

/// Linear forward map G(q) = A q with the derived posterior moments
/// B = (A^T Gamma^-1 A + Gamma0^-1)^-1 and c = A^T Gamma^-1 y; the posterior
/// is N(Bc, B).
class LinearProblem {
 public:
  LinearProblem(Eigen::MatrixXd A, Eigen::VectorXd obs, Eigen::MatrixXd noise_cov,
                Eigen::MatrixXd prior_cov);

  const Eigen::MatrixXd& A() const { return A_; }
  const InverseProblem& base() const { return base_; }
  const Eigen::MatrixXd& post_cov() const { return post_cov_; }
  const Eigen::VectorXd& post_shift() const { return post_shift_; }
  const Eigen::LLT<Eigen::MatrixXd>& post_chol() const { return post_chol_; }

 private:
  Eigen::MatrixXd A_;
  InverseProblem base_;
  Eigen::MatrixXd post_cov_;    // B
  Eigen::VectorXd post_shift_;  // c
  Eigen::LLT<Eigen::MatrixXd> post_chol_;
};

/// Phi(q) = 0.5 ||y - G(q)||^2_Gamma + 0.5 ||q - m0||^2_Gamma0.
double potential(const InverseProblem& p, const Eigen::VectorXd& q);

/// Data-misfit half of the potential, 0.5 ||y - G(q)||^2_Gamma (the part pCN
/// accepts on).
double misfit(const InverseProblem& p, const Eigen::VectorXd& q);

/// DPhi(q) = B^-1 q - c, evaluated by solve against B.
Eigen::VectorXd linear_gradient(const LinearProblem& p, const Eigen::VectorXd& q);

/// (Bc, B).
std::pair<Eigen::VectorXd, Eigen::MatrixXd> posterior_moments(const LinearProblem& p);

/// Column i of the result is G(q^(i)). Columns evaluate independently (OpenMP
/// over particles); a failing evaluation aborts the batch with the particle
/// index in the message.
Eigen::MatrixXd forward_batch(const InverseProblem& p, const Eigen::MatrixXd& positions);

}  // namespace ekhmc
