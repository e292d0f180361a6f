#include "ekhmc/inverse_problem.hpp"

#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ekhmc {

namespace {

Eigen::LLT<Eigen::MatrixXd> checked_chol(const Eigen::MatrixXd& m, const char* name) {
  if (m.rows() != m.cols())
    throw std::invalid_argument(std::string(name) + " must be square");
  if (!m.isApprox(m.transpose(), 1e-12))
    throw std::invalid_argument(std::string(name) + " must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(std::string(name) + " must be positive definite");
  return llt;
}

}  // namespace

InverseProblem::InverseProblem(ForwardMap forward, Eigen::VectorXd obs,
                               Eigen::MatrixXd noise_cov, Eigen::MatrixXd prior_cov,
                               Eigen::VectorXd prior_mean)
    : forward_(std::move(forward)),
      obs_(std::move(obs)),
      noise_cov_(std::move(noise_cov)),
      prior_cov_(std::move(prior_cov)),
      prior_mean_(std::move(prior_mean)) {
  if (prior_mean_.size() == 0) prior_mean_ = Eigen::VectorXd::Zero(prior_cov_.rows());
  if (prior_mean_.size() != prior_cov_.rows())
    throw std::invalid_argument("InverseProblem: prior mean dimension mismatch");
  if (noise_cov_.rows() != obs_.size())
    throw std::invalid_argument("InverseProblem: noise covariance / observation mismatch");
  noise_chol_ = checked_chol(noise_cov_, "noise covariance");
  prior_chol_ = checked_chol(prior_cov_, "prior covariance");
}

double InverseProblem::half_sq_norm(const Eigen::LLT<Eigen::MatrixXd>& chol,
                                    const Eigen::VectorXd& v) {
  return 0.5 * chol.matrixL().solve(v).squaredNorm();
}

namespace {
ForwardMap linear_forward(const Eigen::MatrixXd& A) {
  return [A](const Eigen::VectorXd& q) -> Eigen::VectorXd { return A * q; };
}
}  // namespace

LinearProblem::LinearProblem(Eigen::MatrixXd A, Eigen::VectorXd obs,
                             Eigen::MatrixXd noise_cov, Eigen::MatrixXd prior_cov)
    : A_(std::move(A)),
      base_(linear_forward(A_), std::move(obs), std::move(noise_cov),
            std::move(prior_cov)) {
  const Eigen::MatrixXd gamma_inv_A = base_.noise_chol().solve(A_);
  Eigen::MatrixXd b_inv = A_.transpose() * gamma_inv_A +
                          base_.prior_chol().solve(
                              Eigen::MatrixXd::Identity(A_.cols(), A_.cols()));
  b_inv = 0.5 * (b_inv + b_inv.transpose()).eval();
  Eigen::LLT<Eigen::MatrixXd> b_inv_chol(b_inv);
  if (b_inv_chol.info() != Eigen::Success)
    throw std::invalid_argument("LinearProblem: B^-1 not positive definite");
  post_cov_ = b_inv_chol.solve(Eigen::MatrixXd::Identity(A_.cols(), A_.cols()));
  post_cov_ = 0.5 * (post_cov_ + post_cov_.transpose()).eval();
  post_shift_ = A_.transpose() * base_.noise_chol().solve(base_.obs());
  post_chol_.compute(post_cov_);
  if (post_chol_.info() != Eigen::Success)
    throw std::invalid_argument("LinearProblem: B not positive definite");
}

double potential(const InverseProblem& p, const Eigen::VectorXd& q) {
  const Eigen::VectorXd g = p.forward()(q);
  if (g.size() != p.obs_dim())
    throw std::runtime_error("potential: forward output dimension mismatch");
  return InverseProblem::half_sq_norm(p.noise_chol(), p.obs() - g) +
         InverseProblem::half_sq_norm(p.prior_chol(), q - p.prior_mean());
}

double misfit(const InverseProblem& p, const Eigen::VectorXd& q) {
  const Eigen::VectorXd g = p.forward()(q);
  return InverseProblem::half_sq_norm(p.noise_chol(), p.obs() - g);
}

Eigen::VectorXd linear_gradient(const LinearProblem& p, const Eigen::VectorXd& q) {
  return p.post_chol().solve(q) - p.post_shift();
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> posterior_moments(const LinearProblem& p) {
  return {p.post_cov() * p.post_shift(), p.post_cov()};
}

Eigen::MatrixXd forward_batch(const InverseProblem& p, const Eigen::MatrixXd& positions) {
  if (positions.cols() < 1) throw std::invalid_argument("forward_batch: empty batch");
  const Eigen::Index count = positions.cols();
  Eigen::MatrixXd out(p.obs_dim(), count);
  Eigen::Index failed = -1;
  std::string message;
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < count; ++i) {
    try {
      Eigen::VectorXd g = p.forward()(positions.col(i));
      if (g.size() != p.obs_dim()) throw std::runtime_error("output dimension mismatch");
      out.col(i) = g;
    } catch (const std::exception& e) {
#pragma omp critical
      if (failed < 0) {
        failed = i;
        message = e.what();
      }
    }
  }
  if (failed >= 0)
    throw std::runtime_error("forward_batch: evaluation failed at particle " +
                             std::to_string(failed) + ": " + message);
  return out;
}

}  // namespace ekhmc
