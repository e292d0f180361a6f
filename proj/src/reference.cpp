#include "ekhmc/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace ekhmc::ref {

Eigen::MatrixXd forward_batch(const InverseProblem& p, const Eigen::MatrixXd& positions) {
  Eigen::MatrixXd out(p.obs_dim(), positions.cols());
  for (Eigen::Index i = 0; i < positions.cols(); ++i)
    out.col(i) = p.forward()(positions.col(i));
  return out;
}

Eigen::MatrixXd preconditioned_noise(const CenteredSpread& spread, double scale,
                                     const RngStream& stream) {
  if (!(scale > 0.0)) throw std::invalid_argument("preconditioned_noise: scale must be > 0");
  const Eigen::Index n = spread.centered.rows();
  const Eigen::Index count = spread.centered.cols();
  const double factor = std::sqrt(scale / static_cast<double>(count));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, count);
  Eigen::VectorXd xi(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    NormalRng rng(stream.substream(static_cast<std::uint64_t>(i)));
    for (Eigen::Index k = 0; k < count; ++k) xi[k] = rng.normal();
    out.col(i) = factor * (spread.centered * xi);
  }
  return out;
}

Eigen::MatrixXd force_exact(const GradientMap& grad_phi, const Ensemble& e) {
  const CenteredSpread spread = ensemble_covariance(e.positions);
  const CovarianceSolver solver(spread.covariance);
  const double inv_count = 1.0 / static_cast<double>(e.count());
  const double div_coeff = (1.0 + static_cast<double>(e.dim())) * inv_count;
  Eigen::MatrixXd out(e.dim(), e.count());
  for (Eigen::Index i = 0; i < e.count(); ++i) {
    const Eigen::VectorXd qhat = spread.centered.col(i);
    const Eigen::VectorXd cinv_qhat = solver.solve(qhat);
    const Eigen::VectorXd pi = e.momenta.col(i);
    out.col(i) = -(spread.covariance * grad_phi(e.positions.col(i))) +
                 inv_count * pi * (pi.dot(cinv_qhat)) + div_coeff * qhat;
  }
  return out;
}

}  // namespace ekhmc::ref
