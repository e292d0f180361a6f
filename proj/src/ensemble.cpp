#include "ekhmc/ensemble.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ekhmc {

Ensemble::Ensemble(Eigen::MatrixXd q, Eigen::MatrixXd p)
    : positions(std::move(q)), momenta(std::move(p)) {
  if (positions.rows() != momenta.rows() || positions.cols() != momenta.cols())
    throw std::invalid_argument("Ensemble: positions and momenta shapes differ");
  if (positions.rows() < 1) throw std::invalid_argument("Ensemble: dim must be >= 1");
  if (positions.cols() < 2) throw std::invalid_argument("Ensemble: count must be >= 2");
}

Eigen::VectorXd ensemble_mean(const Eigen::MatrixXd& positions) {
  if (positions.cols() < 1)
    throw std::invalid_argument("ensemble_mean: empty ensemble");
  return positions.rowwise().mean();
}

CenteredSpread ensemble_covariance(const Eigen::MatrixXd& positions) {
  if (positions.cols() < 2)
    throw std::invalid_argument("ensemble_covariance: need at least 2 particles");
  CenteredSpread s;
  s.mean = ensemble_mean(positions);
  s.centered = positions.colwise() - s.mean;
  s.covariance = (s.centered * s.centered.transpose()) / static_cast<double>(positions.cols());
  // Symmetrize away rounding asymmetry from the GEMM.
  s.covariance = 0.5 * (s.covariance + s.covariance.transpose()).eval();
  return s;
}

Eigen::MatrixXd generalized_sqrt(const CenteredSpread& spread) {
  return spread.centered / std::sqrt(static_cast<double>(spread.centered.cols()));
}

Eigen::MatrixXd preconditioned_noise(const CenteredSpread& spread, double scale,
                                     const RngStream& stream) {
  if (!(scale > 0.0)) throw std::invalid_argument("preconditioned_noise: scale must be > 0");
  const Eigen::Index n = spread.centered.rows();
  const Eigen::Index count = spread.centered.cols();
  const double factor = std::sqrt(scale / static_cast<double>(count));
  Eigen::MatrixXd out(n, count);
#pragma omp parallel
  {
    Eigen::VectorXd xi(count);
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < count; ++i) {
      NormalRng rng(stream.substream(static_cast<std::uint64_t>(i)));
      for (Eigen::Index k = 0; k < count; ++k) xi[k] = rng.normal();
      out.col(i).noalias() = factor * (spread.centered * xi);
    }
  }
  return out;
}

Ensemble affine_map(const Ensemble& e, const Eigen::MatrixXd& A,
                    const Eigen::VectorXd& b) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) throw std::invalid_argument("affine_map: matrix is singular");
  Ensemble out;
  out.positions = (A * e.positions).colwise() + b;
  out.momenta = A * e.momenta;
  return out;
}

CovarianceSolver::CovarianceSolver(const Eigen::MatrixXd& covariance) {
  llt_.compute(covariance);
  if (llt_.info() != Eigen::Success) {
    const double n = static_cast<double>(covariance.rows());
    shift_ = 1e-10 * covariance.trace() / n;
    if (!(shift_ > 0.0)) shift_ = 1e-300;
    Eigen::MatrixXd reg = covariance;
    reg.diagonal().array() += shift_;
    llt_.compute(reg);
    if (llt_.info() != Eigen::Success)
      throw std::runtime_error("CovarianceSolver: regularized factorization failed");
  }
}

}  // namespace ekhmc
