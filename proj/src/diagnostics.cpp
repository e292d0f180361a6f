#include "ekhmc/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ekhmc/ensemble.hpp"

namespace ekhmc {

void MetricSeries::push(int it, double v) {
  if (!iter.empty() && it <= iter.back())
    throw std::invalid_argument("MetricSeries: iterations must be strictly increasing");
  iter.push_back(it);
  value.push_back(v);
}

std::string MetricSeries::to_csv() const {
  std::string out = "# metric: " + name + "\niter,value\n";
  char buf[64];
  for (std::size_t i = 0; i < iter.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g\n", iter[i], value[i]);
    out += buf;
  }
  return out;
}

double metric_l2(const Eigen::MatrixXd& positions, const Eigen::VectorXd& reference) {
  if (positions.rows() != reference.size())
    throw std::invalid_argument("metric_l2: dimension mismatch");
  const double mean_sq =
      (positions.colwise() - reference).colwise().squaredNorm().mean();
  return std::sqrt(mean_sq);
}

double metric_hminus2(const Eigen::MatrixXd& positions, const Eigen::VectorXd& reference,
                      const Eigen::VectorXd& eigen) {
  if (eigen.size() != positions.rows())
    throw std::invalid_argument("metric_hminus2: eigenvalue length mismatch");
  if ((eigen.array() <= 0.0).any())
    throw std::invalid_argument("metric_hminus2: eigenvalues must be positive");
  const Eigen::VectorXd w = eigen.array().sqrt();
  return metric_l2(w.asDiagonal() * positions, (w.array() * reference.array()).matrix());
}

Eigen::VectorXd covariance_spectrum(const Eigen::MatrixXd& positions) {
  const CenteredSpread spread = ensemble_covariance(positions);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spread.covariance,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

ConvergenceResult convergence_iteration(const MetricSeries& series, double tol_frac) {
  if (series.value.empty())
    throw std::invalid_argument("convergence_iteration: empty series");
  if (!(tol_frac > 0.0 && tol_frac < 1.0))
    throw std::invalid_argument("convergence_iteration: tol_frac must be in (0,1)");
  const double target = series.value.back();
  const double band = tol_frac * std::max(std::abs(target), 1e-300);
  // Walk backwards to the last excursion outside the band.
  std::size_t k = series.value.size();
  while (k > 0 && std::abs(series.value[k - 1] - target) <= band) --k;
  ConvergenceResult r;
  r.iter = series.iter[k];
  // Only the final point (distance zero by construction) in band means the
  // series never settled.
  r.converged = series.value.size() == 1 || k + 1 < series.value.size();
  return r;
}

}  // namespace ekhmc
