#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ekhmc {

/// Named per-iteration series, serializable to CSV.
struct MetricSeries {
  std::vector<int> iter;
  std::vector<double> value;
  std::string name;

  void push(int it, double v);
  /// "# metric: <name>" comment, then "iter,value" rows (17 significant digits).
  std::string to_csv() const;
};

/// Root-mean-square Euclidean distance of particle columns to a reference.
double metric_l2(const Eigen::MatrixXd& positions, const Eigen::VectorXd& reference);

/// As metric_l2 with coordinate l weighted by sqrt(eigen[l]).
double metric_hminus2(const Eigen::MatrixXd& positions, const Eigen::VectorXd& reference,
                      const Eigen::VectorXd& eigen);

/// Eigenvalues of the ensemble covariance C_q, sorted descending.
Eigen::VectorXd covariance_spectrum(const Eigen::MatrixXd& positions);

struct ConvergenceResult {
  int iter = 0;        // first iteration after which the series stays in band
  bool converged = false;
};

/// First iteration after which the series stays within tol_frac relative
/// distance of its final value. If only the final point qualifies, the last
/// iteration is returned with converged = false.
ConvergenceResult convergence_iteration(const MetricSeries& series, double tol_frac);

}  // namespace ekhmc
