#include "ekhmc/linear_analysis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ekhmc {

namespace {

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

Eigen::MatrixXd sym_inv_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

MomentState MomentState::operator+(const MomentState& o) const {
  return {m_q + o.m_q, m_p + o.m_p, c_q + o.c_q, c_p + o.c_p, c_qp + o.c_qp};
}

MomentState MomentState::operator*(double s) const {
  return {m_q * s, m_p * s, c_q * s, c_p * s, c_qp * s};
}

double MomentState::norm() const {
  return std::sqrt(m_q.squaredNorm() + m_p.squaredNorm() + c_q.squaredNorm() +
                   c_p.squaredNorm() + c_qp.squaredNorm());
}

MomentState gibbs_state(const LinearProblem& p) {
  const auto [mean, cov] = posterior_moments(p);
  const Eigen::Index n = mean.size();
  return {mean, Eigen::VectorXd::Zero(n), cov, cov, Eigen::MatrixXd::Zero(n, n)};
}

MomentState moment_rhs(const MomentState& s, const LinearProblem& p, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("moment_rhs: gamma must be > 0");
  MomentState d;
  d.m_q = s.m_p;
  d.m_p = -(s.c_q * (p.post_chol().solve(s.m_q) - p.post_shift())) - gamma * s.m_p;
  d.c_q = s.c_qp + s.c_qp.transpose();
  const Eigen::MatrixXd cq_binv_cqp = s.c_q * p.post_chol().solve(s.c_qp);
  d.c_p = -cq_binv_cqp - cq_binv_cqp.transpose() - 2.0 * gamma * s.c_p + 2.0 * gamma * s.c_q;
  d.c_qp = -gamma * s.c_qp - s.c_q * p.post_chol().solve(s.c_q) + s.c_p;
  return d;
}

MomentTrajectory integrate_moments(const MomentState& s0, const LinearProblem& p,
                                   double gamma, double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end >= dt))
    throw std::invalid_argument("integrate_moments: need dt > 0 and t_end >= dt");
  MomentTrajectory traj;
  traj.time.push_back(0.0);
  traj.state.push_back(s0);
  MomentState s = s0;
  const int steps = static_cast<int>(std::llround(t_end / dt));
  for (int i = 0; i < steps; ++i) {
    const MomentState k1 = moment_rhs(s, p, gamma);
    const MomentState k2 = moment_rhs(s + k1 * (0.5 * dt), p, gamma);
    const MomentState k3 = moment_rhs(s + k2 * (0.5 * dt), p, gamma);
    const MomentState k4 = moment_rhs(s + k3 * dt, p, gamma);
    s = s + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
    const double t = static_cast<double>(i + 1) * dt;
    if (!std::isfinite(s.norm()))
      throw std::runtime_error("integrate_moments: diverged at t = " + std::to_string(t));
    traj.time.push_back(t);
    traj.state.push_back(s);
  }
  return traj;
}

MomentState to_transformed(const MomentState& s, const LinearProblem& p) {
  const Eigen::MatrixXd b_half = sym_sqrt(p.post_cov());
  const Eigen::MatrixXd b_ihalf = sym_inv_sqrt(p.post_cov());
  MomentState x;
  x.m_q = b_half * (p.post_chol().solve(s.m_q) - p.post_shift());
  x.m_p = b_ihalf * s.m_p;
  x.c_q = b_ihalf * s.c_q * b_ihalf;
  x.c_p = b_ihalf * s.c_p * b_ihalf;
  x.c_qp = b_ihalf * s.c_qp * b_ihalf;
  return x;
}

MomentState from_transformed(const MomentState& x, const LinearProblem& p) {
  const Eigen::MatrixXd b_half = sym_sqrt(p.post_cov());
  MomentState s;
  s.m_q = p.post_cov() * p.post_shift() + b_half * x.m_q;
  s.m_p = b_half * x.m_p;
  s.c_q = b_half * x.c_q * b_half;
  s.c_p = b_half * x.c_p * b_half;
  s.c_qp = b_half * x.c_qp * b_half;
  return s;
}

MomentState steady_states_transformed(const Eigen::MatrixXd& projection) {
  if ((projection * projection - projection).norm() > 1e-10)
    throw std::invalid_argument("steady_states_transformed: input is not a projection");
  const Eigen::Index n = projection.rows();
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), projection, projection,
          Eigen::MatrixXd::Zero(n, n)};
}

double spectral_gap(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("spectral_gap: gamma must be > 0");
  Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  companion(0, 2) = -4.0 * gamma;
  companion(1, 2) = -(2.0 * gamma * gamma + 6.0);
  companion(2, 2) = -3.0 * gamma;
  const Eigen::EigenSolver<Eigen::Matrix3d> es(companion);
  return es.eigenvalues().real().cwiseAbs().minCoeff();
}

std::pair<double, double> optimal_gamma() {
  const double x0 = -std::sqrt(12.0 - std::sqrt(128.0));
  const double gamma0 = -(4.0 + 3.0 * x0 * x0) / (4.0 * x0);
  return {gamma0, -x0};
}

MomentTrackingReport gaussian_preservation_residual(
    const LinearProblem& p, double gamma, const MomentState& s0,
    const std::vector<std::pair<double, Ensemble>>& snapshots) {
  Eigen::LLT<Eigen::MatrixXd> cq0(s0.c_q);
  if (cq0.info() != Eigen::Success)
    throw std::invalid_argument(
        "gaussian_preservation_residual: initial C_q must be positive definite");
  if (snapshots.empty())
    throw std::invalid_argument("gaussian_preservation_residual: no snapshots");
  double t_end = 0.0;
  for (const auto& [t, e] : snapshots) t_end = std::max(t_end, t);
  const double dt = std::min(0.01, 0.1 / gamma);
  const MomentTrajectory ode = integrate_moments(s0, p, gamma, std::max(t_end, dt), dt);

  MomentTrackingReport report;
  for (const auto& [t, e] : snapshots) {
    // Nearest ODE sample.
    std::size_t idx = static_cast<std::size_t>(std::llround(t / dt));
    idx = std::min(idx, ode.state.size() - 1);
    const MomentState& ref = ode.state[idx];

    const Eigen::Index count = e.count();
    MomentState emp;
    const CenteredSpread sq = ensemble_covariance(e.positions);
    const CenteredSpread sp = ensemble_covariance(e.momenta);
    emp.m_q = sq.mean;
    emp.m_p = sp.mean;
    emp.c_q = sq.covariance;
    emp.c_p = sp.covariance;
    emp.c_qp = (sq.centered * sp.centered.transpose()) / static_cast<double>(count);

    const double cov_scale = std::max(ref.c_q.norm(), 1e-300);
    const double mean_scale = std::sqrt(std::max(ref.c_q.trace(), 1e-300));
    double err = (emp.m_q - ref.m_q).norm() / std::max(ref.m_q.norm(), mean_scale);
    err = std::max(err, (emp.m_p - ref.m_p).norm() / std::max(ref.m_p.norm(), mean_scale));
    err = std::max(err, (emp.c_q - ref.c_q).norm() / std::max(ref.c_q.norm(), cov_scale));
    err = std::max(err, (emp.c_p - ref.c_p).norm() / std::max(ref.c_p.norm(), cov_scale));
    err = std::max(err, (emp.c_qp - ref.c_qp).norm() / std::max(ref.c_qp.norm(), cov_scale));

    // Per-coordinate skewness and excess kurtosis of the positions.
    double max_skew = 0.0, max_kurt = 0.0;
    for (Eigen::Index j = 0; j < e.dim(); ++j) {
      const Eigen::ArrayXd dev = sq.centered.row(j).transpose().array();
      const double var = dev.square().mean();
      if (var <= 0.0) continue;
      const double sd = std::sqrt(var);
      max_skew = std::max(max_skew, std::abs((dev / sd).cube().mean()));
      max_kurt = std::max(max_kurt, std::abs((dev / sd).pow(4).mean() - 3.0));
    }

    report.time.push_back(t);
    report.moment_rel_err.push_back(err);
    report.max_abs_skewness.push_back(max_skew);
    report.max_excess_kurtosis.push_back(max_kurt);
    report.worst_rel_err = std::max(report.worst_rel_err, err);
    report.worst_skewness = std::max(report.worst_skewness, max_skew);
    report.worst_kurtosis = std::max(report.worst_kurtosis, max_kurt);
  }
  return report;
}

}  // namespace ekhmc
