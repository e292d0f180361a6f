#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ekhmc/linear_analysis.hpp"

using namespace ekhmc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

LinearProblem scalar_problem() {
  // A = 1, y = 1, Gamma = Gamma0 = 1: B = 1/2, c = 1, posterior N(1/2, 1/2).
  MatrixXd one = MatrixXd::Identity(1, 1);
  VectorXd y(1);
  y << 1.0;
  return LinearProblem(one, y, one, one);
}

LinearProblem plane_problem() {
  MatrixXd A(2, 2);
  A << 1.0, 0.3,
       -0.2, 0.8;
  VectorXd y(2);
  y << 1.0, -0.5;
  return LinearProblem(A, y, 0.25 * MatrixXd::Identity(2, 2),
                       4.0 * MatrixXd::Identity(2, 2));
}

MomentState scalar_state(double mq, double mp, double cq, double cp, double cqp) {
  MomentState s;
  s.m_q = VectorXd::Constant(1, mq);
  s.m_p = VectorXd::Constant(1, mp);
  s.c_q = MatrixXd::Constant(1, 1, cq);
  s.c_p = MatrixXd::Constant(1, 1, cp);
  s.c_qp = MatrixXd::Constant(1, 1, cqp);
  return s;
}

}  // namespace

TEST_CASE("MomentState arithmetic and norm") {
  const MomentState a = scalar_state(1, 2, 3, 4, 5);
  const MomentState b = scalar_state(10, 0, 0, 0, 0);
  const MomentState c = a + b * 0.5;
  CHECK(c.m_q[0] == doctest::Approx(6.0));
  CHECK(c.c_qp(0, 0) == doctest::Approx(5.0));
  CHECK(a.norm() == doctest::Approx(std::sqrt(1 + 4 + 9 + 16 + 25)));
}

TEST_CASE("moment_rhs matches the hand-computed scalar system") {
  const LinearProblem p = scalar_problem();  // B = 1/2, c = 1
  const double gamma = 0.7;
  // State (mq, mp, cq, cp, cqp) = (1, 2, 3, 4, 5); B^-1 = 2.
  const MomentState s = scalar_state(1, 2, 3, 4, 5);
  const MomentState d = moment_rhs(s, p, gamma);
  CHECK(d.m_q[0] == doctest::Approx(2.0));
  // -cq (2 mq - 1) - gamma mp = -3*1 - 1.4
  CHECK(d.m_p[0] == doctest::Approx(-4.4));
  CHECK(d.c_q(0, 0) == doctest::Approx(10.0));
  // -2 cq * 2 * cqp - 2 g cp + 2 g cq = -60 - 5.6 + 4.2
  CHECK(d.c_p(0, 0) == doctest::Approx(-61.4));
  // -g cqp - cq*2*cq + cp = -3.5 - 18 + 4
  CHECK(d.c_qp(0, 0) == doctest::Approx(-17.5));
}

TEST_CASE("the Gibbs state is a fixed point of the moment flow") {
  for (const double gamma : {0.5, 1.83, 4.0}) {
    const LinearProblem p = plane_problem();
    const MomentState g = gibbs_state(p);
    CHECK((g.m_q - p.post_cov() * p.post_shift()).norm() < 1e-12);
    CHECK(g.m_p.norm() == 0.0);
    CHECK((g.c_q - p.post_cov()).norm() < 1e-12);
    const MomentState d = moment_rhs(g, p, gamma);
    CHECK(d.norm() < 1e-10 * (1.0 + g.norm()));
  }
}

TEST_CASE("integrate_moments converges to Gibbs and shows RK4 step order") {
  const LinearProblem p = plane_problem();
  MomentState s0 = gibbs_state(p);
  s0.m_q = VectorXd::Constant(2, 3.0);
  s0.c_q = MatrixXd::Identity(2, 2);
  s0.c_p = MatrixXd::Identity(2, 2);
  s0.c_qp = MatrixXd::Zero(2, 2);

  const MomentTrajectory t = integrate_moments(s0, p, 1.83, 40.0, 0.01);
  const MomentState g = gibbs_state(p);
  const MomentState diff = t.state.back() + g * (-1.0);
  CHECK(diff.norm() < 1e-6);
  CHECK(t.time.front() == doctest::Approx(0.0));
  CHECK(t.time.back() == doctest::Approx(40.0));
  CHECK(t.state.size() == t.time.size());

  // Richardson: error at fixed t halves by ~2^4 when dt halves.
  const double t_end = 1.0;
  const MomentState fine = integrate_moments(s0, p, 1.0, t_end, 1e-4).state.back();
  const MomentState e1 =
      integrate_moments(s0, p, 1.0, t_end, 0.04).state.back() + fine * (-1.0);
  const MomentState e2 =
      integrate_moments(s0, p, 1.0, t_end, 0.02).state.back() + fine * (-1.0);
  const double ratio = e1.norm() / e2.norm();
  CHECK(ratio > 10.0);
  CHECK(ratio < 22.0);
}

TEST_CASE("transformed coordinates round-trip and remove problem dependence") {
  const LinearProblem pa = scalar_problem();
  const LinearProblem pb = plane_problem();

  const MomentState s = scalar_state(0.9, -0.4, 0.8, 1.1, 0.2);
  const MomentState back = from_transformed(to_transformed(s, pa), pa);
  CHECK((back.m_q - s.m_q).norm() < 1e-12);
  CHECK((back.c_p - s.c_p).norm() < 1e-12);

  // Gibbs maps to (0, 0, I, I, 0) for every problem.
  for (const LinearProblem* p : {&pa, &pb}) {
    const MomentState x = to_transformed(gibbs_state(*p), *p);
    CHECK(x.m_q.norm() < 1e-12);
    CHECK(x.m_p.norm() < 1e-12);
    CHECK((x.c_q - MatrixXd::Identity(x.c_q.rows(), x.c_q.cols())).norm() < 1e-10);
    CHECK((x.c_p - MatrixXd::Identity(x.c_p.rows(), x.c_p.cols())).norm() < 1e-10);
    CHECK(x.c_qp.norm() < 1e-10);
  }
}

TEST_CASE("projection steady states are fixed points; non-projections rejected") {
  const LinearProblem p = plane_problem();
  // Rank-one projection in transformed coordinates.
  MatrixXd proj(2, 2);
  proj << 1.0, 0.0,
          0.0, 0.0;
  const MomentState x = steady_states_transformed(proj);
  const MomentState s = from_transformed(x, p);
  const MomentState d = moment_rhs(s, p, 1.3);
  CHECK(d.norm() < 1e-10);
  CHECK_THROWS_AS(steady_states_transformed(2.0 * MatrixXd::Identity(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("spectral gap values and the closed-form optimum") {
  // gamma = 1: x^3 + 3x^2 + 8x + 4 = 0 has real root ~ -0.61171.
  CHECK(spectral_gap(1.0) == doctest::Approx(0.61171).epsilon(1e-3));
  const auto [g0, gap0] = optimal_gamma();
  const double x0 = -std::sqrt(12.0 - std::sqrt(128.0));
  CHECK(g0 == doctest::Approx(-(4.0 + 3.0 * x0 * x0) / (4.0 * x0)).epsilon(1e-12));
  CHECK(gap0 == doctest::Approx(-x0).epsilon(1e-12));
  CHECK(spectral_gap(g0) == doctest::Approx(gap0).epsilon(1e-6));
  // The optimum is a maximum of the gap.
  CHECK(spectral_gap(g0) > spectral_gap(0.5 * g0));
  CHECK(spectral_gap(g0) > spectral_gap(2.0 * g0));
}

TEST_CASE("gaussian_preservation_residual flags a deliberately wrong ensemble") {
  const LinearProblem p = scalar_problem();
  const MomentState g = gibbs_state(p);

  // Snapshot whose moments match Gibbs closely: large i.i.d. Gaussian sample.
  RngStream stream(77);
  NormalRng rng{stream};
  const int particles = 200000;
  MatrixXd gq(1, particles), gp(1, particles);
  const double sd = std::sqrt(p.post_cov()(0, 0));
  for (int i = 0; i < particles; ++i) {
    gq(0, i) = g.m_q[0] + sd * rng.normal();
    gp(0, i) = sd * rng.normal();
  }
  const Ensemble good(gq, gp);
  const MomentTrackingReport ok = gaussian_preservation_residual(
      p, 1.83, g, {{0.0, good}});
  CHECK(ok.worst_rel_err < 0.05);
  CHECK(ok.worst_skewness < 0.05);
  CHECK(ok.worst_kurtosis < 0.1);

  // Exponential positions: skewness 2, excess kurtosis 6.
  NormalRng rng2{RngStream(78)};
  MatrixXd bq(1, particles), bp(1, particles);
  for (int i = 0; i < particles; ++i) {
    bq(0, i) = -std::log(std::max(rng2.uniform(), 1e-300));
    bp(0, i) = sd * rng2.normal();
  }
  const Ensemble bad(bq, bp);
  const MomentTrackingReport flag = gaussian_preservation_residual(
      p, 1.83, g, {{0.0, bad}});
  CHECK(flag.worst_skewness > 1.5);
  CHECK(flag.worst_kurtosis > 4.0);
}
