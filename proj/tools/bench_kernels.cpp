// Times the OpenMP kernels against the serial reference implementations.
#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ekhmc/dynamics.hpp"
#include "ekhmc/ensemble.hpp"
#include "ekhmc/inverse_problem.hpp"
#include "ekhmc/reference.hpp"
#include "ekhmc/rng.hpp"
#include "ekhmc/test_problems.hpp"

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_best_of(int reps, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    fn();
    const auto t1 = Clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-24s serial %8.4f s   parallel %8.4f s   speedup %5.2fx\n", name,
              serial, parallel, serial / parallel);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not enabled; both columns run serially\n");
#endif

  const ekhmc::RngStream stream(42);
  ekhmc::NormalRng rng{stream.substream(0)};

  // Noise kernel: dim 64, 4096 particles.
  {
    const int n = 64, count = 4096;
    Eigen::MatrixXd q(n, count);
    for (int i = 0; i < count; ++i)
      for (int j = 0; j < n; ++j) q(j, i) = rng.normal();
    const ekhmc::CenteredSpread spread = ekhmc::ensemble_covariance(q);
    Eigen::MatrixXd out;
    const double ts = time_best_of(
        3, [&] { out = ekhmc::ref::preconditioned_noise(spread, 2.0, stream); });
    const double tp =
        time_best_of(3, [&] { out = ekhmc::preconditioned_noise(spread, 2.0, stream); });
    report("preconditioned_noise", ts, tp);
  }

  // Forward batch: Darcy pressure solves, 64 particles.
  {
    const ekhmc::DarcyProblem darcy = ekhmc::make_darcy_problem(32, 64, 7);
    const ekhmc::SyntheticData data =
        ekhmc::generate_synthetic_data(darcy, stream.substream(1));
    const ekhmc::InverseProblem p = ekhmc::make_darcy_inverse_problem(darcy, data.y);
    const int count = 64;
    Eigen::MatrixXd q(64, count);
    for (int i = 0; i < count; ++i)
      for (int j = 0; j < 64; ++j) q(j, i) = rng.normal();
    Eigen::MatrixXd out;
    const double ts = time_best_of(3, [&] { out = ekhmc::ref::forward_batch(p, q); });
    const double tp = time_best_of(3, [&] { out = ekhmc::forward_batch(p, q); });
    report("forward_batch (darcy)", ts, tp);
  }

  // Exact force: 1d elliptic gradients, 8192 particles.
  {
    const ekhmc::InverseProblem p = ekhmc::make_elliptic1d_problem();
    const ekhmc::GradientMap grad =
        ekhmc::elliptic1d_potential_gradient(p, ekhmc::Elliptic1DProblem{});
    const int count = 8192;
    Eigen::MatrixXd q = ekhmc::elliptic1d_initial_positions(count, stream.substream(2));
    Eigen::MatrixXd mom(2, count);
    for (int i = 0; i < count; ++i)
      for (int j = 0; j < 2; ++j) mom(j, i) = rng.normal();
    const ekhmc::Ensemble e(q, mom);
    Eigen::MatrixXd out;
    const double ts = time_best_of(3, [&] { out = ekhmc::ref::force_exact(grad, e); });
    const double tp = time_best_of(3, [&] { out = ekhmc::force_exact(grad, e); });
    report("force_exact", ts, tp);
  }
  return 0;
}
