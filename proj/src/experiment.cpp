#include "ekhmc/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <vector>

#include "ekhmc/baselines.hpp"
#include "ekhmc/diagnostics.hpp"
#include "ekhmc/dynamics.hpp"
#include "ekhmc/linear_analysis.hpp"
#include "ekhmc/test_problems.hpp"

namespace ekhmc {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << content;
}

void write_positions_csv(const fs::path& path, const Eigen::MatrixXd& positions) {
  std::string out;
  out.reserve(static_cast<std::size_t>(positions.size()) * 20);
  for (Eigen::Index j = 0; j < positions.rows(); ++j) {
    out += (j == 0 ? "" : ",");
    out += "q_" + std::to_string(j);
  }
  out += "\n";
  for (Eigen::Index i = 0; i < positions.cols(); ++i) {
    for (Eigen::Index j = 0; j < positions.rows(); ++j) {
      if (j) out += ',';
      out += fmt(positions(j, i));
    }
    out += '\n';
  }
  write_file(path, out);
}

void write_trace_csv(const fs::path& path, const std::vector<StepRecord>& trace) {
  if (trace.empty()) {
    write_file(path, "iter,eff_step,force_norm\n");
    return;
  }
  const Eigen::Index n = trace.front().mean_q.size();
  std::string out = "iter,eff_step,force_norm";
  for (Eigen::Index j = 0; j < n; ++j) out += ",mean_" + std::to_string(j);
  for (Eigen::Index j = 0; j < n; ++j) out += ",cov_eig_" + std::to_string(j);
  out += '\n';
  for (const StepRecord& r : trace) {
    out += std::to_string(r.iter) + ',' + fmt(r.eff_step) + ',' + fmt(r.force_norm);
    for (Eigen::Index j = 0; j < n; ++j) out += ',' + fmt(r.mean_q[j]);
    for (Eigen::Index j = 0; j < n; ++j) out += ',' + fmt(r.cov_eigs[j]);
    out += '\n';
  }
  write_file(path, out);
}

json config_echo(const ExperimentConfig& cfg) {
  json j;
  std::istringstream is(cfg.to_text());
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

struct ProblemBundle {
  InverseProblem problem;
  Eigen::MatrixXd init_positions;
  // metric references (empty when not applicable)
  Eigen::VectorXd reference;
  Eigen::VectorXd hm2_eigen;
};

ProblemBundle build_problem(const ExperimentConfig& cfg) {
  switch (cfg.problem) {
    case ProblemKind::kLinear: {
      const LinearProblem lp = make_builtin_linear_problem();
      const auto [mean, cov] = posterior_moments(lp);
      NormalRng rng{RngStream(cfg.seed).substream(0x696e6974ULL)};
      const Eigen::Index n = lp.base().dim();
      Eigen::MatrixXd q(n, cfg.particles);
      for (Eigen::Index i = 0; i < q.cols(); ++i) {
        Eigen::VectorXd xi(n);
        for (Eigen::Index k = 0; k < n; ++k) xi[k] = rng.normal();
        q.col(i) = lp.base().prior_chol().matrixL() * xi;
      }
      return {lp.base(), std::move(q), mean, Eigen::VectorXd()};
    }
    case ProblemKind::kElliptic1d: {
      InverseProblem p = make_elliptic1d_problem({}, {27.5, 79.7}, cfg.noise_std,
                                                 cfg.prior_std);
      Eigen::MatrixXd q = elliptic1d_initial_positions(
          cfg.particles, RngStream(cfg.seed).substream(0x696e6974ULL));
      return {std::move(p), std::move(q), Eigen::VectorXd(), Eigen::VectorXd()};
    }
    case ProblemKind::kDarcy: {
      DarcyProblem darcy = make_darcy_problem(cfg.grid_size, cfg.kl_dim,
                                              cfg.obs_per_side, cfg.source_strength);
      const SyntheticData data =
          generate_synthetic_data(darcy, RngStream(cfg.data_seed), cfg.noise_std);
      Eigen::VectorXd hm2 = darcy.field.eigen;
      InverseProblem p =
          make_darcy_inverse_problem(darcy, data.y, cfg.noise_std, cfg.prior_std);
      NormalRng rng{RngStream(cfg.seed).substream(0x696e6974ULL)};
      Eigen::MatrixXd q(cfg.kl_dim, cfg.particles);
      for (Eigen::Index i = 0; i < q.cols(); ++i)
        for (Eigen::Index k = 0; k < q.rows(); ++k)
          q(k, i) = cfg.prior_std * rng.normal();
      return {std::move(p), std::move(q), data.u_true, std::move(hm2)};
    }
  }
  throw std::logic_error("build_problem: unreachable");
}

}  // namespace

LinearProblem make_builtin_linear_problem() {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.3, -0.2, 0.8;
  Eigen::VectorXd y(2);
  y << 1.0, -0.5;
  return LinearProblem(a, y, 0.25 * Eigen::MatrixXd::Identity(2, 2),
                       4.0 * Eigen::MatrixXd::Identity(2, 2));
}

int run_experiment(const ExperimentConfig& cfg) {
  try {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);

    ProblemBundle bundle = build_problem(cfg);
    const InverseProblem& problem = bundle.problem;

    Eigen::MatrixXd final_positions;
    std::vector<StepRecord> trace;
    std::vector<MetricSeries> metrics;
    double acceptance = -1.0;

    const bool want_truth_metrics = bundle.reference.size() > 0;
    MetricSeries m_l2{{}, {}, "d_l2"};
    MetricSeries m_hm2{{}, {}, "d_hminus2"};

    if (cfg.sampler == SamplerKind::kEkhmc || cfg.sampler == SamplerKind::kEks) {
      SamplerConfig scfg;
      scfg.gamma = cfg.gamma;
      scfg.eps = cfg.eps;
      scfg.adapt_a = cfg.adapt_a;
      scfg.iters = cfg.iters;
      scfg.seed = cfg.seed;
      scfg.momentum_init = cfg.momentum_init == "zero" ? MomentumInit::kZero
                                                       : MomentumInit::kGaussianPriorCov;
      Eigen::MatrixXd positions = bundle.init_positions;
      Ensemble state(positions, Eigen::MatrixXd::Zero(positions.rows(), positions.cols()));
      ForceField force = make_gradient_free_force(problem);
      if (cfg.sampler == SamplerKind::kEkhmc && scfg.momentum_init == MomentumInit::kGaussianPriorCov) {
        const CenteredSpread spread = ensemble_covariance(state.positions);
        state.momenta = preconditioned_noise(spread, 1.0,
                                             RngStream(cfg.seed).substream(0x6d6f6dULL));
      }
      for (int it = 0; it < cfg.iters; ++it) {
        if (cfg.sampler == SamplerKind::kEkhmc) {
          auto [next, rec] = ekhmc_step(force, state, scfg, it);
          state = std::move(next);
          trace.push_back(std::move(rec));
        } else {
          const RngStream stream = RngStream(cfg.seed).substream(static_cast<std::uint64_t>(it));
          state.positions = eks_step(problem, state.positions, cfg.eps, cfg.adapt_a, stream);
          StepRecord rec;
          rec.iter = it;
          rec.mean_q = ensemble_mean(state.positions);
          rec.cov_eigs = covariance_spectrum(state.positions);
          trace.push_back(std::move(rec));
        }
        if (!state.positions.allFinite())
          throw std::runtime_error("sampler diverged at iteration " + std::to_string(it));
        if (want_truth_metrics) {
          m_l2.push(it, metric_l2(state.positions, bundle.reference));
          if (bundle.hm2_eigen.size() > 0)
            m_hm2.push(it, metric_hminus2(state.positions, bundle.reference, bundle.hm2_eigen));
        }
      }
      final_positions = state.positions;
    } else {
      // Single-chain MCMC baselines; the chain states stand in for particles.
      Eigen::VectorXd q0 = bundle.init_positions.col(0);
      ChainResult chain;
      if (cfg.sampler == SamplerKind::kPcn) {
        PcnConfig pcfg{cfg.beta, cfg.iters, cfg.seed};
        chain = run_pcn(problem, q0, pcfg);
      } else {
        if (cfg.problem == ProblemKind::kDarcy)
          throw std::invalid_argument("config: sampler 'hmc' needs an exact gradient; "
                                      "use problem = linear or elliptic1d");
        PotentialFn phi = [&problem](const Eigen::VectorXd& q) { return potential(problem, q); };
        GradientMap grad;
        if (cfg.problem == ProblemKind::kLinear) {
          static const LinearProblem lp = make_builtin_linear_problem();
          grad = make_linear_gradient(lp);
        } else {
          static const Elliptic1DProblem geom;
          grad = elliptic1d_potential_gradient(problem, geom);
        }
        chain = run_hmc(phi, grad, q0, cfg.leapfrog_eps, cfg.leapfrog_steps, cfg.iters,
                        cfg.seed);
      }
      acceptance = chain.acceptance;
      // Keep the second half of the chain, thinned to at most `particles` states.
      const int half = cfg.iters / 2;
      const int kept = std::min(cfg.particles, cfg.iters - half);
      final_positions.resize(q0.size(), kept);
      for (int k = 0; k < kept; ++k) {
        const int idx = half + static_cast<int>(
            static_cast<long long>(k) * (cfg.iters - half) / kept);
        final_positions.col(k) = chain.samples.col(std::min(idx, cfg.iters - 1));
      }
      if (want_truth_metrics && kept >= 2)
        m_l2.push(cfg.iters - 1, metric_l2(final_positions, bundle.reference));
    }

    write_positions_csv(dir / "positions.csv", final_positions);
    write_trace_csv(dir / "trace.csv", trace);
    if (!m_l2.iter.empty()) write_file(dir / "metrics_d_l2.csv", m_l2.to_csv());
    if (!m_hm2.iter.empty()) write_file(dir / "metrics_d_hminus2.csv", m_hm2.to_csv());

    const auto t1 = std::chrono::steady_clock::now();
    json summary;
    summary["config"] = config_echo(cfg);
    summary["seed"] = cfg.seed;
    summary["wall_time_s"] = std::chrono::duration<double>(t1 - t0).count();
    const Eigen::VectorXd mean = ensemble_mean(final_positions);
    summary["final_mean"] = std::vector<double>(mean.data(), mean.data() + mean.size());
    if (final_positions.cols() >= 2) {
      const Eigen::VectorXd eigs = covariance_spectrum(final_positions);
      summary["final_cov_eigs"] =
          std::vector<double>(eigs.data(), eigs.data() + eigs.size());
    }
    if (!m_l2.value.empty()) summary["final_d_l2"] = m_l2.value.back();
    if (!m_hm2.value.empty()) summary["final_d_hminus2"] = m_hm2.value.back();
    if (acceptance >= 0.0) summary["acceptance"] = acceptance;
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "run_experiment: " << e.what() << "\n";
    return 2;
  }
}

int emit_gamma_sweep(double gamma_min, double gamma_max, int steps,
                     const std::string& out_path) {
  try {
    if (!(gamma_min > 0.0 && gamma_max > gamma_min && steps >= 2))
      throw std::invalid_argument("sweep-gamma: need 0 < min < max and steps >= 2");
    std::string out = "gamma,gap\n";
    const double log_min = std::log(gamma_min);
    const double log_max = std::log(gamma_max);
    for (int k = 0; k < steps; ++k) {
      const double g = std::exp(log_min + (log_max - log_min) * k / (steps - 1));
      out += fmt(g) + "," + fmt(spectral_gap(g)) + "\n";
    }
    write_file(out_path, out);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "emit_gamma_sweep: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace ekhmc
