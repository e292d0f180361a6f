#include "ekhmc/config.hpp"

#include <cctype>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ekhmc {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' expects a number, got '" + v + "'");
  }
  if (pos != v.size())
    throw std::invalid_argument("config: key '" + key + "' expects a number, got '" + v + "'");
  return x;
}

long long parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long x;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
  if (pos != v.size())
    throw std::invalid_argument("config: key '" + key + "' expects an integer, got '" + v + "'");
  return x;
}

ProblemKind parse_problem(const std::string& v) {
  if (v == "linear") return ProblemKind::kLinear;
  if (v == "elliptic1d") return ProblemKind::kElliptic1d;
  if (v == "darcy") return ProblemKind::kDarcy;
  throw std::invalid_argument("config: unknown problem '" + v + "'");
}

SamplerKind parse_sampler(const std::string& v) {
  if (v == "ekhmc") return SamplerKind::kEkhmc;
  if (v == "eks") return SamplerKind::kEks;
  if (v == "pcn") return SamplerKind::kPcn;
  if (v == "hmc") return SamplerKind::kHmc;
  throw std::invalid_argument("config: unknown sampler '" + v + "'");
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

std::string to_string(ProblemKind p) {
  switch (p) {
    case ProblemKind::kLinear: return "linear";
    case ProblemKind::kElliptic1d: return "elliptic1d";
    case ProblemKind::kDarcy: return "darcy";
  }
  return "?";
}

std::string to_string(SamplerKind s) {
  switch (s) {
    case SamplerKind::kEkhmc: return "ekhmc";
    case SamplerKind::kEks: return "eks";
    case SamplerKind::kPcn: return "pcn";
    case SamplerKind::kHmc: return "hmc";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  const auto positive = [](double v, const char* key) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string("config: key '") + key + "' must be > 0");
  };
  positive(gamma, "gamma");
  positive(eps, "eps");
  positive(leapfrog_eps, "leapfrog_eps");
  positive(noise_std, "noise_std");
  positive(prior_std, "prior_std");
  if (!(adapt_a >= 0.0)) throw std::invalid_argument("config: key 'adapt_a' must be >= 0");
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("config: key 'beta' must be in (0, 1]");
  if (leapfrog_steps < 1) throw std::invalid_argument("config: key 'leapfrog_steps' must be >= 1");
  if (particles < 2) throw std::invalid_argument("config: key 'particles' must be >= 2");
  if (iters < 1) throw std::invalid_argument("config: key 'iters' must be >= 1");
  if (grid_size < 8) throw std::invalid_argument("config: key 'grid_size' must be >= 8");
  if (kl_dim < 1) throw std::invalid_argument("config: key 'kl_dim' must be >= 1");
  if (obs_per_side < 1) throw std::invalid_argument("config: key 'obs_per_side' must be >= 1");
  if (momentum_init != "zero" && momentum_init != "gaussian-prior-cov")
    throw std::invalid_argument("config: key 'momentum_init' must be 'zero' or 'gaussian-prior-cov'");
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream os;
  os << "problem = " << to_string(problem) << "\n"
     << "sampler = " << to_string(sampler) << "\n"
     << "gamma = " << fmt(gamma) << "\n"
     << "eps = " << fmt(eps) << "\n"
     << "adapt_a = " << fmt(adapt_a) << "\n"
     << "beta = " << fmt(beta) << "\n"
     << "leapfrog_eps = " << fmt(leapfrog_eps) << "\n"
     << "leapfrog_steps = " << leapfrog_steps << "\n"
     << "particles = " << particles << "\n"
     << "iters = " << iters << "\n"
     << "seed = " << seed << "\n"
     << "output_dir = " << output_dir << "\n"
     << "momentum_init = " << momentum_init << "\n"
     << "grid_size = " << grid_size << "\n"
     << "kl_dim = " << kl_dim << "\n"
     << "obs_per_side = " << obs_per_side << "\n"
     << "noise_std = " << fmt(noise_std) << "\n"
     << "prior_std = " << fmt(prior_std) << "\n"
     << "source_strength = " << fmt(source_strength) << "\n"
     << "data_seed = " << data_seed << "\n";
  return os.str();
}

ExperimentConfig default_config(ProblemKind problem) {
  ExperimentConfig cfg;
  cfg.problem = problem;
  switch (problem) {
    case ProblemKind::kLinear:
      cfg.gamma = 1.83;
      cfg.eps = 0.05;
      cfg.adapt_a = 0.0;
      cfg.particles = 1000;
      cfg.iters = 500;
      break;
    case ProblemKind::kElliptic1d:
      cfg.gamma = 100.0;
      cfg.eps = 0.2;
      cfg.adapt_a = 0.01;
      cfg.particles = 1000;
      cfg.iters = 200;
      break;
    case ProblemKind::kDarcy:
      cfg.gamma = 1.0;
      cfg.eps = 1.0;
      cfg.adapt_a = 0.01;
      cfg.particles = 128;
      cfg.iters = 100;
      break;
  }
  return cfg;
}

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (kv.count(key))
      throw std::invalid_argument("config: duplicate key '" + key + "'");
    kv[key] = value;
  }

  ExperimentConfig cfg = default_config(
      kv.count("problem") ? parse_problem(kv["problem"]) : ProblemKind::kLinear);
  for (const auto& [key, value] : kv) {
    if (key == "problem") continue;  // consumed above
    else if (key == "sampler") cfg.sampler = parse_sampler(value);
    else if (key == "gamma") cfg.gamma = parse_double(key, value);
    else if (key == "eps") cfg.eps = parse_double(key, value);
    else if (key == "adapt_a") cfg.adapt_a = parse_double(key, value);
    else if (key == "beta") cfg.beta = parse_double(key, value);
    else if (key == "leapfrog_eps") cfg.leapfrog_eps = parse_double(key, value);
    else if (key == "leapfrog_steps") cfg.leapfrog_steps = static_cast<int>(parse_int(key, value));
    else if (key == "particles") cfg.particles = static_cast<int>(parse_int(key, value));
    else if (key == "iters") cfg.iters = static_cast<int>(parse_int(key, value));
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "momentum_init") cfg.momentum_init = value;
    else if (key == "grid_size") cfg.grid_size = static_cast<int>(parse_int(key, value));
    else if (key == "kl_dim") cfg.kl_dim = static_cast<int>(parse_int(key, value));
    else if (key == "obs_per_side") cfg.obs_per_side = static_cast<int>(parse_int(key, value));
    else if (key == "noise_std") cfg.noise_std = parse_double(key, value);
    else if (key == "prior_std") cfg.prior_std = parse_double(key, value);
    else if (key == "source_strength") cfg.source_strength = parse_double(key, value);
    else if (key == "data_seed") cfg.data_seed = static_cast<std::uint64_t>(parse_int(key, value));
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

}  // namespace ekhmc
