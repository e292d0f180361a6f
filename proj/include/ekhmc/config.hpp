#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace ekhmc {

enum class ProblemKind { kLinear, kElliptic1d, kDarcy };
enum class SamplerKind { kEkhmc, kEks, kPcn, kHmc };

/// Flat key = value experiment configuration. Defaults are the reference
/// per-problem settings; see docs/config_schema.md for the key list.
struct ExperimentConfig {
  ProblemKind problem = ProblemKind::kLinear;
  SamplerKind sampler = SamplerKind::kEkhmc;

  double gamma = 1.83;
  double eps = 0.1;
  double adapt_a = 0.01;
  double beta = 0.1;               // pCN
  double leapfrog_eps = 0.1;       // HMC
  int leapfrog_steps = 10;         // HMC
  int particles = 1000;
  int iters = 100;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::string momentum_init = "zero";  // zero | gaussian-prior-cov

  // problem overrides
  int grid_size = 32;        // darcy M
  int kl_dim = 64;           // darcy d
  int obs_per_side = 7;      // darcy observation grid
  double noise_std = 0.1;
  double prior_std = 10.0;
  double source_strength = 1.0;  // darcy f
  std::uint64_t data_seed = 1234;  // darcy synthetic truth/data stream

  void validate() const;
  /// Serializes back to the flat key = value format (all keys, 17 digits).
  std::string to_text() const;
};

std::string to_string(ProblemKind p);
std::string to_string(SamplerKind s);

/// Parses the flat key = value document ('#' comments allowed). Unknown keys,
/// malformed values and constraint violations throw with the key named.
ExperimentConfig parse_config(const std::string& text);

/// Problem defaults as a config (what an empty document plus "problem = x"
/// parses to).
ExperimentConfig default_config(ProblemKind problem);

}  // namespace ekhmc
