#pragma once

#include <iosfwd>
#include <string>

#include "rosa/exp/config.hpp"

namespace rosa::exp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFault = 1;
inline constexpr int kExitUsage = 2;

struct SeedOutcome {
  uint64_t seed = 0;
  int exit_code = kExitOk;
  std::string message;  // failure explanation when exit_code != 0
  long episodes = 0;
  long env_steps = 0;
  double wall_ms = 0.0;
  double mean_final_return = 0.0;  // mean extrinsic over the final fifth
};

/// Runs one seed into <run_dir>/seed_<seed>/ (metrics.csv, events.jsonl,
/// checkpoint/, heatmap.csv for grid envs). Exceptions are captured in the
/// outcome; on a runtime fault a checkpoint of the partial run is attempted.
SeedOutcome run_single_seed(const RunConfig& cfg, uint64_t seed,
                            const std::string& run_dir);

/// Full experiment: config-resolved.json, every seed (serially), timings.csv
/// and the combined learning-curve plot. Returns the severest exit code.
int run_experiment(const RunConfig& cfg);

/// Property suite over every .mg instance in a directory: model validity,
/// fixed-point and contraction checks, switch-rule consistency, reduction
/// under a prohibitive cost, shaping invariance and the improvement
/// direction, and an exhaustive-scan cross-check on tiny instances. One
/// report line per instance; returns kExitOk only if every property passes.
int run_oracle_suite(const std::string& dir, std::ostream& out);

}  // namespace rosa::exp
