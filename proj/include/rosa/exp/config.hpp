#pragma once

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "rosa/agents/trainer.hpp"
#include "rosa/env/env.hpp"

namespace rosa::exp {

/// One experiment: an environment, a training mode and its
/// hyperparameters, and the seeds to run. Parsed from a JSON file; unknown
/// keys are rejected so typos fail loudly.
struct RunConfig {
  std::string name = "run";
  std::string env_kind;       // two_goal | subgoal | red_herring | corridor | cartpole
  std::string layout_path;    // optional custom layout for grid envs
  env::CartpoleParams cartpole;
  agents::TrainerConfig trainer;
  std::vector<uint64_t> seeds = {1};
  std::string out_dir;        // default runs/<name>
  /// pbrs_fixed: path to a whitespace-separated per-cell table, or
  /// "auto_bfs" for a distance-to-goal potential built from the layout.
  std::string potential_table;
  double pbrs_scale = 0.05;   // auto_bfs per-step potential increment

  void validate() const;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

/// Full config with every default filled in, suitable for writing next to
/// the run outputs so a run is reproducible from its directory alone.
nlohmann::json resolved_json(const RunConfig& cfg);

/// Fresh environment instance for the config (layout file loaded and
/// validated here when given).
std::unique_ptr<env::EnvInstance> make_env(const RunConfig& cfg);

/// Per-cell potential table for pbrs_fixed: loads the file, or derives
/// -pbrs_scale * bfs_distance(best goal) over free cells for "auto_bfs".
std::vector<double> resolve_potential_table(const RunConfig& cfg,
                                            const env::GridSpec& grid);

}  // namespace rosa::exp
