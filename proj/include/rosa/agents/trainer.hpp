#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rosa/agents/policy.hpp"
#include "rosa/agents/ppo.hpp"
#include "rosa/agents/rollout.hpp"
#include "rosa/env/env.hpp"
#include "rosa/novelty/rnd.hpp"
#include "rosa/shaping/potential.hpp"

namespace rosa::agents {

enum class TrainMode {
  kRosa,          // learned switch + magnitude over a frozen potential
  kVanilla,       // plain PPO, no auxiliary reward
  kRndBonus,      // novelty bonus added to the reward directly
  kPbrsFixed,     // fixed potential table over grid cells
  kRosaNoSwitch,  // magnitude head always on, no switch decisions
};

TrainMode parse_train_mode(const std::string& name);
std::string train_mode_name(TrainMode mode);

struct TrainerConfig {
  TrainMode mode = TrainMode::kRosa;
  PpoConfig ppo;  // shared by all heads; temperature affects the controller
  SwitchMode switch_mode = SwitchMode::kPolicy;
  double option_gate_prob = 0.9;
  double switch_cost = -0.1;
  double shaping_gamma = 0.95;
  shaping::Direction direction = shaping::Direction::kForward;
  ShaperRewardMode shaper_reward = ShaperRewardMode::kHatted;
  int shaper_m = 8;  // magnitude actions 1..m
  std::vector<int> hidden = {64, 64};           // policy / value hidden sizes
  std::vector<int> potential_hidden = {32};
  std::vector<int> novelty_hidden = {64};
  int novelty_k = 16;  // embedding width of the novelty nets
  double novelty_lr = 1e-4;
  long max_episodes = 500;
  long max_env_steps = 1000000;  // whichever limit is hit first stops the run
  std::vector<double> fixed_potential;  // by grid cell, pbrs_fixed only

  void validate() const;
};

struct MetricsRow {
  long episode = 0;    // 1-based finished-episode index
  long env_steps = 0;  // cumulative steps over finished episodes
  double extrinsic_return = 0.0;
  double shaped_return = 0.0;
  int switch_count = 0;
  double mean_bonus = 0.0;
  int goal_id = -1;
};

struct TrainStats {
  long update_index = 0;
  long records = 0;  // rollout records consumed by this update
  PpoStats controller;
  PpoStats switch_head;
  PpoStats magnitude;
  double rnd_loss = 0.0;
};

struct TrainerHooks {
  std::function<void(const MetricsRow&)> on_episode;
  std::function<void(const TrainStats&)> on_update;
  /// Raw records of each collected batch, before the updates consume them.
  std::function<void(const std::vector<TransitionRecord>&)> on_records;
};

/// Owns the heads, the frozen potential and the novelty model for one run
/// and drives collect -> update iterations until an episode or step budget
/// is exhausted. All randomness derives from the seed.
class Trainer {
 public:
  Trainer(env::EnvInstance& env, const TrainerConfig& cfg, uint64_t seed);

  /// Runs until max_episodes or max_env_steps is reached.
  void run(const TrainerHooks& hooks = {});
  /// One collect + update iteration; returns the records it consumed.
  std::vector<TransitionRecord> step_once(const TrainerHooks& hooks = {});

  long episodes() const { return episodes_; }
  long env_steps() const { return env_steps_; }
  uint64_t seed() const { return seed_; }
  const TrainerConfig& config() const { return cfg_; }

  PolicyHead& controller() { return controller_; }
  PolicyHead* switch_head() { return switch_head_ ? &*switch_head_ : nullptr; }
  PolicyHead* magnitude_head() {
    return magnitude_head_ ? &*magnitude_head_ : nullptr;
  }
  const shaping::PotentialNet* potential() const {
    return potential_ ? &*potential_ : nullptr;
  }
  novelty::NoveltyModel* novelty() {
    return novelty_ ? &*novelty_ : nullptr;
  }

  /// Weight blobs plus a JSON manifest describing them, written into dir
  /// (created if missing).
  void save_checkpoint(const std::string& dir) const;

 private:
  RolloutConfig rollout_config() const;

  env::EnvInstance& env_;
  TrainerConfig cfg_;
  uint64_t seed_;
  PolicyHead controller_;
  std::optional<PolicyHead> switch_head_;
  std::optional<PolicyHead> magnitude_head_;
  std::optional<shaping::PotentialNet> potential_;
  std::optional<novelty::NoveltyModel> novelty_;
  EpisodeState episode_;
  std::mt19937_64 rollout_rng_;
  std::mt19937_64 update_rng_;
  long episodes_ = 0;
  long env_steps_ = 0;
  long updates_ = 0;
};

}  // namespace rosa::agents
