#pragma once

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "rosa/agents/policy.hpp"
#include "rosa/env/env.hpp"
#include "rosa/novelty/rnd.hpp"
#include "rosa/shaping/potential.hpp"

namespace rosa::agents {

enum class SwitchMode {
  kPolicy,  // the switch head decides at every step
  kOption,  // switch-on starts an option that runs until w * dL <= 0
};

enum class ShaperRewardMode {
  kHatted,   // r + r_i * g + switch cost + L
  kReduced,  // r + switch cost (the telescoped limit form)
};

struct TransitionRecord {
  Vec s;
  Vec s_next;
  int a = 0;
  int g = 0;        // shaping indicator this step
  int a2 = 0;       // shaper magnitude action (0 when g = 0)
  double r = 0.0;   // extrinsic reward (post clipping)
  double r_i = 0.0; // shaping reward (0 when g = 0)
  double L = 0.0;   // novelty bonus at s
  double c = 0.0;   // switch cost, nonzero only on a 0 -> 1 transition
  bool done = false;
  bool truncated = false;
  double logp_ctrl = 0.0;
  double logp_switch = 0.0;
  double logp_mag = 0.0;
  bool has_switch = false;  // the switch head made a decision this step
  bool has_mag = false;     // the magnitude head owns an action this step
  int cell = -1;            // grid cell of s, -1 off-grid
  int cell_next = -1;       // grid cell of s_next, -1 off-grid
  int goal_id = -1;         // terminal reached by this step
};

/// Consistency requirements on a collected batch; throws RuntimeFault on
/// violation. g is 0/1; an off step carries no magnitude action, no shaping
/// reward and no cost; a cost is attached only to on steps.
void check_records(const std::vector<TransitionRecord>& records);

struct RolloutConfig {
  int rollout_len = 128;
  SwitchMode switch_mode = SwitchMode::kPolicy;
  /// Option mode: continuation gate w ~ Bernoulli(option_gate_prob); an
  /// active option keeps running while w * (L(s_t) - L(s_{t-1})) > 0 and
  /// terminates otherwise. With probability 1 it ends exactly at the first
  /// non-increase of the bonus.
  double option_gate_prob = 0.9;
  double switch_cost = -0.1;  // strictly negative
  double shaping_gamma = 0.95;
  shaping::Direction direction = shaping::Direction::kForward;
  double temperature = 1.0;  // controller sampling temperature

  /// When set, the indicator is pinned to this value every step and the
  /// switch head is never consulted (0 disables shaping entirely, 1 keeps a
  /// learned magnitude stream always on; the cost then fires once per
  /// episode at the first step).
  std::optional<int> forced_g;
  /// Novelty bonus of the next state becomes the auxiliary reward directly
  /// (records carry g = 1, no cost, no shaper heads).
  bool novelty_reward = false;
  /// Fixed potential over grid cells; the auxiliary reward is the discounted
  /// potential difference along the transition (g = 1, no cost, no heads).
  const std::vector<double>* fixed_potential = nullptr;
};

/// Per-episode accumulator carried across rollout boundaries.
struct EpisodeState {
  Vec obs;             // current observation
  bool valid = false;  // episode in progress
  int switch_on = 0;   // current shaping indicator
  /// On step still waiting for the next step's shaper action to finish its
  /// shaping reward.
  std::optional<TransitionRecord> open;
  double prev_bonus = 0.0;  // L(s_{t-1}) for option termination
  bool has_prev_bonus = false;
  // episode statistics
  double extrinsic_return = 0.0;  // raw extrinsic rewards
  double shaped_return = 0.0;     // controller view: r + r_i * g
  double bonus_sum = 0.0;
  int switch_count = 0;
  int steps = 0;
};

struct RolloutHooks {
  /// Called once per finished episode with the final stats.
  std::function<void(const EpisodeState&, int goal_id)> on_episode_end;
};

/// Switching-control rollout collector. The controller acts every step; the
/// indicator g gates the magnitude head and the shaping reward, and the
/// switch cost fires exactly on 0 -> 1 transitions. Each time index owns at
/// most one magnitude action; the shaping reward of an on step uses the next
/// step's action, so such a record stays open until the next step resolves
/// it (a null boundary when the indicator drops or the episode ends).
/// Episodes reset automatically mid-rollout. Each call returns at least
/// rollout_len completed records (one more when the final step also closes a
/// held record).
std::vector<TransitionRecord> collect_rollout(
    env::EnvInstance& env, PolicyHead& controller, PolicyHead* switch_head,
    PolicyHead* magnitude_head, const shaping::PotentialNet* potential,
    const novelty::NoveltyModel* novelty, const RolloutConfig& cfg,
    std::mt19937_64& rng, EpisodeState& episode,
    const RolloutHooks& hooks = {});

/// Shaper per-step reward assembly.
double shaper_step_reward(const TransitionRecord& rec,
                          ShaperRewardMode mode = ShaperRewardMode::kHatted);

}  // namespace rosa::agents
