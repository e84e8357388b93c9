#pragma once

#include <random>
#include <span>
#include <vector>

#include "rosa/agents/policy.hpp"

namespace rosa::agents {

struct PpoConfig {
  double lr = 1e-4;
  double gamma = 0.99;
  double lam = 0.95;
  double clip_eps = 0.2;
  double ent_coef = 0.01;
  double vf_coef = 0.5;
  double max_grad_norm = 1.0;
  int epochs = 4;
  int minibatches = 4;
  int rollout_len = 128;
  bool normalize_advantages = false;
  double temperature = 1.0;  // sampling temperature (controller head)

  void validate() const;
};

struct PpoSample {
  Vec obs;
  int action = 0;
  double logprob_old = 0.0;
  double advantage = 0.0;
  double value_target = 0.0;
};

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  int minibatches = 0;
};

/// Clipped-surrogate PPO update for one head: `epochs` passes over the
/// samples in `minibatches` shuffled minibatches, policy and value nets
/// stepped with Adam under a global gradient-norm clip.
PpoStats ppo_update(PolicyHead& head, std::span<const PpoSample> samples,
                    const PpoConfig& cfg, std::mt19937_64& rng);

}  // namespace rosa::agents
