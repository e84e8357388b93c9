#pragma once

#include <random>
#include <string>
#include <vector>

#include "rosa/common.hpp"
#include "rosa/mlp.hpp"

namespace rosa::agents {

enum class Role { kController, kSwitch, kMagnitude };

std::string role_name(Role role);

/// Categorical policy net plus its own value net.
struct PolicyHead {
  PolicyHead() = default;
  /// hidden = hidden layer widths shared by policy and value nets.
  PolicyHead(Role role, int obs_dim, int n_actions,
             const std::vector<int>& hidden, uint64_t seed);

  Role role = Role::kController;
  int n_actions = 0;
  Mlp pi;  // obs -> logits
  Mlp v;   // obs -> scalar value
};

struct ActionSample {
  int action = 0;
  double logprob = 0.0;
};

/// Stable log-softmax over logits / temperature.
Vec log_softmax(const Vec& logits, double temperature = 1.0);

/// Samples an action from the head's categorical distribution. NaN logits
/// raise RuntimeFault with a diagnostic dump of the state and logits.
ActionSample act(const PolicyHead& head, const Vec& obs, std::mt19937_64& rng,
                 double temperature = 1.0);

double state_value(const PolicyHead& head, const Vec& obs);

}  // namespace rosa::agents
