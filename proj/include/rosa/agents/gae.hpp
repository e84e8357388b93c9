#pragma once

#include <span>
#include <vector>

namespace rosa::agents {

/// Generalized advantage estimation. rewards, values and dones must have
/// equal length; values[t] = V(s_t). bootstrap_value stands in for
/// V(s_{T}) after the last step when the trajectory was cut off mid-episode
/// (it is ignored after a terminal step because (1 - done) zeroes it).
std::vector<double> gae(std::span<const double> rewards,
                        std::span<const double> values,
                        std::span<const bool> dones, double gamma, double lam,
                        double bootstrap_value = 0.0);

}  // namespace rosa::agents
