#include "rosa/agents/gae.hpp"

#include "rosa/common.hpp"

namespace rosa::agents {

std::vector<double> gae(std::span<const double> rewards,
                        std::span<const double> values,
                        std::span<const bool> dones, double gamma, double lam,
                        double bootstrap_value) {
  const size_t n = rewards.size();
  if (values.size() != n || dones.size() != n)
    throw UsageError("gae: rewards, values and dones must have equal length");
  if (gamma < 0.0 || gamma > 1.0 || lam < 0.0 || lam > 1.0)
    throw UsageError("gae: gamma and lambda must lie in [0, 1]");
  std::vector<double> adv(n, 0.0);
  double carry = 0.0;
  for (size_t t = n; t-- > 0;) {
    const double not_done = dones[t] ? 0.0 : 1.0;
    const double v_next = (t + 1 < n) ? values[t + 1] : bootstrap_value;
    const double delta =
        rewards[t] + gamma * v_next * not_done - values[t];
    carry = delta + gamma * lam * not_done * carry;
    adv[t] = carry;
  }
  return adv;
}

}  // namespace rosa::agents
