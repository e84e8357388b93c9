#include "rosa/agents/policy.hpp"

#include <cmath>
#include <sstream>

namespace rosa::agents {

std::string role_name(Role role) {
  switch (role) {
    case Role::kController: return "controller";
    case Role::kSwitch: return "switch";
    case Role::kMagnitude: return "magnitude";
  }
  return "unknown";
}

PolicyHead::PolicyHead(Role role_, int obs_dim, int n_actions_,
                       const std::vector<int>& hidden, uint64_t seed)
    : role(role_), n_actions(n_actions_) {
  if (obs_dim <= 0 || n_actions_ <= 0)
    throw UsageError("PolicyHead: bad dimensions");
  std::vector<int> pi_dims{obs_dim};
  pi_dims.insert(pi_dims.end(), hidden.begin(), hidden.end());
  pi_dims.push_back(n_actions_);
  std::vector<int> v_dims{obs_dim};
  v_dims.insert(v_dims.end(), hidden.begin(), hidden.end());
  v_dims.push_back(1);
  auto rng_pi = make_rng(seed, 0x7069ull + static_cast<uint64_t>(role_));
  auto rng_v = make_rng(seed, 0x76ull + static_cast<uint64_t>(role_));
  pi = Mlp(pi_dims, rng_pi, 0.01);
  v = Mlp(v_dims, rng_v);
}

Vec log_softmax(const Vec& logits, double temperature) {
  if (temperature <= 0.0) throw UsageError("log_softmax: bad temperature");
  Vec z = logits / temperature;
  const double zmax = z.maxCoeff();
  const double lse = std::log((z.array() - zmax).exp().sum()) + zmax;
  return z.array() - lse;
}

ActionSample act(const PolicyHead& head, const Vec& obs, std::mt19937_64& rng,
                 double temperature) {
  const Vec logits = head.pi.forward(obs);
  if (!logits.allFinite()) {
    std::ostringstream ss;
    ss << role_name(head.role) << " head produced non-finite logits\n"
       << "obs: " << obs.transpose() << "\nlogits: " << logits.transpose();
    throw RuntimeFault(ss.str());
  }
  const Vec logp = log_softmax(logits, temperature);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double u = u01(rng);
  double acc = 0.0;
  int action = head.n_actions - 1;
  for (int a = 0; a < head.n_actions; ++a) {
    acc += std::exp(logp[a]);
    if (u <= acc) {
      action = a;
      break;
    }
  }
  return {action, logp[action]};
}

double state_value(const PolicyHead& head, const Vec& obs) {
  return head.v.forward(obs)[0];
}

}  // namespace rosa::agents
