#pragma once

#include <random>
#include <vector>

#include "rosa/dp/solver.hpp"
#include "rosa/dp/tabular_mg.hpp"

namespace rosa::dp {

inline int aug_sa_index(const TabularMG& mg, int s, int i, int a) {
  return (s * 2 + i) * mg.n_actions + a;
}
inline int n_aug_sa(const TabularMG& mg) {
  return 2 * mg.n_states * mg.n_actions;
}

/// Optimal augmented action values implied by a converged value function:
/// the branch-wise max of the intervention and continuation backups.
std::vector<double> q_star(const TabularMG& mg, const AugValue& v_star);

struct QLearnParams {
  long steps = 100000;
  double alpha0 = 1.0;
  double alpha_decay = 1000.0;  // alpha(n) = alpha0 / (1 + n / decay)
};

struct QLearnResult {
  std::vector<double> q;  // indexed by aug_sa_index
  long steps = 0;
};

/// Tabular Q-learning with the two-branch target
///   max( M Q(s,I,a),  R(s,a) + gamma max_a' Q(s',I,a') )
/// where the intervention branch M Q is computed against the model's
/// transition row (as the update rule is stated) and the continuation
/// branch uses the sampled next state. Exploration samples (s, I, a)
/// uniformly; step sizes follow a per-entry Robbins-Monro schedule.
QLearnResult q_learning_switch(const TabularMG& mg, const QLearnParams& params,
                               uint64_t seed);

struct LinearFaParams {
  long steps = 200000;
  double alpha0 = 0.5;          // normalized by the sampled feature row's norm
  double alpha_decay = 10000.0; // alpha(t) = alpha0 / (1 + t / decay)
};

struct LinearFaReport {
  Vec weights;            // fitted r*
  Vec q_fit;              // Psi r*
  double fit_error = 0.0;        // || Psi r* - Q* ||_2
  double projection_error = 0.0; // || Pi Q* - Q* ||_2
  double bound_rhs = 0.0;        // (1 - gamma^2)^{-1/2} * projection_error
};

/// Semi-gradient Q-learning with linear features Psi (rows indexed by
/// aug_sa_index, full column rank required). Step sizes decay on the global
/// step count so the iterate settles at the projected fixed point instead of
/// orbiting it. Reports the fitted solution against the exact Q* and the
/// projected-error bound.
LinearFaReport linear_fa_q(const TabularMG& mg, const Mat& basis,
                           const LinearFaParams& params, uint64_t seed);

/// Indicator (one-hot) basis over all augmented state-action pairs.
Mat indicator_basis(const TabularMG& mg);

}  // namespace rosa::dp
