#pragma once

#include <random>
#include <string>
#include <vector>

#include "rosa/common.hpp"

namespace rosa::dp {

/// Finite shaping game: controller MDP (P, R, gamma) plus a shaper action
/// set {0..n_shaper_actions-1} (0 = null), a potential table phi[s][a2]
/// with phi[s][0] == 0, and a strictly negative switch cost c.
struct TabularMG {
  int n_states = 0;
  int n_actions = 0;
  int n_shaper_actions = 0;  // includes the null action
  std::vector<std::vector<std::vector<double>>> P;  // [s][a][s']
  std::vector<std::vector<double>> R;               // [s][a]
  std::vector<std::vector<double>> phi;             // [s][a2], phi[s][0]==0
  double switch_cost = -0.1;
  double gamma = 0.9;

  /// Throws UsageError on malformed instances (row sums off by more than
  /// 1e-12, nonzero null potentials, gamma outside [0,1), c >= 0, ...).
  void validate() const;

  double max_phi(int s) const;
  double max_abs_r() const;
  double max_abs_phi() const;

  static TabularMG load(const std::string& path);
  void save(const std::string& path) const;

  /// Random dense instance; phi values in [-phi_scale, phi_scale].
  static TabularMG random(int n_states, int n_actions, int n_shaper_actions,
                          double gamma, double switch_cost,
                          std::mt19937_64& rng, double phi_scale = 1.0);

  /// Random instance whose transitions are deterministic permutations of the
  /// state set (one permutation per action). Doubly stochastic by
  /// construction.
  static TabularMG random_permutation(int n_states, int n_actions,
                                      int n_shaper_actions, double gamma,
                                      double switch_cost,
                                      std::mt19937_64& rng,
                                      double phi_scale = 1.0);
};

/// Value function on the augmented state space (s, I), I in {0, 1}.
struct AugValue {
  int n_states = 0;
  std::vector<double> v;  // size 2 * n_states, index s * 2 + I

  AugValue() = default;
  explicit AugValue(int n) : n_states(n), v(2 * n, 0.0) {}
  double& at(int s, int i) { return v[static_cast<size_t>(s) * 2 + i]; }
  double at(int s, int i) const { return v[static_cast<size_t>(s) * 2 + i]; }
  double sup_dist(const AugValue& other) const;
  double sup_norm() const;
};

}  // namespace rosa::dp
