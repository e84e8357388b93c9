#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rosa/dp/tabular_mg.hpp"

namespace rosa::dp {

/// Intervention backup at (s, I): expected shaped one-step reward under the
/// given controller/shaper action distributions, plus the switch cost, plus
/// the discounted continuation on the I=1 slice. The shaped one-step reward
/// conditions on a null prior shaper action, so its shaping part is the bare
/// potential phi(s, a2).
double intervention_op(const TabularMG& mg, const AugValue& value, int s,
                       int i, std::span<const double> ctrl_policy,
                       std::span<const double> shaper_policy);

/// Same backup with both action choices maximized (the form used inside the
/// Bellman operator).
double intervention_max(const TabularMG& mg, const AugValue& value, int s,
                        int i);

/// Continuation backup: max_a R(s,a) + gamma * E[V(s', I)], I unchanged.
double continuation_max(const TabularMG& mg, const AugValue& value, int s,
                        int i);

/// One application of T V = max(intervention branch, continuation branch)
/// at every augmented state. A gamma-contraction in the sup norm.
AugValue bellman_op(const TabularMG& mg, const AugValue& value);

struct ValueIterationResult {
  AugValue value;
  int iterations = 0;
  double residual = 0.0;
};

/// Iterates T from zero (or `init`) until the sup-norm residual drops below
/// tol. Throws RuntimeFault if max_iter is exhausted first.
ValueIterationResult value_iterate(const TabularMG& mg, double tol = 1e-10,
                                   int max_iter = 1000000,
                                   const std::optional<AugValue>& init =
                                       std::nullopt);

/// Shaper switch decision at (s, I) under the converged value: 1 exactly
/// when the intervention branch strictly beats the continuation branch
/// (ties resolve to 0, i.e. no switch).
int switch_rule(const TabularMG& mg, const AugValue& value, int s, int i);

struct MdpSolution {
  std::vector<double> v;                    // optimal values
  std::vector<std::vector<double>> q;       // optimal action values
  std::vector<int> policy;                  // greedy action per state
  int iterations = 0;
};

/// Standard MDP value iteration on (P, R, gamma).
MdpSolution solve_mdp(const std::vector<std::vector<std::vector<double>>>& P,
                      const std::vector<std::vector<double>>& R, double gamma,
                      double tol = 1e-12, int max_iter = 1000000);

/// Exact policy evaluation by linear solve: v = (I - gamma P_pi)^{-1} r_pi.
std::vector<double> evaluate_policy(
    const std::vector<std::vector<std::vector<double>>>& P,
    const std::vector<std::vector<double>>& R, double gamma,
    const std::vector<int>& policy);

/// Indices of actions whose Q value is within tol of the state's maximum.
std::vector<std::vector<int>> argmax_sets(
    const std::vector<std::vector<double>>& q, double tol = 1e-7);

/// Deterministic augmented policy for the brute-force oracle.
struct AugPolicy {
  std::vector<int> a;   // controller action per (s, I)
  std::vector<int> g;   // switch decision per (s, I)
  std::vector<int> a2;  // shaper magnitude per (s, I)
  int& at_a(int s, int i) { return a[static_cast<size_t>(s) * 2 + i]; }
  int& at_g(int s, int i) { return g[static_cast<size_t>(s) * 2 + i]; }
  int& at_a2(int s, int i) { return a2[static_cast<size_t>(s) * 2 + i]; }
};

/// Exact evaluation of a deterministic augmented policy under the oracle
/// game semantics (linear solve on the 2|S| augmented chain).
AugValue evaluate_aug_policy(const TabularMG& mg, const AugPolicy& policy);

struct BruteForceResult {
  AugValue value;        // best value found, maximized per augmented state
  long policies_scanned = 0;
};

/// Exhaustive scan over all deterministic maps (s, I) -> (a, g, a2).
/// Feasible only for tiny instances; throws UsageError when the policy
/// count would exceed `max_policies`.
BruteForceResult brute_force_solve(const TabularMG& mg,
                                   long max_policies = 20000000);

struct InvarianceReport {
  bool argmax_match = true;       // shaped and plain greedy sets coincide
  double max_value_gap = 0.0;     // |extrinsic value of shaped-optimal - V*|
  double max_shift_gap = 0.0;     // |V_shaped - (V* - Phi)| residual
  int shaper_maps_checked = 0;
};

/// Checks potential-shaping invariance: for several fixed always-on shaper
/// maps sigma (null, greedy-phi, random), solving the MDP whose reward is
/// R + gamma E[Phi(s')] - Phi(s) with Phi(s) = phi(s, sigma(s)) must leave
/// the greedy policy sets unchanged and the extrinsic value of the shaped
/// optimum equal to the plain optimum.
InvarianceReport invariance_check(const TabularMG& mg, int n_random_maps = 3,
                                  uint64_t seed = 0,
                                  double value_tol = 1e-8);

/// Extrinsic value of the game's stable point: the controller solves the
/// shaped problem under the shaper's stationary policy (telescoping exact),
/// so its extrinsic return per state is compared against the plain optimum.
/// Returns min over states of (stable extrinsic value - plain optimum);
/// the improvement direction holds when this is >= -tol.
double stable_point_improvement(const TabularMG& mg);

}  // namespace rosa::dp
