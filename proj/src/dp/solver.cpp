#include "rosa/dp/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace rosa::dp {

namespace {

double backup_onto(const TabularMG& mg, const AugValue& value, int s, int a,
                   int i_next) {
  double ev = 0.0;
  for (int t = 0; t < mg.n_states; ++t)
    ev += mg.P[s][a][t] * value.at(t, i_next);
  return mg.R[s][a] + mg.gamma * ev;
}

}  // namespace

double intervention_op(const TabularMG& mg, const AugValue& value, int s,
                       int i, std::span<const double> ctrl_policy,
                       std::span<const double> shaper_policy) {
  if (s < 0 || s >= mg.n_states || (i != 0 && i != 1))
    throw UsageError("intervention_op: augmented state out of range");
  if (static_cast<int>(ctrl_policy.size()) != mg.n_actions ||
      static_cast<int>(shaper_policy.size()) != mg.n_shaper_actions)
    throw UsageError("intervention_op: policy size mismatch");
  double out = mg.switch_cost;
  for (int a = 0; a < mg.n_actions; ++a)
    out += ctrl_policy[a] * backup_onto(mg, value, s, a, 1);
  for (int a2 = 0; a2 < mg.n_shaper_actions; ++a2)
    out += shaper_policy[a2] * mg.phi[s][a2];
  return out;
}

double intervention_max(const TabularMG& mg, const AugValue& value, int s,
                        int i) {
  (void)i;  // the intervention branch always continues on the I=1 slice
  double best_ctrl = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < mg.n_actions; ++a)
    best_ctrl = std::max(best_ctrl, backup_onto(mg, value, s, a, 1));
  return best_ctrl + mg.max_phi(s) + mg.switch_cost;
}

double continuation_max(const TabularMG& mg, const AugValue& value, int s,
                        int i) {
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < mg.n_actions; ++a)
    best = std::max(best, backup_onto(mg, value, s, a, i));
  return best;
}

AugValue bellman_op(const TabularMG& mg, const AugValue& value) {
  if (value.n_states != mg.n_states)
    throw UsageError("bellman_op: value size mismatch");
  AugValue out(mg.n_states);
  for (int s = 0; s < mg.n_states; ++s)
    for (int i = 0; i < 2; ++i)
      out.at(s, i) = std::max(intervention_max(mg, value, s, i),
                              continuation_max(mg, value, s, i));
  return out;
}

ValueIterationResult value_iterate(const TabularMG& mg, double tol,
                                   int max_iter,
                                   const std::optional<AugValue>& init) {
  mg.validate();
  ValueIterationResult res;
  res.value = init.value_or(AugValue(mg.n_states));
  if (res.value.n_states != mg.n_states)
    throw UsageError("value_iterate: init size mismatch");
  for (int k = 0; k < max_iter; ++k) {
    AugValue next = bellman_op(mg, res.value);
    res.residual = next.sup_dist(res.value);
    res.value = std::move(next);
    res.iterations = k + 1;
    if (res.residual < tol) return res;
  }
  throw RuntimeFault("value_iterate: no convergence within max_iter");
}

int switch_rule(const TabularMG& mg, const AugValue& value, int s, int i) {
  if (s < 0 || s >= mg.n_states || (i != 0 && i != 1))
    throw UsageError("switch_rule: augmented state out of range");
  return intervention_max(mg, value, s, i) > continuation_max(mg, value, s, i)
             ? 1
             : 0;
}

MdpSolution solve_mdp(const std::vector<std::vector<std::vector<double>>>& P,
                      const std::vector<std::vector<double>>& R, double gamma,
                      double tol, int max_iter) {
  const int n = static_cast<int>(P.size());
  if (n == 0) throw UsageError("solve_mdp: empty MDP");
  const int m = static_cast<int>(P[0].size());
  if (gamma < 0.0 || gamma >= 1.0)
    throw UsageError("solve_mdp: gamma must lie in [0, 1)");
  MdpSolution sol;
  sol.v.assign(n, 0.0);
  for (int k = 0; k < max_iter; ++k) {
    std::vector<double> next(n);
    double delta = 0.0;
    for (int s = 0; s < n; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < m; ++a) {
        double q = R[s][a];
        for (int t = 0; t < n; ++t) q += gamma * P[s][a][t] * sol.v[t];
        best = std::max(best, q);
      }
      next[s] = best;
      delta = std::max(delta, std::abs(best - sol.v[s]));
    }
    sol.v = std::move(next);
    sol.iterations = k + 1;
    if (delta < tol) break;
    if (k + 1 == max_iter)
      throw RuntimeFault("solve_mdp: no convergence within max_iter");
  }
  sol.q.assign(n, std::vector<double>(m));
  sol.policy.assign(n, 0);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < m; ++a) {
      double q = R[s][a];
      for (int t = 0; t < n; ++t) q += gamma * P[s][a][t] * sol.v[t];
      sol.q[s][a] = q;
    }
    sol.policy[s] = static_cast<int>(
        std::max_element(sol.q[s].begin(), sol.q[s].end()) -
        sol.q[s].begin());
  }
  return sol;
}

std::vector<double> evaluate_policy(
    const std::vector<std::vector<std::vector<double>>>& P,
    const std::vector<std::vector<double>>& R, double gamma,
    const std::vector<int>& policy) {
  const int n = static_cast<int>(P.size());
  if (static_cast<int>(policy.size()) != n)
    throw UsageError("evaluate_policy: policy size mismatch");
  Mat A = Mat::Identity(n, n);
  Vec r(n);
  for (int s = 0; s < n; ++s) {
    const int a = policy[s];
    for (int t = 0; t < n; ++t) A(s, t) -= gamma * P[s][a][t];
    r[s] = R[s][a];
  }
  Vec v = A.partialPivLu().solve(r);
  return std::vector<double>(v.data(), v.data() + n);
}

std::vector<std::vector<int>> argmax_sets(
    const std::vector<std::vector<double>>& q, double tol) {
  std::vector<std::vector<int>> sets(q.size());
  for (size_t s = 0; s < q.size(); ++s) {
    const double best = *std::max_element(q[s].begin(), q[s].end());
    for (size_t a = 0; a < q[s].size(); ++a)
      if (q[s][a] >= best - tol) sets[s].push_back(static_cast<int>(a));
  }
  return sets;
}

AugValue evaluate_aug_policy(const TabularMG& mg, const AugPolicy& policy) {
  const int n = 2 * mg.n_states;
  Mat A = Mat::Identity(n, n);
  Vec r(n);
  for (int s = 0; s < mg.n_states; ++s) {
    for (int i = 0; i < 2; ++i) {
      const int row = s * 2 + i;
      const size_t idx = static_cast<size_t>(row);
      const int a = policy.a[idx];
      const int g = policy.g[idx];
      const int a2 = policy.a2[idx];
      const int i_next = g == 1 ? 1 : i;
      for (int t = 0; t < mg.n_states; ++t)
        A(row, t * 2 + i_next) -= mg.gamma * mg.P[s][a][t];
      r[row] = mg.R[s][a] +
               (g == 1 ? mg.phi[s][a2] + mg.switch_cost : 0.0);
    }
  }
  Vec v = A.partialPivLu().solve(r);
  AugValue out(mg.n_states);
  for (int s = 0; s < mg.n_states; ++s)
    for (int i = 0; i < 2; ++i) out.at(s, i) = v[s * 2 + i];
  return out;
}

BruteForceResult brute_force_solve(const TabularMG& mg, long max_policies) {
  mg.validate();
  const int n_aug = 2 * mg.n_states;
  const long choices =
      static_cast<long>(mg.n_actions) * 2 * mg.n_shaper_actions;
  double log_total = n_aug * std::log(static_cast<double>(choices));
  if (log_total > std::log(static_cast<double>(max_policies)))
    throw UsageError("brute_force_solve: policy space too large");
  long total = 1;
  for (int i = 0; i < n_aug; ++i) total *= choices;

  BruteForceResult res;
  res.value = AugValue(mg.n_states);
  std::fill(res.value.v.begin(), res.value.v.end(),
            -std::numeric_limits<double>::infinity());
  AugPolicy pol;
  pol.a.assign(n_aug, 0);
  pol.g.assign(n_aug, 0);
  pol.a2.assign(n_aug, 0);
  for (long code = 0; code < total; ++code) {
    long rest = code;
    for (int idx = 0; idx < n_aug; ++idx) {
      long choice = rest % choices;
      rest /= choices;
      pol.a[idx] = static_cast<int>(choice % mg.n_actions);
      choice /= mg.n_actions;
      pol.g[idx] = static_cast<int>(choice % 2);
      choice /= 2;
      pol.a2[idx] = static_cast<int>(choice);
    }
    AugValue v = evaluate_aug_policy(mg, pol);
    for (size_t i = 0; i < v.v.size(); ++i)
      res.value.v[i] = std::max(res.value.v[i], v.v[i]);
    ++res.policies_scanned;
  }
  return res;
}

namespace {

/// Solves the potential-shaped MDP for a fixed always-on shaper map sigma
/// and reports greedy sets, extrinsic values of the shaped optimum, and the
/// value-shift residual.
void check_one_map(const TabularMG& mg, const std::vector<int>& sigma,
                   const MdpSolution& plain,
                   const std::vector<std::vector<int>>& plain_sets,
                   InvarianceReport& report) {
  std::vector<double> pot(mg.n_states);
  for (int s = 0; s < mg.n_states; ++s) pot[s] = mg.phi[s][sigma[s]];

  std::vector<std::vector<double>> r_shaped(
      mg.n_states, std::vector<double>(mg.n_actions));
  for (int s = 0; s < mg.n_states; ++s)
    for (int a = 0; a < mg.n_actions; ++a) {
      double ev = 0.0;
      for (int t = 0; t < mg.n_states; ++t) ev += mg.P[s][a][t] * pot[t];
      r_shaped[s][a] = mg.R[s][a] + mg.gamma * ev - pot[s];
    }

  MdpSolution shaped = solve_mdp(mg.P, r_shaped, mg.gamma);
  const auto shaped_sets = argmax_sets(shaped.q);
  for (int s = 0; s < mg.n_states; ++s)
    if (shaped_sets[s] != plain_sets[s]) report.argmax_match = false;

  const auto extrinsic = evaluate_policy(mg.P, mg.R, mg.gamma, shaped.policy);
  for (int s = 0; s < mg.n_states; ++s) {
    report.max_value_gap = std::max(report.max_value_gap,
                                    std::abs(extrinsic[s] - plain.v[s]));
    report.max_shift_gap = std::max(
        report.max_shift_gap, std::abs(shaped.v[s] - (plain.v[s] - pot[s])));
  }
  ++report.shaper_maps_checked;
}

}  // namespace

InvarianceReport invariance_check(const TabularMG& mg, int n_random_maps,
                                  uint64_t seed, double value_tol) {
  mg.validate();
  (void)value_tol;
  MdpSolution plain = solve_mdp(mg.P, mg.R, mg.gamma);
  const auto plain_sets = argmax_sets(plain.q);

  InvarianceReport report;
  std::vector<int> sigma(mg.n_states, 0);
  check_one_map(mg, sigma, plain, plain_sets, report);  // null shaper

  for (int s = 0; s < mg.n_states; ++s)
    sigma[s] = static_cast<int>(
        std::max_element(mg.phi[s].begin(), mg.phi[s].end()) -
        mg.phi[s].begin());
  check_one_map(mg, sigma, plain, plain_sets, report);  // greedy potential

  auto rng = make_rng(seed, 0x696e76ull);
  std::uniform_int_distribution<int> pick(0, mg.n_shaper_actions - 1);
  for (int k = 0; k < n_random_maps; ++k) {
    for (int s = 0; s < mg.n_states; ++s) sigma[s] = pick(rng);
    check_one_map(mg, sigma, plain, plain_sets, report);
  }
  return report;
}

double stable_point_improvement(const TabularMG& mg) {
  MdpSolution plain = solve_mdp(mg.P, mg.R, mg.gamma);

  // Stable-point shaper: always-on with the greedy potential map. The
  // controller solves the resulting telescoping-exact shaped problem.
  std::vector<int> sigma(mg.n_states);
  for (int s = 0; s < mg.n_states; ++s)
    sigma[s] = static_cast<int>(
        std::max_element(mg.phi[s].begin(), mg.phi[s].end()) -
        mg.phi[s].begin());
  std::vector<double> pot(mg.n_states);
  for (int s = 0; s < mg.n_states; ++s) pot[s] = mg.phi[s][sigma[s]];
  std::vector<std::vector<double>> r_shaped(
      mg.n_states, std::vector<double>(mg.n_actions));
  for (int s = 0; s < mg.n_states; ++s)
    for (int a = 0; a < mg.n_actions; ++a) {
      double ev = 0.0;
      for (int t = 0; t < mg.n_states; ++t) ev += mg.P[s][a][t] * pot[t];
      r_shaped[s][a] = mg.R[s][a] + mg.gamma * ev - pot[s];
    }
  MdpSolution shaped = solve_mdp(mg.P, r_shaped, mg.gamma);
  const auto extrinsic = evaluate_policy(mg.P, mg.R, mg.gamma, shaped.policy);

  double min_gap = std::numeric_limits<double>::infinity();
  for (int s = 0; s < mg.n_states; ++s)
    min_gap = std::min(min_gap, extrinsic[s] - plain.v[s]);
  return min_gap;
}

}  // namespace rosa::dp
