#include "rosa/dp/tabular_mg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace rosa::dp {

void TabularMG::validate() const {
  if (n_states <= 0 || n_actions <= 0 || n_shaper_actions <= 0)
    throw UsageError("TabularMG: dimensions must be positive");
  if (gamma < 0.0 || gamma >= 1.0)
    throw UsageError("TabularMG: gamma must lie in [0, 1)");
  if (switch_cost >= 0.0)
    throw UsageError("TabularMG: switch cost must be strictly negative");
  if (static_cast<int>(P.size()) != n_states ||
      static_cast<int>(R.size()) != n_states ||
      static_cast<int>(phi.size()) != n_states)
    throw UsageError("TabularMG: table sizes do not match n_states");
  for (int s = 0; s < n_states; ++s) {
    if (static_cast<int>(P[s].size()) != n_actions ||
        static_cast<int>(R[s].size()) != n_actions)
      throw UsageError("TabularMG: table sizes do not match n_actions");
    if (static_cast<int>(phi[s].size()) != n_shaper_actions)
      throw UsageError("TabularMG: phi row size mismatch");
    if (phi[s][0] != 0.0)
      throw UsageError("TabularMG: null shaper action must have zero potential");
    for (int a = 0; a < n_actions; ++a) {
      if (static_cast<int>(P[s][a].size()) != n_states)
        throw UsageError("TabularMG: transition row size mismatch");
      double sum = 0.0;
      for (double p : P[s][a]) {
        if (p < 0.0) throw UsageError("TabularMG: negative probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw UsageError("TabularMG: transition row does not sum to 1");
    }
  }
}

double TabularMG::max_phi(int s) const {
  return *std::max_element(phi[s].begin(), phi[s].end());
}

double TabularMG::max_abs_r() const {
  double m = 0.0;
  for (const auto& row : R)
    for (double r : row) m = std::max(m, std::abs(r));
  return m;
}

double TabularMG::max_abs_phi() const {
  double m = 0.0;
  for (const auto& row : phi)
    for (double p : row) m = std::max(m, std::abs(p));
  return m;
}

TabularMG TabularMG::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("TabularMG: cannot open " + path);
  std::string tag, version;
  in >> tag >> version;
  if (tag != "tabular_mg" || version != "v1")
    throw UsageError("TabularMG: bad file header in " + path);
  TabularMG mg;
  auto expect = [&](const std::string& want) {
    std::string got;
    if (!(in >> got) || got != want)
      throw UsageError("TabularMG: expected '" + want + "' in " + path);
  };
  expect("states");
  in >> mg.n_states;
  expect("actions");
  in >> mg.n_actions;
  expect("shaper_actions");
  in >> mg.n_shaper_actions;
  expect("gamma");
  in >> mg.gamma;
  expect("switch_cost");
  in >> mg.switch_cost;
  if (!in) throw UsageError("TabularMG: truncated header in " + path);

  expect("P");
  mg.P.assign(mg.n_states, std::vector<std::vector<double>>(
                               mg.n_actions, std::vector<double>(mg.n_states)));
  for (int s = 0; s < mg.n_states; ++s)
    for (int a = 0; a < mg.n_actions; ++a)
      for (int t = 0; t < mg.n_states; ++t)
        if (!(in >> mg.P[s][a][t]))
          throw UsageError("TabularMG: truncated P table in " + path);
  expect("R");
  mg.R.assign(mg.n_states, std::vector<double>(mg.n_actions));
  for (int s = 0; s < mg.n_states; ++s)
    for (int a = 0; a < mg.n_actions; ++a)
      if (!(in >> mg.R[s][a]))
        throw UsageError("TabularMG: truncated R table in " + path);
  expect("PHI");
  mg.phi.assign(mg.n_states, std::vector<double>(mg.n_shaper_actions));
  for (int s = 0; s < mg.n_states; ++s)
    for (int a2 = 0; a2 < mg.n_shaper_actions; ++a2)
      if (!(in >> mg.phi[s][a2]))
        throw UsageError("TabularMG: truncated PHI table in " + path);
  mg.validate();
  return mg;
}

void TabularMG::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw RuntimeFault("TabularMG: cannot open " + path);
  out.precision(17);
  out << "tabular_mg v1\n";
  out << "states " << n_states << "\n";
  out << "actions " << n_actions << "\n";
  out << "shaper_actions " << n_shaper_actions << "\n";
  out << "gamma " << gamma << "\n";
  out << "switch_cost " << switch_cost << "\n";
  out << "P\n";
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) {
      for (int t = 0; t < n_states; ++t)
        out << P[s][a][t] << (t + 1 == n_states ? "\n" : " ");
    }
  out << "R\n";
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a)
      out << R[s][a] << (a + 1 == n_actions ? "\n" : " ");
  }
  out << "PHI\n";
  for (int s = 0; s < n_states; ++s) {
    for (int a2 = 0; a2 < n_shaper_actions; ++a2)
      out << phi[s][a2] << (a2 + 1 == n_shaper_actions ? "\n" : " ");
  }
}

TabularMG TabularMG::random(int n_states, int n_actions, int n_shaper_actions,
                            double gamma, double switch_cost,
                            std::mt19937_64& rng, double phi_scale) {
  TabularMG mg;
  mg.n_states = n_states;
  mg.n_actions = n_actions;
  mg.n_shaper_actions = n_shaper_actions;
  mg.gamma = gamma;
  mg.switch_cost = switch_cost;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> u11(-1.0, 1.0);
  mg.P.assign(n_states, std::vector<std::vector<double>>(
                            n_actions, std::vector<double>(n_states)));
  mg.R.assign(n_states, std::vector<double>(n_actions));
  mg.phi.assign(n_states, std::vector<double>(n_shaper_actions, 0.0));
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      for (int t = 0; t < n_states; ++t) {
        mg.P[s][a][t] = -std::log(1.0 - u01(rng));  // Exp(1) -> Dirichlet(1)
        sum += mg.P[s][a][t];
      }
      double acc = 0.0;
      for (int t = 0; t + 1 < n_states; ++t) {
        mg.P[s][a][t] /= sum;
        acc += mg.P[s][a][t];
      }
      mg.P[s][a][n_states - 1] = 1.0 - acc;  // exact row sum
      mg.R[s][a] = u11(rng);
    }
    for (int a2 = 1; a2 < n_shaper_actions; ++a2)
      mg.phi[s][a2] = phi_scale * u11(rng);
  }
  mg.validate();
  return mg;
}

TabularMG TabularMG::random_permutation(int n_states, int n_actions,
                                        int n_shaper_actions, double gamma,
                                        double switch_cost,
                                        std::mt19937_64& rng,
                                        double phi_scale) {
  TabularMG mg = random(n_states, n_actions, n_shaper_actions, gamma,
                        switch_cost, rng, phi_scale);
  std::vector<int> perm(n_states);
  for (int a = 0; a < n_actions; ++a) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int s = 0; s < n_states; ++s) {
      std::fill(mg.P[s][a].begin(), mg.P[s][a].end(), 0.0);
      mg.P[s][a][perm[s]] = 1.0;
    }
  }
  mg.validate();
  return mg;
}

double AugValue::sup_dist(const AugValue& other) const {
  if (v.size() != other.v.size())
    throw UsageError("AugValue: size mismatch");
  double d = 0.0;
  for (size_t i = 0; i < v.size(); ++i)
    d = std::max(d, std::abs(v[i] - other.v[i]));
  return d;
}

double AugValue::sup_norm() const {
  double d = 0.0;
  for (double x : v) d = std::max(d, std::abs(x));
  return d;
}

}  // namespace rosa::dp
