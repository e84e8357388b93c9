#include "rosa/dp/qlearn.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>

namespace rosa::dp {

namespace {

double backup_onto_q(const TabularMG& mg,
                     const std::function<double(int, int, int)>& q, int s,
                     int a, int i_next) {
  double ev = 0.0;
  for (int t = 0; t < mg.n_states; ++t) {
    double best = -std::numeric_limits<double>::infinity();
    for (int ap = 0; ap < mg.n_actions; ++ap)
      best = std::max(best, q(t, i_next, ap));
    ev += mg.P[s][a][t] * best;
  }
  return mg.R[s][a] + mg.gamma * ev;
}

}  // namespace

std::vector<double> q_star(const TabularMG& mg, const AugValue& v_star) {
  std::vector<double> q(n_aug_sa(mg));
  for (int s = 0; s < mg.n_states; ++s)
    for (int i = 0; i < 2; ++i)
      for (int a = 0; a < mg.n_actions; ++a) {
        double ev1 = 0.0, evi = 0.0;
        for (int t = 0; t < mg.n_states; ++t) {
          ev1 += mg.P[s][a][t] * v_star.at(t, 1);
          evi += mg.P[s][a][t] * v_star.at(t, i);
        }
        const double intervene =
            mg.R[s][a] + mg.max_phi(s) + mg.switch_cost + mg.gamma * ev1;
        const double continue_ = mg.R[s][a] + mg.gamma * evi;
        q[aug_sa_index(mg, s, i, a)] = std::max(intervene, continue_);
      }
  return q;
}

QLearnResult q_learning_switch(const TabularMG& mg, const QLearnParams& params,
                               uint64_t seed) {
  mg.validate();
  if (params.steps <= 0) throw UsageError("q_learning_switch: steps <= 0");
  if (params.alpha0 <= 0.0 || params.alpha_decay <= 0.0)
    throw UsageError("q_learning_switch: bad step-size schedule");
  auto rng = make_rng(seed, 0x716cull);
  std::uniform_int_distribution<int> pick_s(0, mg.n_states - 1);
  std::uniform_int_distribution<int> pick_i(0, 1);
  std::uniform_int_distribution<int> pick_a(0, mg.n_actions - 1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  QLearnResult res;
  res.q.assign(n_aug_sa(mg), 0.0);
  std::vector<long> visits(res.q.size(), 0);
  auto q_at = [&](int s, int i, int a) {
    return res.q[aug_sa_index(mg, s, i, a)];
  };

  int s = pick_s(rng);
  for (long step = 0; step < params.steps; ++step) {
    const int i = pick_i(rng);
    const int a = pick_a(rng);
    // sample s' from the model row
    const double u = u01(rng);
    double acc = 0.0;
    int s_next = mg.n_states - 1;
    for (int t = 0; t < mg.n_states; ++t) {
      acc += mg.P[s][a][t];
      if (u <= acc) {
        s_next = t;
        break;
      }
    }

    double best_next_i = -std::numeric_limits<double>::infinity();
    for (int ap = 0; ap < mg.n_actions; ++ap)
      best_next_i = std::max(best_next_i, q_at(s_next, i, ap));
    const double standard = mg.R[s][a] + mg.gamma * best_next_i;

    const double intervene =
        mg.max_phi(s) + mg.switch_cost +
        backup_onto_q(
            mg, [&](int t, int ii, int ap) { return q_at(t, ii, ap); }, s, a,
            1);

    const double target = std::max(intervene, standard);
    const int idx = aug_sa_index(mg, s, i, a);
    const double alpha =
        params.alpha0 /
        (1.0 + static_cast<double>(visits[idx]) / params.alpha_decay);
    ++visits[idx];
    res.q[idx] += alpha * (target - res.q[idx]);
    s = s_next;
    ++res.steps;
  }
  return res;
}

Mat indicator_basis(const TabularMG& mg) {
  const int n = n_aug_sa(mg);
  return Mat::Identity(n, n);
}

LinearFaReport linear_fa_q(const TabularMG& mg, const Mat& basis,
                           const LinearFaParams& params, uint64_t seed) {
  mg.validate();
  const int n = n_aug_sa(mg);
  if (basis.rows() != n)
    throw UsageError("linear_fa_q: basis must have one row per augmented "
                     "state-action pair");
  const int p = static_cast<int>(basis.cols());
  Eigen::ColPivHouseholderQR<Mat> qr(basis);
  if (qr.rank() < p)
    throw UsageError("linear_fa_q: basis is rank deficient");
  if (params.steps <= 0) throw UsageError("linear_fa_q: steps <= 0");
  if (params.alpha0 <= 0.0 || params.alpha_decay <= 0.0)
    throw UsageError("linear_fa_q: bad step-size schedule");

  auto rng = make_rng(seed, 0x6c6661ull);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  Vec r = Vec::Zero(p);
  auto q_r = [&](int s, int i, int a) {
    return basis.row(aug_sa_index(mg, s, i, a)).dot(r);
  };

  for (long step = 0; step < params.steps; ++step) {
    const int idx = pick(rng);
    const int a = idx % mg.n_actions;
    const int i = (idx / mg.n_actions) % 2;
    const int s = idx / (2 * mg.n_actions);

    const double u = u01(rng);
    double acc = 0.0;
    int s_next = mg.n_states - 1;
    for (int t = 0; t < mg.n_states; ++t) {
      acc += mg.P[s][a][t];
      if (u <= acc) {
        s_next = t;
        break;
      }
    }
    double best_next_i = -std::numeric_limits<double>::infinity();
    for (int ap = 0; ap < mg.n_actions; ++ap)
      best_next_i = std::max(best_next_i, q_r(s_next, i, ap));
    const double standard = mg.R[s][a] + mg.gamma * best_next_i;
    const double intervene =
        mg.max_phi(s) + mg.switch_cost +
        backup_onto_q(mg, [&](int t, int ii, int ap) { return q_r(t, ii, ap); },
                      s, a, 1);
    const double target = std::max(intervene, standard);

    const Vec psi = basis.row(idx).transpose();
    const double alpha =
        params.alpha0 /
        (1.0 + static_cast<double>(step) / params.alpha_decay);
    r += (alpha / psi.squaredNorm()) * (target - psi.dot(r)) * psi;
  }

  LinearFaReport report;
  report.weights = r;
  report.q_fit = basis * r;

  const auto vi = value_iterate(mg);
  const auto qs = q_star(mg, vi.value);
  Vec q_exact = Eigen::Map<const Vec>(qs.data(), static_cast<Eigen::Index>(qs.size()));
  report.fit_error = (report.q_fit - q_exact).norm();
  Vec proj = basis * qr.solve(q_exact);
  report.projection_error = (proj - q_exact).norm();
  report.bound_rhs =
      report.projection_error / std::sqrt(1.0 - mg.gamma * mg.gamma);
  return report;
}

}  // namespace rosa::dp
