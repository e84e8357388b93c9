#include "rosa/agents/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rosa::agents {

void PpoConfig::validate() const {
  if (lr <= 0.0) throw UsageError("PpoConfig: lr must be positive");
  if (clip_eps <= 0.0 || clip_eps >= 1.0)
    throw UsageError("PpoConfig: clip_eps must lie in (0, 1)");
  if (gamma < 0.0 || gamma >= 1.0)
    throw UsageError("PpoConfig: gamma must lie in [0, 1)");
  if (lam < 0.0 || lam > 1.0)
    throw UsageError("PpoConfig: lambda must lie in [0, 1]");
  if (epochs <= 0 || minibatches <= 0 || rollout_len <= 0)
    throw UsageError("PpoConfig: epochs, minibatches, rollout_len must be "
                     "positive");
  if (ent_coef < 0.0 || vf_coef < 0.0)
    throw UsageError("PpoConfig: coefficients must be nonnegative");
  if (max_grad_norm <= 0.0)
    throw UsageError("PpoConfig: max_grad_norm must be positive");
  if (temperature <= 0.0)
    throw UsageError("PpoConfig: temperature must be positive");
}

PpoStats ppo_update(PolicyHead& head, std::span<const PpoSample> samples,
                    const PpoConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  PpoStats stats;
  if (samples.empty()) return stats;

  std::vector<double> adv(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) adv[i] = samples[i].advantage;
  if (cfg.normalize_advantages && samples.size() > 1) {
    const double mean =
        std::accumulate(adv.begin(), adv.end(), 0.0) / adv.size();
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double std = std::sqrt(var / adv.size());
    if (std > 1e-8)
      for (double& a : adv) a = (a - mean) / std;
  }

  std::vector<size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  const size_t n = samples.size();
  const size_t mb_count = std::min<size_t>(cfg.minibatches, n);
  // Sampling temperature applies to the controller head only; its gradient
  // carries the 1/T factor.
  const double temp = head.role == Role::kController ? cfg.temperature : 1.0;

  double sum_policy = 0.0, sum_value = 0.0, sum_entropy = 0.0;
  double clip_events = 0.0, sample_events = 0.0, sum_kl = 0.0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t mb = 0; mb < mb_count; ++mb) {
      const size_t begin = mb * n / mb_count;
      const size_t end = (mb + 1) * n / mb_count;
      const size_t bsize = end - begin;
      if (bsize == 0) continue;

      Mat X(head.pi.in_dim(), static_cast<Eigen::Index>(bsize));
      for (size_t j = 0; j < bsize; ++j)
        X.col(static_cast<Eigen::Index>(j)) = samples[order[begin + j]].obs;

      Mlp::Cache pi_cache, v_cache;
      const Mat logits = head.pi.forward_cached(X, pi_cache);
      const Mat values = head.v.forward_cached(X, v_cache);
      if (!logits.allFinite())
        throw RuntimeFault("ppo_update: non-finite logits during update");

      Mat d_logits = Mat::Zero(logits.rows(), logits.cols());
      Mat d_values = Mat::Zero(1, static_cast<Eigen::Index>(bsize));
      double mb_policy = 0.0, mb_value = 0.0, mb_entropy = 0.0;

      for (size_t j = 0; j < bsize; ++j) {
        const PpoSample& smp = samples[order[begin + j]];
        const double a_hat = adv[order[begin + j]];
        const Eigen::Index col = static_cast<Eigen::Index>(j);

        const Vec logp_all = log_softmax(logits.col(col), temp);
        const Vec p = logp_all.array().exp();
        const double logp = logp_all[smp.action];
        const double ratio = std::exp(logp - smp.logprob_old);
        sum_kl += smp.logprob_old - logp;

        // Clipped surrogate: gradient flows only through the unclipped
        // branch when it is the active minimum.
        const double unclipped = ratio * a_hat;
        const double clipped =
            std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps) * a_hat;
        const bool use_unclipped = unclipped <= clipped;
        mb_policy += -std::min(unclipped, clipped);
        if (std::abs(ratio - 1.0) > cfg.clip_eps) clip_events += 1.0;
        sample_events += 1.0;

        Vec d_logp = -p;
        d_logp[smp.action] += 1.0;  // d logp(a) / d logits
        if (use_unclipped) {
          // d(-ratio * A)/d logits = -A * ratio * d_logp
          d_logits.col(col) += (-a_hat * ratio) * d_logp;
        }

        const double entropy = -(p.array() * logp_all.array()).sum();
        mb_entropy += entropy;
        // d(-ent_coef * H)/d logits
        for (int k = 0; k < p.size(); ++k)
          d_logits(k, col) +=
              cfg.ent_coef * p[k] * (logp_all[k] + entropy);

        const double v_err = values(0, col) - smp.value_target;
        mb_value += 0.5 * v_err * v_err;
        d_values(0, col) = cfg.vf_coef * v_err;
      }

      const double inv_b = 1.0 / static_cast<double>(bsize);
      d_logits *= inv_b / temp;
      d_values *= inv_b;

      head.pi.zero_grad();
      head.pi.backward(pi_cache, d_logits);
      head.pi.clip_grad_norm(cfg.max_grad_norm);
      head.pi.adam_step(cfg.lr);

      head.v.zero_grad();
      head.v.backward(v_cache, d_values);
      head.v.clip_grad_norm(cfg.max_grad_norm);
      head.v.adam_step(cfg.lr);

      sum_policy += mb_policy * inv_b;
      sum_value += mb_value * inv_b;
      sum_entropy += mb_entropy * inv_b;
      ++stats.minibatches;
    }
  }

  if (stats.minibatches > 0) {
    stats.policy_loss = sum_policy / stats.minibatches;
    stats.value_loss = sum_value / stats.minibatches;
    stats.entropy = sum_entropy / stats.minibatches;
  }
  if (sample_events > 0.0) {
    stats.clip_fraction = clip_events / sample_events;
    stats.approx_kl = sum_kl / sample_events;
  }
  return stats;
}

}  // namespace rosa::agents
