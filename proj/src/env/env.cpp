#include "rosa/env/env.hpp"

#include <algorithm>
#include <cmath>

namespace rosa::env {

RunningNorm::RunningNorm(int dim, double clip, long warmup)
    : mean_(Vec::Zero(dim)), m2_(Vec::Zero(dim)), clip_(clip), warmup_(warmup) {}

Vec RunningNorm::apply(const Vec& x) {
  if (mean_.size() == 0) {
    mean_ = Vec::Zero(x.size());
    m2_ = Vec::Zero(x.size());
  }
  if (x.size() != mean_.size())
    throw UsageError("RunningNorm: dimension changed mid-run");
  ++count_;
  const Vec delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta.cwiseProduct(x - mean_);
  Vec out;
  if (count_ < warmup_) {
    out = x;
  } else {
    const Vec var = m2_ / static_cast<double>(count_);
    out = (x - mean_).cwiseQuotient((var.array() + 1e-8).sqrt().matrix());
  }
  return out.cwiseMax(-clip_).cwiseMin(clip_);
}

Vec RunningNorm::variance() const {
  if (count_ == 0) return Vec();
  return m2_ / static_cast<double>(count_);
}

void RunningNorm::restore(long count, const Vec& mean, const Vec& m2) {
  count_ = count;
  mean_ = mean;
  m2_ = m2;
}

Observation EnvInstance::process(Vec raw) {
  Observation obs;
  if (preprocess_obs) {
    obs.v = norm_.apply(raw);
    obs.preprocessed = true;
  } else {
    obs.v = std::move(raw);
  }
  return obs;
}

Observation EnvInstance::reset(uint64_t seed) {
  rng_ = make_rng(seed, 0x656e76ull);
  return reset();
}

Observation EnvInstance::reset() {
  done_ = false;
  truncated_ = false;
  elapsed_ = 0;
  started_ = true;
  return process(raw_reset(rng_));
}

StepResult EnvInstance::step(int action) {
  if (!started_) throw UsageError("step called before reset");
  if (done_ || truncated_) throw UsageError("step called after episode end");
  if (action < 0 || action >= n_actions())
    throw UsageError("action out of range");
  RawStep rs = raw_step(action, rng_);
  ++elapsed_;
  StepResult out;
  out.raw_reward = rs.reward;
  out.reward = clip_rewards ? std::clamp(rs.reward, -1.0, 1.0) : rs.reward;
  out.done = rs.done;
  out.goal_id = rs.goal_id;
  out.obs = process(std::move(rs.obs));
  out.cell = current_cell();
  if (!out.done && elapsed_ >= max_steps()) out.truncated = true;
  done_ = out.done;
  truncated_ = out.truncated;
  return out;
}

}  // namespace rosa::env
