#pragma once

#include <memory>
#include <optional>
#include <string>

#include "rosa/common.hpp"
#include "rosa/env/layout.hpp"

namespace rosa::env {

struct Observation {
  Vec v;
  bool preprocessed = false;
};

struct StepResult {
  Observation obs;       // next observation
  double reward = 0.0;   // possibly clipped
  double raw_reward = 0.0;
  bool done = false;      // terminal state reached
  bool truncated = false; // episode cap hit
  int goal_id = -1;       // terminal id reached this step, -1 otherwise
  int cell = -1;          // grid cell index of the new state, -1 off-grid
};

/// Per-dimension running mean/variance (Welford) with a warm-up window.
/// Until `warmup` samples are seen the raw value is passed through (clipped);
/// afterwards values are standardized and clipped to [-clip, clip].
class RunningNorm {
 public:
  RunningNorm() = default;
  RunningNorm(int dim, double clip = 5.0, long warmup = 10);
  Vec apply(const Vec& x);  // updates statistics, returns processed value
  long count() const { return count_; }
  const Vec& mean() const { return mean_; }
  Vec variance() const;
  void restore(long count, const Vec& mean, const Vec& m2);
  const Vec& m2() const { return m2_; }
  double clip() const { return clip_; }
  long warmup() const { return warmup_; }

 private:
  long count_ = 0;
  Vec mean_, m2_;
  double clip_ = 5.0;
  long warmup_ = 10;
};

/// Common environment interface. Preprocessing (observation standardization
/// and reward clipping) is applied here when enabled so every concrete env
/// behaves uniformly.
class EnvInstance {
 public:
  virtual ~EnvInstance() = default;

  Observation reset(uint64_t seed);
  Observation reset();  // continue the current RNG stream
  StepResult step(int action);

  virtual int obs_dim() const = 0;
  virtual int n_actions() const = 0;
  virtual const std::string& name() const = 0;
  virtual const GridSpec* grid() const { return nullptr; }
  /// Grid cell index of the current state, -1 for non-grid envs.
  virtual int current_cell() const { return -1; }

  bool episode_done() const { return done_ || truncated_; }
  int elapsed_steps() const { return elapsed_; }

  bool preprocess_obs = false;
  bool clip_rewards = false;

  const RunningNorm& obs_norm() const { return norm_; }
  RunningNorm& obs_norm() { return norm_; }

 protected:
  virtual Vec raw_reset(std::mt19937_64& rng) = 0;
  /// Returns (raw next obs, raw reward, done).
  struct RawStep {
    Vec obs;
    double reward;
    bool done;
    int goal_id = -1;
  };
  virtual RawStep raw_step(int action, std::mt19937_64& rng) = 0;
  virtual int max_steps() const = 0;

  std::mt19937_64 rng_{0};

 private:
  Observation process(Vec raw);

  bool done_ = true;
  bool truncated_ = false;
  int elapsed_ = 0;
  bool started_ = false;
  RunningNorm norm_;
};

std::unique_ptr<EnvInstance> make_env_from_grid(GridSpec spec,
                                                std::string name);

/// Two terminal goals, rewards 0.5 and 1.0, the lower-paying goal strictly
/// closer to the start. Construction fails if the layout violates that.
std::unique_ptr<EnvInstance> make_two_goal_maze(
    const std::optional<GridSpec>& custom = std::nullopt);

/// Two rooms connected by a single gateway cell, per-step penalty, one goal.
std::unique_ptr<EnvInstance> make_subgoal_maze(
    const std::optional<GridSpec>& custom = std::nullopt);

/// Goal near the start plus a large rewardless open region (>= 40% of the
/// free cells) that attracts pure novelty seekers.
std::unique_ptr<EnvInstance> make_red_herring_maze(
    const std::optional<GridSpec>& custom = std::nullopt);

/// 1-D corridor, start in the middle, goals 0.5 / 1.0 at equal distance,
/// negative per-step reward.
std::unique_ptr<EnvInstance> make_corridor_maze(
    const std::optional<GridSpec>& custom = std::nullopt);

struct CartpoleParams {
  double gravity = 9.8;
  double masscart = 1.0;
  double masspole = 0.1;
  double length = 0.5;  // half pole length
  double force_mag = 10.0;
  double tau = 0.02;
  double theta_threshold_deg = 12.0;
  double x_threshold = 2.4;
  int max_steps = 200;
};

/// Classic cartpole with sparse rewards: 0 per step, -1 when the pole
/// collapses or the cart leaves the track.
std::unique_ptr<EnvInstance> make_sparse_cartpole(
    const CartpoleParams& params = {});

}  // namespace rosa::env
