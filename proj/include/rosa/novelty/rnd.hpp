#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "rosa/common.hpp"
#include "rosa/mlp.hpp"

namespace rosa::novelty {

/// Random network distillation: a frozen random target h and a trained
/// predictor h_hat of the same shape. The bonus of a state is the squared
/// prediction error, which decays with visitation as the predictor fits.
class NoveltyModel {
 public:
  /// dims = [obs_dim, hidden..., k].
  NoveltyModel(std::vector<int> dims, uint64_t seed);

  int input_dim() const { return target_.in_dim(); }
  int k() const { return target_.out_dim(); }

  /// L(s) = || h_hat(s) - h(s) ||^2.
  double bonus(const Vec& s) const;

  /// One Adam step on the mean squared prediction error over the batch.
  /// Returns the mean of per-state bonuses before the step.
  double train_predictor(std::span<const Vec> batch, double lr);

  /// bonus(s_t) - bonus(s_prev).
  double delta_bonus(const Vec& s_t, const Vec& s_prev) const;

  uint64_t target_hash() const { return target_.weights_hash(); }
  uint64_t predictor_hash() const { return predictor_.weights_hash(); }

  const Mlp& target() const { return target_; }
  const Mlp& predictor() const { return predictor_; }
  Mlp& predictor() { return predictor_; }

 private:
  Mlp target_;
  Mlp predictor_;
};

/// Count-based bonus: beta / sqrt(n(s) + 1), saturating to zero once a
/// state has been visited cap_m times or more.
class CountTable {
 public:
  CountTable(double beta, long cap_m) : beta_(beta), cap_m_(cap_m) {
    if (beta <= 0.0) throw UsageError("CountTable: beta must be positive");
    if (cap_m <= 0) throw UsageError("CountTable: cap must be positive");
  }

  double bonus(long state) const;
  void visit(long state);
  long count(long state) const;
  double beta() const { return beta_; }
  long cap() const { return cap_m_; }

 private:
  double beta_;
  long cap_m_;
  std::unordered_map<long, long> counts_;
};

double count_bonus(const CountTable& table, long state);
double delta_bonus(const NoveltyModel& model, const Vec& s_t,
                   const Vec& s_prev);

}  // namespace rosa::novelty
