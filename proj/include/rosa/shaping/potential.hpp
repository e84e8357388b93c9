#pragma once

#include <span>
#include <string>
#include <vector>

#include "rosa/common.hpp"
#include "rosa/mlp.hpp"

namespace rosa::shaping {

enum class Direction {
  kForward,   // gamma * phi(s', a2') - phi(s, a2), applied at time t
  kBackward,  // phi(s', a2') - phi(s, a2) / gamma, applied at time t+1
};

struct ShapingParams {
  double gamma = 0.95;
  int m = 8;  // number of non-null shaper actions
  Direction direction = Direction::kForward;
};

/// Fixed random net f: R^d -> R^m. The potential of (s, a2) is the a2-th
/// component of f(s) for a2 in 1..m, and identically zero for the null
/// action a2 = 0.
class PotentialNet {
 public:
  /// dims = [obs_dim, hidden..., m].
  PotentialNet(std::vector<int> dims, uint64_t seed);

  int m() const { return net_.out_dim(); }
  int input_dim() const { return net_.in_dim(); }
  uint64_t seed() const { return seed_; }

  Vec features(const Vec& s) const { return net_.forward(s); }
  /// phi(s, a2) = f(s) . one_hot(a2); one_hot(0) is the zero vector.
  double phi(const Vec& s, int a2) const;

  uint64_t weights_hash() const { return net_.weights_hash(); }

  void save(const std::string& bin_path, const std::string& json_path) const;
  static PotentialNet load(const std::string& json_path);

 private:
  Mlp net_;
  uint64_t seed_;
  std::vector<int> dims_;
};

/// Shaping reward for the transition (s, a2) -> (s_next, a2_next). If
/// s_next is terminal the potential of the next pair is taken as zero.
double shaping_reward(const PotentialNet& net, const Vec& s, int a2,
                      const Vec& s_next, int a2_next, double gamma,
                      Direction direction = Direction::kForward,
                      bool next_terminal = false);

struct SegmentStep {
  int t;
  Vec s;
  int a2;
  bool on;  // shaping applied at this step
};

struct SegmentSum {
  double sum = 0.0;            // discounted shaping sum over the segment
  bool boundary_null = true;   // both boundary shaper actions were null
  double expected_residual = 0.0;  // telescoped boundary terms
};

/// Discounted shaping sum over one on-segment given as consecutive steps
/// [tau_on, tau_off]. With null boundary actions the sum telescopes to zero;
/// otherwise boundary_null is false and expected_residual carries the
/// telescoped boundary value gamma^off * phi_off - gamma^on * phi_on.
SegmentSum segment_shaping_sum(std::span<const SegmentStep> segment,
                               const PotentialNet& net, double gamma);

}  // namespace rosa::shaping
