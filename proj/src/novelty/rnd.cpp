#include "rosa/novelty/rnd.hpp"

namespace rosa::novelty {

NoveltyModel::NoveltyModel(std::vector<int> dims, uint64_t seed) {
  if (dims.size() < 2) throw UsageError("NoveltyModel: need [d, ..., k] dims");
  auto rng_t = make_rng(seed, 0x746172ull);
  auto rng_p = make_rng(seed, 0x707264ull);
  target_ = Mlp(dims, rng_t);
  predictor_ = Mlp(dims, rng_p);
}

double NoveltyModel::bonus(const Vec& s) const {
  if (s.size() != input_dim())
    throw UsageError("NoveltyModel::bonus: observation dimension mismatch");
  return (predictor_.forward(s) - target_.forward(s)).squaredNorm();
}

double NoveltyModel::train_predictor(std::span<const Vec> batch, double lr) {
  if (batch.empty())
    throw UsageError("NoveltyModel::train_predictor: empty batch");
  if (lr <= 0.0)
    throw UsageError("NoveltyModel::train_predictor: lr must be positive");
  const int d = input_dim();
  Mat X(d, static_cast<Eigen::Index>(batch.size()));
  for (size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].size() != d)
      throw UsageError("NoveltyModel::train_predictor: dimension mismatch");
    X.col(static_cast<Eigen::Index>(i)) = batch[i];
  }
  const Mat T = target_.forward(X);
  Mlp::Cache cache;
  const Mat P = predictor_.forward_cached(X, cache);
  const Mat err = P - T;
  const double loss = err.squaredNorm() / static_cast<double>(batch.size());
  predictor_.backward(cache, 2.0 * err / static_cast<double>(batch.size()));
  predictor_.adam_step(lr);
  return loss;
}

double NoveltyModel::delta_bonus(const Vec& s_t, const Vec& s_prev) const {
  return bonus(s_t) - bonus(s_prev);
}

double delta_bonus(const NoveltyModel& model, const Vec& s_t,
                   const Vec& s_prev) {
  return model.delta_bonus(s_t, s_prev);
}

}  // namespace rosa::novelty
