#include <cmath>

#include "rosa/env/env.hpp"

namespace rosa::env {

namespace {

class SparseCartpole : public EnvInstance {
 public:
  explicit SparseCartpole(const CartpoleParams& p) : p_(p) {
    if (p_.max_steps <= 0) throw UsageError("cartpole: max_steps must be positive");
    theta_threshold_ = p_.theta_threshold_deg * M_PI / 180.0;
  }

  int obs_dim() const override { return 4; }
  int n_actions() const override { return 2; }
  const std::string& name() const override { return name_; }

 protected:
  Vec raw_reset(std::mt19937_64& rng) override {
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    for (double& s : state_) s = u(rng);
    return encode();
  }

  RawStep raw_step(int action, std::mt19937_64&) override {
    const double force = action == 1 ? p_.force_mag : -p_.force_mag;
    const double x = state_[0], x_dot = state_[1];
    const double theta = state_[2], theta_dot = state_[3];
    const double cos_t = std::cos(theta), sin_t = std::sin(theta);
    const double total_mass = p_.masscart + p_.masspole;
    const double polemass_length = p_.masspole * p_.length;
    const double temp =
        (force + polemass_length * theta_dot * theta_dot * sin_t) / total_mass;
    const double theta_acc =
        (p_.gravity * sin_t - cos_t * temp) /
        (p_.length * (4.0 / 3.0 - p_.masspole * cos_t * cos_t / total_mass));
    const double x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;
    state_[0] = x + p_.tau * x_dot;
    state_[1] = x_dot + p_.tau * x_acc;
    state_[2] = theta + p_.tau * theta_dot;
    state_[3] = theta_dot + p_.tau * theta_acc;

    RawStep rs;
    const bool collapsed = std::abs(state_[0]) > p_.x_threshold ||
                           std::abs(state_[2]) > theta_threshold_;
    rs.reward = collapsed ? -1.0 : 0.0;
    rs.done = collapsed;
    rs.obs = encode();
    return rs;
  }

  int max_steps() const override { return p_.max_steps; }

 private:
  Vec encode() const {
    Vec v(4);
    for (int i = 0; i < 4; ++i) v[i] = state_[i];
    return v;
  }

  CartpoleParams p_;
  double theta_threshold_;
  double state_[4] = {0, 0, 0, 0};
  std::string name_ = "cartpole";
};

}  // namespace

std::unique_ptr<EnvInstance> make_sparse_cartpole(const CartpoleParams& params) {
  auto env = std::make_unique<SparseCartpole>(params);
  env->preprocess_obs = true;
  env->clip_rewards = true;
  return env;
}

}  // namespace rosa::env
