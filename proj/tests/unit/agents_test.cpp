#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "rosa/agents/gae.hpp"
#include "rosa/agents/policy.hpp"
#include "rosa/agents/ppo.hpp"
#include "rosa/agents/rollout.hpp"
#include "rosa/agents/trainer.hpp"
#include "rosa/common.hpp"
#include "rosa/env/env.hpp"
#include "rosa/novelty/rnd.hpp"
#include "rosa/shaping/potential.hpp"

using namespace rosa;
using namespace rosa::agents;

namespace {

Vec unit_obs(int dim, int hot) {
  Vec v = Vec::Zero(dim);
  v[hot] = 1.0;
  return v;
}

double action_prob(const PolicyHead& head, const Vec& obs, int action,
                   double temp = 1.0) {
  const Vec logp = log_softmax(head.pi.forward(obs), temp);
  return std::exp(logp[action]);
}

// Everything a switching-control rollout needs, seeded deterministically.
struct RolloutRig {
  std::unique_ptr<env::EnvInstance> env;
  PolicyHead controller;
  PolicyHead switch_head;
  PolicyHead magnitude;
  shaping::PotentialNet potential;
  novelty::NoveltyModel novelty;
  std::mt19937_64 rng;
  EpisodeState episode;

  explicit RolloutRig(uint64_t seed)
      : env(env::make_corridor_maze()),
        controller(Role::kController, env->obs_dim(), env->n_actions(), {16},
                   seed),
        switch_head(Role::kSwitch, env->obs_dim(), 2, {16}, seed + 1),
        magnitude(Role::kMagnitude, env->obs_dim(), 3, {16}, seed + 2),
        potential({env->obs_dim(), 16, 3}, seed + 3),
        novelty({env->obs_dim(), 16, 4}, seed + 4),
        rng(make_rng(seed, 0x726f6c)) {}

  std::vector<TransitionRecord> collect(const RolloutConfig& cfg) {
    return collect_rollout(*env, controller, &switch_head, &magnitude,
                           &potential, &novelty, cfg, rng, episode);
  }
};

// Maximal stretch of consecutive g = 1 records inside one episode.
struct OnRun {
  size_t first = 0;
  size_t last = 0;
  bool complete = false;  // the shaping chain is fully resolved in-buffer
};

std::vector<OnRun> find_runs(const std::vector<TransitionRecord>& recs) {
  std::vector<OnRun> runs;
  bool in_run = false;
  for (size_t i = 0; i < recs.size(); ++i) {
    if (recs[i].g == 1 && !in_run) {
      runs.push_back({i, i, false});
      in_run = true;
    }
    if (in_run) runs.back().last = i;
    const bool ep_end = recs[i].done || recs[i].truncated;
    if (recs[i].g == 0 || ep_end) {
      if (in_run && recs[i].g == 0) runs.back().last = i - 1;
      if (in_run) runs.back().complete = true;
      in_run = false;
    }
  }
  // A run cut off by the buffer end is unresolved unless it ended with the
  // episode.
  return runs;
}

}  // namespace

TEST_SUITE("agents") {

TEST_CASE("log softmax normalizes and flattens with temperature") {
  Vec logits(3);
  logits << 2.0, 0.5, -1.0;
  const Vec lp = log_softmax(logits);
  CHECK(lp.array().exp().sum() == doctest::Approx(1.0));
  CHECK(lp.maxCoeff() < 0.0);

  const Vec hot = log_softmax(logits, 0.25);
  const Vec cold = log_softmax(logits, 4.0);
  CHECK(std::exp(hot[0]) > std::exp(lp[0]));   // sharper
  CHECK(std::exp(cold[0]) < std::exp(lp[0]));  // flatter

  Vec shifted = logits.array() + 1000.0;  // stability under large offsets
  const Vec lp2 = log_softmax(shifted);
  CHECK((lp2 - lp).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("freshly initialized heads sample near uniformly") {
  PolicyHead head(Role::kController, 3, 4, {16}, 5);
  auto rng = make_rng(1, 0x616374);
  const Vec obs = unit_obs(3, 1);
  std::map<int, int> counts;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const ActionSample as = act(head, obs, rng);
    REQUIRE(as.action >= 0);
    REQUIRE(as.action < 4);
    ++counts[as.action];
    // Reported log prob matches the distribution it was drawn from.
    const Vec lp = log_softmax(head.pi.forward(obs));
    CHECK(as.logprob == doctest::Approx(lp[as.action]));
    if (i > 8) break;  // logprob check on a few samples only
  }
  for (int i = 0; i < n; ++i) ++counts[act(head, obs, rng).action];
  for (int a = 0; a < 4; ++a) {
    const double freq = static_cast<double>(counts[a]) / (n + 10);
    CHECK(freq > 0.15);
    CHECK(freq < 0.35);
  }
}

TEST_CASE("state value is the value net output") {
  PolicyHead head(Role::kController, 2, 3, {8}, 9);
  const Vec obs = unit_obs(2, 0);
  CHECK(state_value(head, obs) == doctest::Approx(head.v.forward(obs)[0]));
}

TEST_CASE("gae hand computed values") {
  const std::vector<double> rewards{1.0, 1.0};
  const std::vector<double> values{0.0, 0.0};
  std::vector<char> dones_storage{0, 0};
  const bool dones[2] = {false, false};
  auto adv = gae(rewards, values, std::span<const bool>(dones, 2), 0.5, 0.5);
  REQUIRE(adv.size() == 2);
  CHECK(adv[1] == doctest::Approx(1.0));
  CHECK(adv[0] == doctest::Approx(1.25));

  // A terminal last step must ignore the bootstrap value.
  const bool term[2] = {false, true};
  auto adv2 =
      gae(rewards, values, std::span<const bool>(term, 2), 0.5, 0.5, 999.0);
  CHECK(adv2[1] == doctest::Approx(1.0));
  CHECK(adv2[0] == doctest::Approx(1.25));
  (void)dones_storage;
}

TEST_CASE("gae vanishes when values already explain the returns") {
  const int n = 6;
  std::vector<double> rewards(n, 1.0);
  std::vector<double> values(n, 10.0);  // 1 / (1 - 0.9)
  std::vector<char> dones(n, 0);
  const bool all_false[6] = {false, false, false, false, false, false};
  auto adv = gae(rewards, values, std::span<const bool>(all_false, 6), 0.9,
                 0.95, 10.0);
  for (double a : adv) CHECK(std::abs(a) < 1e-12);
  (void)dones;
}

TEST_CASE("gae rejects mismatched inputs") {
  const std::vector<double> r{1.0, 2.0};
  const std::vector<double> v{0.0};
  const bool d[2] = {false, false};
  CHECK_THROWS_AS(gae(r, v, std::span<const bool>(d, 2), 0.9, 0.95),
                  UsageError);
  const std::vector<double> v2{0.0, 0.0};
  CHECK_THROWS_AS(gae(r, v2, std::span<const bool>(d, 2), 1.5, 0.95),
                  UsageError);
}

TEST_CASE("ppo shifts probability toward positive advantage") {
  PolicyHead head(Role::kController, 1, 2, {16}, 21);
  const Vec obs = unit_obs(1, 0);
  const double p0_before = action_prob(head, obs, 0);

  std::vector<PpoSample> samples;
  for (int i = 0; i < 64; ++i) {
    PpoSample smp;
    smp.obs = obs;
    smp.action = i % 2;
    const Vec lp = log_softmax(head.pi.forward(obs));
    smp.logprob_old = lp[smp.action];
    smp.advantage = smp.action == 0 ? 1.0 : -1.0;
    smp.value_target = 0.0;
    samples.push_back(smp);
  }

  PpoConfig cfg;
  cfg.lr = 3e-3;
  cfg.epochs = 4;
  cfg.minibatches = 2;
  cfg.ent_coef = 0.0;
  auto rng = make_rng(2, 0x70706f);
  const PpoStats stats = ppo_update(head, samples, cfg, rng);
  CHECK(stats.minibatches == 8);

  const double p0_after = action_prob(head, obs, 0);
  CHECK(p0_after > p0_before + 0.02);
}

TEST_CASE("zero advantage and matched targets leave the head untouched") {
  PolicyHead head(Role::kController, 3, 4, {12}, 33);
  std::vector<PpoSample> samples;
  auto rng = make_rng(3, 0x70706f);
  for (int i = 0; i < 16; ++i) {
    const Vec obs = unit_obs(3, i % 3);
    PpoSample smp;
    smp.obs = obs;
    smp.action = i % 4;
    smp.logprob_old = log_softmax(head.pi.forward(obs))[smp.action];
    smp.advantage = 0.0;
    smp.value_target = state_value(head, obs);
    samples.push_back(smp);
  }

  const Vec probe = unit_obs(3, 1);
  const Vec logits_before = head.pi.forward(probe);
  const double value_before = state_value(head, probe);

  PpoConfig cfg;
  cfg.lr = 1e-3;
  cfg.epochs = 3;
  cfg.minibatches = 2;
  cfg.ent_coef = 0.0;
  const PpoStats stats = ppo_update(head, samples, cfg, rng);

  // Zero advantages make the policy gradient exactly zero, so the policy
  // does not move at all. The value head is a different story: its targets
  // match only to rounding error, and Adam rescales even ulp-sized
  // residuals up to the learning rate within a few steps. So the value is
  // allowed to drift by a step-size-bounded amount while the value loss
  // itself must stay at floating-point dust.
  CHECK((head.pi.forward(probe) - logits_before).cwiseAbs().maxCoeff() <
        1e-7);
  CHECK(std::abs(state_value(head, probe) - value_before) <
        20.0 * cfg.lr);
  CHECK(stats.value_loss < 1e-4);
  CHECK(std::abs(stats.approx_kl) < 1e-9);
  CHECK(stats.clip_fraction == 0.0);
}

TEST_CASE("clipping gates the policy gradient") {
  PolicyHead head(Role::kController, 2, 3, {8}, 41);
  const Vec obs = unit_obs(2, 0);
  PpoSample smp;
  smp.obs = obs;
  smp.action = 1;
  // Pretend the action used to be much more likely: the ratio lands far
  // above 1 + clip_eps, so the clipped branch wins and the gradient is zero.
  smp.logprob_old = log_softmax(head.pi.forward(obs))[1] - 1.0;
  smp.advantage = 1.0;
  smp.value_target = state_value(head, obs);

  const Vec logits_before = head.pi.forward(obs);
  PpoConfig cfg;
  cfg.lr = 1e-2;
  cfg.epochs = 2;
  cfg.minibatches = 1;
  cfg.ent_coef = 0.0;
  auto rng = make_rng(4, 0x70706f);
  const PpoStats stats =
      ppo_update(head, std::span<const PpoSample>(&smp, 1), cfg, rng);

  CHECK(stats.clip_fraction == doctest::Approx(1.0));
  CHECK((head.pi.forward(obs) - logits_before).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("shaper step reward assembles the advertised pieces") {
  TransitionRecord rec;
  rec.r = 0.25;
  rec.r_i = 0.5;
  rec.g = 1;
  rec.c = -0.1;
  rec.L = 0.03;
  CHECK(shaper_step_reward(rec, ShaperRewardMode::kHatted) ==
        doctest::Approx(0.25 + 0.5 - 0.1 + 0.03));
  CHECK(shaper_step_reward(rec, ShaperRewardMode::kReduced) ==
        doctest::Approx(0.25 - 0.1));
  rec.g = 0;
  rec.a2 = 0;
  rec.r_i = 0.0;
  CHECK(shaper_step_reward(rec, ShaperRewardMode::kHatted) ==
        doctest::Approx(0.25 - 0.1 + 0.03));
}

TEST_CASE("rollout records satisfy the batch invariants") {
  RolloutRig rig(50);
  RolloutConfig cfg;
  cfg.rollout_len = 512;
  auto recs = rig.collect(cfg);
  REQUIRE(recs.size() >= 512);
  REQUIRE(recs.size() <= 513);
  CHECK_NOTHROW(check_records(recs));

  bool saw_on = false, saw_off = false;
  for (const auto& rec : recs) {
    CHECK(rec.has_switch);  // policy mode decides every step
    if (rec.g == 1) {
      saw_on = true;
      CHECK(rec.has_mag);
      CHECK(rec.a2 >= 1);
      CHECK(rec.a2 <= rig.potential.m());
    } else {
      saw_off = true;
    }
    CHECK(rec.cell >= 0);
    CHECK(rec.goal_id >= -1);
  }
  CHECK(saw_on);
  CHECK(saw_off);
}

TEST_CASE("switch cost fires exactly on off to on transitions") {
  RolloutRig rig(51);
  RolloutConfig cfg;
  cfg.rollout_len = 512;
  cfg.switch_cost = -0.17;
  auto recs = rig.collect(cfg);

  int prev_g = 0;  // fresh episode starts off
  for (const auto& rec : recs) {
    if (rec.g == 1 && prev_g == 0) {
      CHECK(rec.c == doctest::Approx(-0.17));
    } else {
      CHECK(rec.c == 0.0);
    }
    prev_g = (rec.done || rec.truncated) ? 0 : rec.g;
  }
}

TEST_CASE("completed on runs telescope to their opening potential") {
  for (auto direction :
       {shaping::Direction::kForward, shaping::Direction::kBackward}) {
    RolloutRig rig(52);
    RolloutConfig cfg;
    cfg.rollout_len = 768;
    cfg.shaping_gamma = 0.9;
    cfg.direction = direction;
    auto recs = rig.collect(cfg);

    int checked = 0;
    for (const OnRun& run : find_runs(recs)) {
      if (!run.complete) continue;
      double sum = 0.0;
      for (size_t i = run.first; i <= run.last; ++i)
        sum += std::pow(cfg.shaping_gamma,
                        static_cast<double>(i - run.first)) *
               recs[i].r_i;
      const double phi0 =
          rig.potential.phi(recs[run.first].s, recs[run.first].a2);
      const double expected = direction == shaping::Direction::kForward
                                  ? -phi0
                                  : -phi0 / cfg.shaping_gamma;
      CHECK(std::abs(sum - expected) < 1e-9);
      ++checked;
    }
    CHECK(checked > 3);
  }
}

TEST_CASE("rollouts are bit identical across reruns") {
  RolloutRig a(53), b(53);
  RolloutConfig cfg;
  cfg.rollout_len = 256;
  auto ra = a.collect(cfg);
  auto rb = b.collect(cfg);
  REQUIRE(ra.size() == rb.size());
  for (size_t i = 0; i < ra.size(); ++i) {
    CHECK(ra[i].a == rb[i].a);
    CHECK(ra[i].g == rb[i].g);
    CHECK(ra[i].a2 == rb[i].a2);
    CHECK(ra[i].r == rb[i].r);
    CHECK(ra[i].r_i == rb[i].r_i);
    CHECK(ra[i].L == rb[i].L);
    CHECK(ra[i].logp_ctrl == rb[i].logp_ctrl);
    CHECK(ra[i].cell == rb[i].cell);
  }
}

TEST_CASE("option mode reconsults the head only after termination") {
  RolloutRig rig(54);
  RolloutConfig cfg;
  cfg.rollout_len = 512;
  cfg.switch_mode = SwitchMode::kOption;
  cfg.option_gate_prob = 0.7;
  auto recs = rig.collect(cfg);
  CHECK_NOTHROW(check_records(recs));

  int prev_g = 0;
  int decisions = 0, continuations = 0;
  for (const auto& rec : recs) {
    if (rec.has_switch) ++decisions;
    if (rec.g == 1 && prev_g == 1 && !rec.has_switch) ++continuations;
    // Entering from off always pays the cost, even in option mode.
    if (rec.g == 1 && prev_g == 0) CHECK(rec.c < 0.0);
    prev_g = (rec.done || rec.truncated) ? 0 : rec.g;
  }
  CHECK(decisions > 0);
  CHECK(decisions < static_cast<int>(recs.size()));  // options persist
  CHECK(continuations > 0);
}

TEST_CASE("a zero continuation gate ends every option immediately") {
  RolloutRig rig(55);
  RolloutConfig cfg;
  cfg.rollout_len = 256;
  cfg.switch_mode = SwitchMode::kOption;
  cfg.option_gate_prob = 0.0;
  auto recs = rig.collect(cfg);
  // With w = 0 the option terminates at once, so the switch head decides at
  // every single step, as in policy mode.
  for (const auto& rec : recs) CHECK(rec.has_switch);
}

TEST_CASE("forced off runs carry no shaping state") {
  RolloutRig rig(56);
  RolloutConfig cfg;
  cfg.rollout_len = 256;
  cfg.forced_g = 0;
  auto recs = rig.collect(cfg);
  CHECK_NOTHROW(check_records(recs));
  for (const auto& rec : recs) {
    CHECK(rec.g == 0);
    CHECK(rec.a2 == 0);
    CHECK(rec.r_i == 0.0);
    CHECK(rec.c == 0.0);
    CHECK_FALSE(rec.has_switch);
    CHECK_FALSE(rec.has_mag);
  }
}

TEST_CASE("forced on runs pay the cost once per episode") {
  RolloutRig rig(57);
  RolloutConfig cfg;
  cfg.rollout_len = 512;
  cfg.forced_g = 1;
  cfg.switch_cost = -0.3;
  auto recs = rig.collect(cfg);
  CHECK_NOTHROW(check_records(recs));

  bool episode_start = true;
  for (const auto& rec : recs) {
    CHECK(rec.g == 1);
    CHECK(rec.has_mag);
    CHECK_FALSE(rec.has_switch);
    if (episode_start) {
      CHECK(rec.c == doctest::Approx(-0.3));
    } else {
      CHECK(rec.c == 0.0);
    }
    episode_start = rec.done || rec.truncated;
  }
}

TEST_CASE("novelty reward mode pays the next state bonus") {
  RolloutRig rig(58);
  RolloutConfig cfg;
  cfg.rollout_len = 256;
  cfg.novelty_reward = true;
  auto recs = rig.collect(cfg);
  CHECK_NOTHROW(check_records(recs));
  for (const auto& rec : recs) {
    CHECK(rec.g == 1);
    CHECK(rec.c == 0.0);
    CHECK_FALSE(rec.has_mag);
    if (rec.done || rec.truncated) {
      CHECK(rec.r_i == 0.0);
    } else {
      CHECK(rec.r_i == doctest::Approx(rig.novelty.bonus(rec.s_next)));
      CHECK(rec.r_i >= 0.0);
    }
  }
}

TEST_CASE("fixed potential mode replays the table difference") {
  RolloutRig rig(59);
  const auto* grid = rig.env->grid();
  REQUIRE(grid != nullptr);
  std::vector<double> table(static_cast<size_t>(grid->n_cells()));
  for (size_t i = 0; i < table.size(); ++i)
    table[i] = 0.01 * static_cast<double>(i % 7);

  RolloutConfig cfg;
  cfg.rollout_len = 256;
  cfg.fixed_potential = &table;
  cfg.shaping_gamma = 0.95;
  auto recs = rig.collect(cfg);
  CHECK_NOTHROW(check_records(recs));
  for (const auto& rec : recs) {
    CHECK(rec.g == 1);
    CHECK(rec.c == 0.0);
    const double phi_s = table[static_cast<size_t>(rec.cell)];
    const double phi_n = (rec.done || rec.truncated)
                             ? 0.0
                             : table[static_cast<size_t>(rec.cell_next)];
    CHECK(rec.r_i == doctest::Approx(0.95 * phi_n - phi_s));
  }
}

TEST_CASE("rollout config contradictions are rejected") {
  RolloutRig rig(60);
  RolloutConfig cfg;
  cfg.rollout_len = 8;
  cfg.novelty_reward = true;
  cfg.forced_g = 1;
  CHECK_THROWS_AS(rig.collect(cfg), UsageError);

  RolloutConfig bad;
  bad.rollout_len = 8;
  bad.switch_cost = 0.1;
  CHECK_THROWS_AS(rig.collect(bad), UsageError);

  RolloutConfig no_heads;
  no_heads.rollout_len = 8;
  auto env = env::make_corridor_maze();
  PolicyHead ctrl(Role::kController, env->obs_dim(), env->n_actions(), {8}, 1);
  auto rng = make_rng(1, 0x726f6c);
  EpisodeState ep;
  CHECK_THROWS_AS(collect_rollout(*env, ctrl, nullptr, nullptr, nullptr,
                                  nullptr, no_heads, rng, ep),
                  UsageError);
}

TEST_CASE("episode hook reports consistent statistics") {
  RolloutRig rig(61);
  RolloutConfig cfg;
  cfg.rollout_len = 512;
  int episodes = 0;
  long hook_steps = 0;
  RolloutHooks hooks;
  hooks.on_episode_end = [&](const EpisodeState& ep, int goal_id) {
    ++episodes;
    hook_steps += ep.steps;
    CHECK(ep.steps > 0);
    CHECK(ep.steps <= 100);  // corridor step cap
    CHECK(goal_id >= -1);
    CHECK(goal_id <= 1);
    CHECK(ep.switch_count >= 0);
  };
  auto recs = collect_rollout(*rig.env, rig.controller, &rig.switch_head,
                              &rig.magnitude, &rig.potential, &rig.novelty,
                              cfg, rig.rng, rig.episode, hooks);
  CHECK(episodes > 0);
  CHECK(hook_steps <= static_cast<long>(recs.size()) + 1);
}

TEST_CASE("vanilla training solves the corridor") {
  auto env = env::make_corridor_maze();
  TrainerConfig cfg;
  cfg.mode = TrainMode::kVanilla;
  cfg.ppo.lr = 3e-3;
  cfg.ppo.gamma = 0.98;
  cfg.ppo.rollout_len = 256;
  cfg.ppo.ent_coef = 0.01;
  cfg.hidden = {32};
  cfg.max_episodes = 250;
  cfg.max_env_steps = 100000;

  Trainer trainer(*env, cfg, 11);
  std::vector<double> returns;
  TrainerHooks hooks;
  hooks.on_episode = [&](const MetricsRow& row) {
    returns.push_back(row.extrinsic_return);
  };
  trainer.run(hooks);
  REQUIRE(returns.size() >= 50);
  double tail = 0.0;
  for (size_t i = returns.size() - 50; i < returns.size(); ++i)
    tail += returns[i];
  tail /= 50.0;
  // Optimal is 0.75 (five steps at -0.05 plus the 1.0 goal).
  CHECK(tail > 0.6);
}

}  // TEST_SUITE
