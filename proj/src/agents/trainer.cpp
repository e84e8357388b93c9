#include "rosa/agents/trainer.hpp"

#include <filesystem>
#include <fstream>
#include <memory>

#include "json.hpp"
#include "rosa/agents/gae.hpp"

namespace rosa::agents {

using nlohmann::json;

TrainMode parse_train_mode(const std::string& name) {
  if (name == "rosa") return TrainMode::kRosa;
  if (name == "vanilla") return TrainMode::kVanilla;
  if (name == "rnd_bonus") return TrainMode::kRndBonus;
  if (name == "pbrs_fixed") return TrainMode::kPbrsFixed;
  if (name == "rosa_no_switch") return TrainMode::kRosaNoSwitch;
  throw UsageError("unknown mode '" + name +
                   "' (expected rosa, vanilla, rnd_bonus, pbrs_fixed or "
                   "rosa_no_switch)");
}

std::string train_mode_name(TrainMode mode) {
  switch (mode) {
    case TrainMode::kRosa: return "rosa";
    case TrainMode::kVanilla: return "vanilla";
    case TrainMode::kRndBonus: return "rnd_bonus";
    case TrainMode::kPbrsFixed: return "pbrs_fixed";
    case TrainMode::kRosaNoSwitch: return "rosa_no_switch";
  }
  throw RuntimeFault("train_mode_name: bad mode");
}

void TrainerConfig::validate() const {
  ppo.validate();
  if (shaper_m < 1) throw UsageError("TrainerConfig: shaper_m must be >= 1");
  if (switch_cost >= 0.0)
    throw UsageError("TrainerConfig: switch_cost must be negative");
  if (shaping_gamma <= 0.0 || shaping_gamma >= 1.0)
    throw UsageError("TrainerConfig: shaping_gamma outside (0,1)");
  if (option_gate_prob < 0.0 || option_gate_prob > 1.0)
    throw UsageError("TrainerConfig: option_gate_prob outside [0,1]");
  if (max_episodes <= 0 || max_env_steps <= 0)
    throw UsageError("TrainerConfig: budgets must be positive");
  if (novelty_lr <= 0.0)
    throw UsageError("TrainerConfig: novelty_lr must be positive");
  if (novelty_k < 1) throw UsageError("TrainerConfig: novelty_k must be >= 1");
  for (int h : hidden)
    if (h <= 0)
      throw UsageError("TrainerConfig: hidden widths must be positive");
  for (int h : potential_hidden)
    if (h <= 0)
      throw UsageError("TrainerConfig: potential widths must be positive");
  for (int h : novelty_hidden)
    if (h <= 0)
      throw UsageError("TrainerConfig: novelty widths must be positive");
}

Trainer::Trainer(env::EnvInstance& env, const TrainerConfig& cfg,
                 uint64_t seed)
    : env_(env),
      cfg_(cfg),
      seed_(seed),
      rollout_rng_(make_rng(seed, 0x726f6cull)),
      update_rng_(make_rng(seed, 0x757064ull)) {
  cfg_.validate();
  const int d = env.obs_dim();
  controller_ = PolicyHead(Role::kController, d, env.n_actions(), cfg_.hidden,
                           seed);
  const bool wants_shaper = cfg_.mode == TrainMode::kRosa ||
                            cfg_.mode == TrainMode::kRosaNoSwitch;
  if (wants_shaper) {
    std::vector<int> pdims;
    pdims.push_back(d);
    pdims.insert(pdims.end(), cfg_.potential_hidden.begin(),
                 cfg_.potential_hidden.end());
    pdims.push_back(cfg_.shaper_m);
    potential_.emplace(pdims, seed);
    magnitude_head_.emplace(Role::kMagnitude, d, cfg_.shaper_m, cfg_.hidden,
                            seed);
    if (cfg_.mode == TrainMode::kRosa)
      switch_head_.emplace(Role::kSwitch, d, 2, cfg_.hidden, seed);
  }
  if (wants_shaper || cfg_.mode == TrainMode::kRndBonus) {
    std::vector<int> ndims;
    ndims.push_back(d);
    ndims.insert(ndims.end(), cfg_.novelty_hidden.begin(),
                 cfg_.novelty_hidden.end());
    ndims.push_back(cfg_.novelty_k);
    novelty_.emplace(ndims, seed);
  }
  if (cfg_.mode == TrainMode::kPbrsFixed) {
    if (cfg_.fixed_potential.empty())
      throw UsageError("Trainer: pbrs_fixed needs a potential table");
    const env::GridSpec* grid = env.grid();
    if (grid == nullptr)
      throw UsageError("Trainer: pbrs_fixed needs a grid environment");
    if (cfg_.fixed_potential.size() != static_cast<size_t>(grid->n_cells()))
      throw UsageError(
          "Trainer: potential table size does not match the grid");
  }
  episode_.obs = env_.reset(seed).v;
  episode_.valid = true;
}

RolloutConfig Trainer::rollout_config() const {
  RolloutConfig rc;
  rc.rollout_len = cfg_.ppo.rollout_len;
  rc.switch_mode = cfg_.switch_mode;
  rc.option_gate_prob = cfg_.option_gate_prob;
  rc.switch_cost = cfg_.switch_cost;
  rc.shaping_gamma = cfg_.shaping_gamma;
  rc.direction = cfg_.direction;
  rc.temperature = cfg_.ppo.temperature;
  switch (cfg_.mode) {
    case TrainMode::kRosa:
      break;
    case TrainMode::kVanilla:
      rc.forced_g = 0;
      break;
    case TrainMode::kRndBonus:
      rc.novelty_reward = true;
      break;
    case TrainMode::kPbrsFixed:
      rc.fixed_potential = &cfg_.fixed_potential;
      break;
    case TrainMode::kRosaNoSwitch:
      rc.forced_g = 1;
      break;
  }
  return rc;
}

namespace {

std::vector<double> batch_values(const Mlp& v,
                                 const std::vector<TransitionRecord>& recs) {
  Mat X(v.in_dim(), static_cast<Eigen::Index>(recs.size()));
  for (size_t i = 0; i < recs.size(); ++i)
    X.col(static_cast<Eigen::Index>(i)) = recs[i].s;
  const Mat out = v.forward(X);
  std::vector<double> vals(recs.size());
  for (size_t i = 0; i < recs.size(); ++i)
    vals[i] = out(0, static_cast<Eigen::Index>(i));
  return vals;
}

/// Advantages and value targets over episode slices of the batch. Slices cut
/// at terminations and truncations; ends that are not true terminals
/// bootstrap with V(s_next).
struct AdvTargets {
  std::vector<double> adv;
  std::vector<double> target;
};

AdvTargets advantages(const Mlp& v, const std::vector<TransitionRecord>& recs,
                      const std::vector<double>& rewards, double gamma,
                      double lam) {
  const std::vector<double> values = batch_values(v, recs);
  AdvTargets out;
  out.adv.resize(recs.size());
  out.target.resize(recs.size());
  size_t begin = 0;
  while (begin < recs.size()) {
    size_t end = begin;
    while (end < recs.size() && !recs[end].done && !recs[end].truncated) ++end;
    if (end < recs.size()) ++end;  // include the boundary step
    const size_t n = end - begin;
    std::unique_ptr<bool[]> dones(new bool[n]());
    dones[n - 1] = recs[end - 1].done;
    const double bootstrap = v.forward(recs[end - 1].s_next)(0);
    const std::vector<double> adv =
        gae(std::span(rewards).subspan(begin, n),
            std::span(values).subspan(begin, n),
            std::span<const bool>(dones.get(), n), gamma, lam, bootstrap);
    for (size_t i = 0; i < n; ++i) {
      out.adv[begin + i] = adv[i];
      out.target[begin + i] = adv[i] + values[begin + i];
    }
    begin = end;
  }
  return out;
}

}  // namespace

std::vector<TransitionRecord> Trainer::step_once(const TrainerHooks& hooks) {
  RolloutHooks rh;
  rh.on_episode_end = [&](const EpisodeState& ep, int goal_id) {
    ++episodes_;
    env_steps_ += ep.steps;
    if (hooks.on_episode) {
      MetricsRow row;
      row.episode = episodes_;
      row.env_steps = env_steps_;
      row.extrinsic_return = ep.extrinsic_return;
      row.shaped_return = ep.shaped_return;
      row.switch_count = ep.switch_count;
      row.mean_bonus = ep.steps > 0 ? ep.bonus_sum / ep.steps : 0.0;
      row.goal_id = goal_id;
      hooks.on_episode(row);
    }
  };

  std::vector<TransitionRecord> recs = collect_rollout(
      env_, controller_, switch_head_ ? &*switch_head_ : nullptr,
      magnitude_head_ ? &*magnitude_head_ : nullptr,
      potential_ ? &*potential_ : nullptr, novelty_ ? &*novelty_ : nullptr,
      rollout_config(), rollout_rng_, episode_, rh);
  check_records(recs);
  if (hooks.on_records) hooks.on_records(recs);

  TrainStats ts;
  ts.update_index = ++updates_;
  ts.records = static_cast<long>(recs.size());

  if (novelty_) {
    std::vector<Vec> batch;
    batch.reserve(recs.size());
    for (const TransitionRecord& rec : recs) batch.push_back(rec.s_next);
    ts.rnd_loss = novelty_->train_predictor(batch, cfg_.novelty_lr);
  }

  if (switch_head_ || magnitude_head_) {
    std::vector<double> shaper_rewards(recs.size());
    for (size_t i = 0; i < recs.size(); ++i)
      shaper_rewards[i] = shaper_step_reward(recs[i], cfg_.shaper_reward);
    if (switch_head_) {
      const AdvTargets at = advantages(switch_head_->v, recs, shaper_rewards,
                                       cfg_.ppo.gamma, cfg_.ppo.lam);
      std::vector<PpoSample> samples;
      for (size_t i = 0; i < recs.size(); ++i) {
        if (!recs[i].has_switch) continue;
        samples.push_back({recs[i].s, recs[i].g, recs[i].logp_switch,
                           at.adv[i], at.target[i]});
      }
      ts.switch_head = ppo_update(*switch_head_, samples, cfg_.ppo,
                                  update_rng_);
    }
    if (magnitude_head_) {
      const AdvTargets at = advantages(magnitude_head_->v, recs,
                                       shaper_rewards, cfg_.ppo.gamma,
                                       cfg_.ppo.lam);
      std::vector<PpoSample> samples;
      for (size_t i = 0; i < recs.size(); ++i) {
        if (!recs[i].has_mag) continue;
        samples.push_back({recs[i].s, recs[i].a2 - 1, recs[i].logp_mag,
                           at.adv[i], at.target[i]});
      }
      ts.magnitude = ppo_update(*magnitude_head_, samples, cfg_.ppo,
                                update_rng_);
    }
  }

  {
    std::vector<double> ctrl_rewards(recs.size());
    for (size_t i = 0; i < recs.size(); ++i)
      ctrl_rewards[i] = recs[i].r + recs[i].r_i * recs[i].g;
    const AdvTargets at = advantages(controller_.v, recs, ctrl_rewards,
                                     cfg_.ppo.gamma, cfg_.ppo.lam);
    std::vector<PpoSample> samples;
    samples.reserve(recs.size());
    for (size_t i = 0; i < recs.size(); ++i)
      samples.push_back({recs[i].s, recs[i].a, recs[i].logp_ctrl, at.adv[i],
                         at.target[i]});
    ts.controller = ppo_update(controller_, samples, cfg_.ppo, update_rng_);
  }

  if (hooks.on_update) hooks.on_update(ts);
  return recs;
}

void Trainer::run(const TrainerHooks& hooks) {
  while (episodes_ < cfg_.max_episodes && env_steps_ < cfg_.max_env_steps)
    step_once(hooks);
}

void Trainer::save_checkpoint(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  json nets = json::object();
  const auto save_mlp = [&](const Mlp& m, const std::string& name) {
    const std::string file = name + ".bin";
    std::ofstream out(fs::path(dir) / file, std::ios::binary);
    if (!out) throw RuntimeFault("save_checkpoint: cannot write " + file);
    m.save_blob(out);
    json j;
    j["file"] = file;
    j["dims"] = m.dims();
    j["hash"] = m.weights_hash();
    j["parameters"] = m.parameter_count();
    nets[name] = j;
  };
  save_mlp(controller_.pi, "controller_pi");
  save_mlp(controller_.v, "controller_v");
  if (switch_head_) {
    save_mlp(switch_head_->pi, "switch_pi");
    save_mlp(switch_head_->v, "switch_v");
  }
  if (magnitude_head_) {
    save_mlp(magnitude_head_->pi, "magnitude_pi");
    save_mlp(magnitude_head_->v, "magnitude_v");
  }
  if (novelty_) {
    save_mlp(novelty_->target(), "novelty_target");
    save_mlp(novelty_->predictor(), "novelty_predictor");
  }
  json manifest;
  manifest["mode"] = train_mode_name(cfg_.mode);
  manifest["seed"] = seed_;
  manifest["episodes"] = episodes_;
  manifest["env_steps"] = env_steps_;
  manifest["updates"] = updates_;
  manifest["nets"] = nets;
  if (potential_) {
    potential_->save((fs::path(dir) / "potential.bin").string(),
                     (fs::path(dir) / "potential.json").string());
    manifest["potential"] = "potential.json";
  }
  if (env_.preprocess_obs) {
    const env::RunningNorm& norm = env_.obs_norm();
    json jn;
    jn["count"] = norm.count();
    jn["mean"] = std::vector<double>(norm.mean().begin(), norm.mean().end());
    jn["m2"] = std::vector<double>(norm.m2().begin(), norm.m2().end());
    manifest["obs_norm"] = jn;
  }
  std::ofstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw RuntimeFault("save_checkpoint: cannot write manifest.json");
  mf << manifest.dump(2) << "\n";
}

}  // namespace rosa::agents
