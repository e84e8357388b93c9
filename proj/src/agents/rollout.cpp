#include "rosa/agents/rollout.hpp"

#include <cmath>
#include <string>

namespace rosa::agents {

void check_records(const std::vector<TransitionRecord>& records) {
  for (size_t i = 0; i < records.size(); ++i) {
    const TransitionRecord& rec = records[i];
    const std::string where = "record " + std::to_string(i) + ": ";
    if (rec.g != 0 && rec.g != 1)
      throw RuntimeFault(where + "indicator outside {0,1}");
    if (rec.g == 0) {
      if (rec.a2 != 0) throw RuntimeFault(where + "off step with a2 != 0");
      if (rec.r_i != 0.0) throw RuntimeFault(where + "off step with r_i != 0");
      if (rec.has_mag) throw RuntimeFault(where + "off step owns a magnitude action");
    }
    if (rec.a2 < 0) throw RuntimeFault(where + "negative a2");
    if (rec.c > 0.0) throw RuntimeFault(where + "positive switch cost");
    if (rec.c != 0.0 && rec.g != 1)
      throw RuntimeFault(where + "cost attached to an off step");
    if (rec.has_mag && rec.a2 < 1)
      throw RuntimeFault(where + "magnitude decision without an action");
  }
}

double shaper_step_reward(const TransitionRecord& rec, ShaperRewardMode mode) {
  if (mode == ShaperRewardMode::kReduced) return rec.r + rec.c;
  return rec.r + rec.r_i * rec.g + rec.c + rec.L;
}

namespace {

void validate_config(const RolloutConfig& cfg, const PolicyHead* switch_head,
                     const PolicyHead* magnitude_head,
                     const shaping::PotentialNet* potential,
                     const novelty::NoveltyModel* novelty) {
  if (cfg.rollout_len <= 0)
    throw UsageError("collect_rollout: rollout_len must be positive");
  if (cfg.switch_cost >= 0.0)
    throw UsageError("collect_rollout: switch_cost must be negative");
  if (cfg.option_gate_prob < 0.0 || cfg.option_gate_prob > 1.0)
    throw UsageError("collect_rollout: option_gate_prob outside [0,1]");
  if (cfg.shaping_gamma <= 0.0 || cfg.shaping_gamma >= 1.0)
    throw UsageError("collect_rollout: shaping_gamma outside (0,1)");
  if (cfg.temperature <= 0.0)
    throw UsageError("collect_rollout: temperature must be positive");
  const int special = (cfg.novelty_reward ? 1 : 0) +
                      (cfg.fixed_potential != nullptr ? 1 : 0) +
                      (cfg.forced_g.has_value() ? 1 : 0);
  if (special > 1)
    throw UsageError(
        "collect_rollout: forced_g, novelty_reward and fixed_potential are "
        "mutually exclusive");
  if (cfg.novelty_reward && novelty == nullptr)
    throw UsageError("collect_rollout: novelty_reward needs a novelty model");
  if (cfg.forced_g && *cfg.forced_g != 0 && *cfg.forced_g != 1)
    throw UsageError("collect_rollout: forced_g must be 0 or 1");
  const bool wants_heads = !cfg.novelty_reward && cfg.fixed_potential == nullptr;
  const bool can_switch_on = wants_heads && (!cfg.forced_g || *cfg.forced_g == 1);
  if (can_switch_on) {
    if (potential == nullptr)
      throw UsageError("collect_rollout: shaping requires a potential net");
    if (magnitude_head == nullptr)
      throw UsageError("collect_rollout: shaping requires a magnitude head");
    if (magnitude_head->n_actions != potential->m())
      throw UsageError(
          "collect_rollout: magnitude head arity does not match the "
          "potential net");
    if (!cfg.forced_g && switch_head == nullptr)
      throw UsageError("collect_rollout: learned switching requires a switch head");
  }
}

}  // namespace

std::vector<TransitionRecord> collect_rollout(
    env::EnvInstance& env, PolicyHead& controller, PolicyHead* switch_head,
    PolicyHead* magnitude_head, const shaping::PotentialNet* potential,
    const novelty::NoveltyModel* novelty, const RolloutConfig& cfg,
    std::mt19937_64& rng, EpisodeState& episode, const RolloutHooks& hooks) {
  validate_config(cfg, switch_head, magnitude_head, potential, novelty);
  const bool direct_aux = cfg.novelty_reward || cfg.fixed_potential != nullptr;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<TransitionRecord> out;
  out.reserve(static_cast<size_t>(cfg.rollout_len));

  while (static_cast<int>(out.size()) < cfg.rollout_len) {
    if (!episode.valid) {
      episode = EpisodeState{};
      episode.obs = env.reset().v;
      episode.valid = true;
    }
    const Vec s = episode.obs;
    const int cell = env.current_cell();
    const double bonus = novelty != nullptr ? novelty->bonus(s) : 0.0;

    // Indicator for this step.
    int g = 0;
    double logp_switch = 0.0;
    bool has_switch = false;
    if (direct_aux) {
      g = 1;
    } else if (cfg.forced_g) {
      g = *cfg.forced_g;
    } else if (cfg.switch_mode == SwitchMode::kPolicy || episode.switch_on == 0) {
      const ActionSample gs = act(*switch_head, s, rng);
      g = gs.action;
      logp_switch = gs.logprob;
      has_switch = true;
    } else {
      // Option mode with an active option: keep running while the gated
      // bonus increase stays positive, otherwise hand the decision back.
      const double w = unit(rng) < cfg.option_gate_prob ? 1.0 : 0.0;
      const double d_bonus =
          episode.has_prev_bonus ? bonus - episode.prev_bonus : 0.0;
      if (w * d_bonus > 0.0) {
        g = 1;
      } else {
        episode.switch_on = 0;
        const ActionSample gs = act(*switch_head, s, rng);
        g = gs.action;
        logp_switch = gs.logprob;
        has_switch = true;
      }
    }

    double cost = 0.0;
    if (!direct_aux && episode.switch_on == 0 && g == 1) {
      cost = cfg.switch_cost;
      ++episode.switch_count;
    }

    // The magnitude action owned by this time index.
    int a2 = 0;
    double logp_mag = 0.0;
    bool has_mag = false;
    if (!direct_aux && g == 1) {
      const ActionSample ms = act(*magnitude_head, s, rng);
      a2 = ms.action + 1;
      logp_mag = ms.logprob;
      has_mag = true;
    }

    // The previous on step was waiting for this step's shaper action.
    if (episode.open) {
      TransitionRecord done_rec = std::move(*episode.open);
      episode.open.reset();
      done_rec.r_i =
          shaping_reward(*potential, done_rec.s, done_rec.a2, s, a2,
                         cfg.shaping_gamma, cfg.direction, false);
      episode.shaped_return += done_rec.r + done_rec.r_i;
      out.push_back(std::move(done_rec));
    }

    const ActionSample as = act(controller, s, rng, cfg.temperature);
    const env::StepResult sr = env.step(as.action);
    const bool ended = sr.done || sr.truncated;

    TransitionRecord rec;
    rec.s = s;
    rec.s_next = sr.obs.v;
    rec.a = as.action;
    rec.g = g;
    rec.a2 = a2;
    rec.r = sr.reward;
    rec.L = bonus;
    rec.c = cost;
    rec.done = sr.done;
    rec.truncated = sr.truncated;
    rec.logp_ctrl = as.logprob;
    rec.logp_switch = logp_switch;
    rec.logp_mag = logp_mag;
    rec.has_switch = has_switch;
    rec.has_mag = has_mag;
    rec.cell = cell;
    rec.cell_next = sr.cell;
    rec.goal_id = sr.goal_id;

    episode.extrinsic_return += sr.raw_reward;
    episode.bonus_sum += bonus;
    episode.steps += 1;
    episode.prev_bonus = bonus;
    episode.has_prev_bonus = true;
    episode.switch_on = g;
    episode.obs = rec.s_next;

    if (cfg.novelty_reward) {
      rec.r_i = ended ? 0.0 : novelty->bonus(rec.s_next);
      episode.shaped_return += rec.r + rec.r_i;
      out.push_back(std::move(rec));
    } else if (cfg.fixed_potential != nullptr) {
      if (cell < 0 || (!ended && sr.cell < 0))
        throw UsageError("collect_rollout: fixed_potential needs a grid env");
      const auto& table = *cfg.fixed_potential;
      if (cell >= static_cast<int>(table.size()) ||
          (!ended && sr.cell >= static_cast<int>(table.size())))
        throw UsageError("collect_rollout: fixed_potential table too small");
      const double phi_s = table[static_cast<size_t>(cell)];
      const double phi_next = ended ? 0.0 : table[static_cast<size_t>(sr.cell)];
      rec.r_i = cfg.direction == shaping::Direction::kForward
                    ? cfg.shaping_gamma * phi_next - phi_s
                    : phi_next - phi_s / cfg.shaping_gamma;
      episode.shaped_return += rec.r + rec.r_i;
      out.push_back(std::move(rec));
    } else if (g == 1 && !ended) {
      // Shaping reward needs the next step's shaper action; hold the record.
      episode.open = std::move(rec);
    } else {
      if (g == 1) {
        // Episode boundary: the next shaper action is null.
        rec.r_i = shaping_reward(*potential, rec.s, rec.a2, rec.s_next, 0,
                                 cfg.shaping_gamma, cfg.direction, sr.done);
      }
      episode.shaped_return += rec.r + rec.r_i * rec.g;
      out.push_back(std::move(rec));
    }

    if (ended) {
      if (hooks.on_episode_end) hooks.on_episode_end(episode, sr.goal_id);
      episode.valid = false;
    }
  }
  return out;
}

}  // namespace rosa::agents
