#include "rosa/exp/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace rosa::exp {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
  if (!j.is_object())
    throw UsageError("config: " + where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (known.count(key) == 0)
      throw UsageError("config: unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError("config: bad value for '" + key + "'");
  }
}

void parse_ppo(const json& j, agents::PpoConfig& ppo) {
  reject_unknown_keys(j,
                      {"lr", "gamma", "lam", "clip_eps", "ent_coef", "vf_coef",
                       "max_grad_norm", "epochs", "minibatches", "rollout_len",
                       "normalize_advantages", "temperature"},
                      "ppo");
  ppo.lr = get_or(j, "lr", ppo.lr);
  ppo.gamma = get_or(j, "gamma", ppo.gamma);
  ppo.lam = get_or(j, "lam", ppo.lam);
  ppo.clip_eps = get_or(j, "clip_eps", ppo.clip_eps);
  ppo.ent_coef = get_or(j, "ent_coef", ppo.ent_coef);
  ppo.vf_coef = get_or(j, "vf_coef", ppo.vf_coef);
  ppo.max_grad_norm = get_or(j, "max_grad_norm", ppo.max_grad_norm);
  ppo.epochs = get_or(j, "epochs", ppo.epochs);
  ppo.minibatches = get_or(j, "minibatches", ppo.minibatches);
  ppo.rollout_len = get_or(j, "rollout_len", ppo.rollout_len);
  ppo.normalize_advantages =
      get_or(j, "normalize_advantages", ppo.normalize_advantages);
  ppo.temperature = get_or(j, "temperature", ppo.temperature);
}

void parse_shaping(const json& j, agents::TrainerConfig& tc) {
  reject_unknown_keys(j,
                      {"gamma", "m", "direction", "switch_cost", "switch_mode",
                       "option_gate_prob", "shaper_reward", "potential_hidden"},
                      "shaping");
  tc.shaping_gamma = get_or(j, "gamma", tc.shaping_gamma);
  tc.shaper_m = get_or(j, "m", tc.shaper_m);
  const std::string dir = get_or<std::string>(j, "direction", "forward");
  if (dir == "forward") {
    tc.direction = shaping::Direction::kForward;
  } else if (dir == "backward") {
    tc.direction = shaping::Direction::kBackward;
  } else {
    throw UsageError("config: direction must be forward or backward");
  }
  tc.switch_cost = get_or(j, "switch_cost", tc.switch_cost);
  const std::string mode = get_or<std::string>(j, "switch_mode", "policy");
  if (mode == "policy") {
    tc.switch_mode = agents::SwitchMode::kPolicy;
  } else if (mode == "option") {
    tc.switch_mode = agents::SwitchMode::kOption;
  } else {
    throw UsageError("config: switch_mode must be policy or option");
  }
  tc.option_gate_prob = get_or(j, "option_gate_prob", tc.option_gate_prob);
  const std::string sr = get_or<std::string>(j, "shaper_reward", "hatted");
  if (sr == "hatted") {
    tc.shaper_reward = agents::ShaperRewardMode::kHatted;
  } else if (sr == "reduced") {
    tc.shaper_reward = agents::ShaperRewardMode::kReduced;
  } else {
    throw UsageError("config: shaper_reward must be hatted or reduced");
  }
  tc.potential_hidden =
      get_or(j, "potential_hidden", tc.potential_hidden);
}

void parse_novelty(const json& j, agents::TrainerConfig& tc) {
  reject_unknown_keys(j, {"k", "hidden", "lr"}, "novelty");
  tc.novelty_k = get_or(j, "k", tc.novelty_k);
  tc.novelty_hidden = get_or(j, "hidden", tc.novelty_hidden);
  tc.novelty_lr = get_or(j, "lr", tc.novelty_lr);
}

void parse_cartpole(const json& j, env::CartpoleParams& cp) {
  reject_unknown_keys(j,
                      {"gravity", "masscart", "masspole", "length",
                       "force_mag", "tau", "theta_threshold_deg",
                       "x_threshold", "max_steps"},
                      "cartpole");
  cp.gravity = get_or(j, "gravity", cp.gravity);
  cp.masscart = get_or(j, "masscart", cp.masscart);
  cp.masspole = get_or(j, "masspole", cp.masspole);
  cp.length = get_or(j, "length", cp.length);
  cp.force_mag = get_or(j, "force_mag", cp.force_mag);
  cp.tau = get_or(j, "tau", cp.tau);
  cp.theta_threshold_deg = get_or(j, "theta_threshold_deg",
                                  cp.theta_threshold_deg);
  cp.x_threshold = get_or(j, "x_threshold", cp.x_threshold);
  cp.max_steps = get_or(j, "max_steps", cp.max_steps);
}

const std::set<std::string> kEnvKinds = {"two_goal", "subgoal", "red_herring",
                                         "corridor", "cartpole"};

}  // namespace

void RunConfig::validate() const {
  if (name.empty()) throw UsageError("config: name must not be empty");
  if (kEnvKinds.count(env_kind) == 0)
    throw UsageError(
        "config: env.kind must be one of two_goal, subgoal, red_herring, "
        "corridor, cartpole");
  if (seeds.empty()) throw UsageError("config: seeds must not be empty");
  if (out_dir.empty()) throw UsageError("config: out must not be empty");
  if (env_kind == "cartpole" && !layout_path.empty())
    throw UsageError("config: cartpole takes no layout file");
  trainer.validate();
  if (trainer.mode == agents::TrainMode::kPbrsFixed) {
    if (potential_table.empty())
      throw UsageError(
          "config: pbrs_fixed needs potential_table (a file path or "
          "\"auto_bfs\")");
    if (env_kind == "cartpole")
      throw UsageError("config: pbrs_fixed needs a grid environment");
    if (pbrs_scale <= 0.0)
      throw UsageError("config: pbrs_scale must be positive");
  } else if (!potential_table.empty()) {
    throw UsageError("config: potential_table is only valid for pbrs_fixed");
  }
}

RunConfig parse_run_config(const json& j) {
  reject_unknown_keys(j,
                      {"name", "env", "mode", "seed", "seeds", "max_episodes",
                       "max_env_steps", "ppo", "shaping", "novelty", "hidden",
                       "potential_table", "pbrs_scale", "out"},
                      "top level");
  RunConfig cfg;
  cfg.name = get_or<std::string>(j, "name", "run");

  if (!j.contains("env")) throw UsageError("config: missing env");
  const json& je = j.at("env");
  reject_unknown_keys(je, {"kind", "layout", "cartpole"}, "env");
  cfg.env_kind = get_or<std::string>(je, "kind", "");
  cfg.layout_path = get_or<std::string>(je, "layout", "");
  if (je.contains("cartpole")) parse_cartpole(je.at("cartpole"), cfg.cartpole);

  cfg.trainer.mode =
      agents::parse_train_mode(get_or<std::string>(j, "mode", "rosa"));
  if (j.contains("seed") && j.contains("seeds"))
    throw UsageError("config: give either seed or seeds, not both");
  if (j.contains("seed")) {
    cfg.seeds = {get_or<uint64_t>(j, "seed", 1)};
  } else if (j.contains("seeds")) {
    cfg.seeds = get_or(j, "seeds", cfg.seeds);
    if (cfg.seeds.empty()) throw UsageError("config: seeds must not be empty");
  }
  cfg.trainer.max_episodes =
      get_or<long>(j, "max_episodes", cfg.trainer.max_episodes);
  cfg.trainer.max_env_steps =
      get_or<long>(j, "max_env_steps", cfg.trainer.max_env_steps);
  if (j.contains("ppo")) parse_ppo(j.at("ppo"), cfg.trainer.ppo);
  if (j.contains("shaping")) parse_shaping(j.at("shaping"), cfg.trainer);
  if (j.contains("novelty")) parse_novelty(j.at("novelty"), cfg.trainer);
  cfg.trainer.hidden = get_or(j, "hidden", cfg.trainer.hidden);
  cfg.potential_table = get_or<std::string>(j, "potential_table", "");
  cfg.pbrs_scale = get_or(j, "pbrs_scale", cfg.pbrs_scale);
  cfg.out_dir = get_or<std::string>(j, "out", "runs/" + cfg.name);
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("config: " + path + " is not valid JSON: " + e.what());
  }
  try {
    return parse_run_config(j);
  } catch (UsageError& e) {
    throw UsageError(std::string(e.what()) + " (" + path + ")");
  }
}

json resolved_json(const RunConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["env"]["kind"] = cfg.env_kind;
  if (!cfg.layout_path.empty()) j["env"]["layout"] = cfg.layout_path;
  if (cfg.env_kind == "cartpole") {
    json cp;
    cp["gravity"] = cfg.cartpole.gravity;
    cp["masscart"] = cfg.cartpole.masscart;
    cp["masspole"] = cfg.cartpole.masspole;
    cp["length"] = cfg.cartpole.length;
    cp["force_mag"] = cfg.cartpole.force_mag;
    cp["tau"] = cfg.cartpole.tau;
    cp["theta_threshold_deg"] = cfg.cartpole.theta_threshold_deg;
    cp["x_threshold"] = cfg.cartpole.x_threshold;
    cp["max_steps"] = cfg.cartpole.max_steps;
    j["env"]["cartpole"] = cp;
  }
  j["mode"] = agents::train_mode_name(cfg.trainer.mode);
  j["seeds"] = cfg.seeds;
  j["max_episodes"] = cfg.trainer.max_episodes;
  j["max_env_steps"] = cfg.trainer.max_env_steps;
  const agents::PpoConfig& p = cfg.trainer.ppo;
  j["ppo"] = {{"lr", p.lr},
              {"gamma", p.gamma},
              {"lam", p.lam},
              {"clip_eps", p.clip_eps},
              {"ent_coef", p.ent_coef},
              {"vf_coef", p.vf_coef},
              {"max_grad_norm", p.max_grad_norm},
              {"epochs", p.epochs},
              {"minibatches", p.minibatches},
              {"rollout_len", p.rollout_len},
              {"normalize_advantages", p.normalize_advantages},
              {"temperature", p.temperature}};
  const agents::TrainerConfig& t = cfg.trainer;
  j["shaping"] = {
      {"gamma", t.shaping_gamma},
      {"m", t.shaper_m},
      {"direction",
       t.direction == shaping::Direction::kForward ? "forward" : "backward"},
      {"switch_cost", t.switch_cost},
      {"switch_mode",
       t.switch_mode == agents::SwitchMode::kPolicy ? "policy" : "option"},
      {"option_gate_prob", t.option_gate_prob},
      {"shaper_reward",
       t.shaper_reward == agents::ShaperRewardMode::kHatted ? "hatted"
                                                            : "reduced"},
      {"potential_hidden", t.potential_hidden}};
  j["novelty"] = {{"k", t.novelty_k}, {"hidden", t.novelty_hidden},
                  {"lr", t.novelty_lr}};
  j["hidden"] = t.hidden;
  if (!cfg.potential_table.empty()) {
    j["potential_table"] = cfg.potential_table;
    j["pbrs_scale"] = cfg.pbrs_scale;
  }
  j["out"] = cfg.out_dir;
  return j;
}

std::unique_ptr<env::EnvInstance> make_env(const RunConfig& cfg) {
  std::optional<env::GridSpec> custom;
  if (!cfg.layout_path.empty())
    custom = env::load_layout_file(cfg.layout_path);
  if (cfg.env_kind == "two_goal") return env::make_two_goal_maze(custom);
  if (cfg.env_kind == "subgoal") return env::make_subgoal_maze(custom);
  if (cfg.env_kind == "red_herring") return env::make_red_herring_maze(custom);
  if (cfg.env_kind == "corridor") return env::make_corridor_maze(custom);
  if (cfg.env_kind == "cartpole") return env::make_sparse_cartpole(cfg.cartpole);
  throw UsageError("config: unknown env kind '" + cfg.env_kind + "'");
}

std::vector<double> resolve_potential_table(const RunConfig& cfg,
                                            const env::GridSpec& grid) {
  if (cfg.potential_table.empty())
    throw UsageError("config: no potential_table configured");
  std::vector<double> table(static_cast<size_t>(grid.n_cells()), 0.0);
  if (cfg.potential_table == "auto_bfs") {
    // Potential climbs toward the highest-paying terminal; walls and
    // unreachable cells stay at zero.
    env::Cell best{-1, -1};
    double best_reward = -std::numeric_limits<double>::infinity();
    for (const auto& [cell, id] : grid.terminal_id) {
      const double reward = grid.terminal_reward.at(id);
      if (reward > best_reward) {
        best_reward = reward;
        best = cell;
      }
    }
    if (best.first < 0) throw UsageError("config: layout has no terminals");
    const std::vector<int> dist = grid.bfs_distances(best);
    for (size_t i = 0; i < table.size(); ++i)
      if (dist[i] >= 0) table[i] = -cfg.pbrs_scale * dist[i];
    return table;
  }
  std::ifstream in(cfg.potential_table);
  if (!in)
    throw UsageError("config: cannot open potential table " +
                     cfg.potential_table);
  for (size_t i = 0; i < table.size(); ++i) {
    if (!(in >> table[i]))
      throw UsageError("config: potential table " + cfg.potential_table +
                       " needs " + std::to_string(table.size()) + " values");
  }
  double extra;
  if (in >> extra)
    throw UsageError("config: potential table " + cfg.potential_table +
                     " has more values than grid cells");
  return table;
}

}  // namespace rosa::exp
