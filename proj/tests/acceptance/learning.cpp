#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "acceptance.hpp"
#include "rosa/agents/trainer.hpp"
#include "rosa/exp/config.hpp"
#include "rosa/exp/heatmap.hpp"
#include "rosa/exp/metrics.hpp"
#include "rosa/exp/runner.hpp"

namespace acceptance {

using namespace rosa;
namespace fs = std::filesystem;

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

// Shared desk-scale hyperparameters; modes differ only in the fields that
// define them so the comparisons stay like for like.
agents::TrainerConfig desk_config(long max_env_steps) {
  agents::TrainerConfig tc;
  tc.ppo.lr = 3e-3;
  tc.ppo.gamma = 0.99;
  tc.ppo.lam = 0.95;
  tc.ppo.ent_coef = 0.01;
  tc.ppo.rollout_len = 256;
  tc.ppo.epochs = 4;
  tc.ppo.minibatches = 4;
  tc.hidden = {32};
  tc.potential_hidden = {32};
  tc.novelty_hidden = {32};
  tc.novelty_k = 8;
  tc.novelty_lr = 1e-3;
  tc.shaping_gamma = 0.99;
  tc.switch_cost = -0.05;
  tc.max_episodes = 1000000;  // the step budget binds first
  tc.max_env_steps = max_env_steps;
  return tc;
}

struct SeedRun {
  std::vector<agents::MetricsRow> rows;
  std::optional<exp::ShapingHeatmap> heat;
  long switch_total = 0;
  bool fault = false;
  std::string message;
};

SeedRun run_seed(const std::string& env_kind, const agents::TrainerConfig& tc,
                 uint64_t seed) {
  SeedRun out;
  try {
    exp::RunConfig rc;
    rc.env_kind = env_kind;
    auto env = exp::make_env(rc);
    if (const env::GridSpec* grid = env->grid())
      out.heat.emplace(grid->width, grid->height);
    agents::Trainer trainer(*env, tc, seed);
    agents::TrainerHooks hooks;
    hooks.on_episode = [&](const agents::MetricsRow& row) {
      out.rows.push_back(row);
      out.switch_total += row.switch_count;
    };
    hooks.on_records = [&](const std::vector<agents::TransitionRecord>& recs) {
      if (out.heat) out.heat->add_batch(recs);
    };
    trainer.run(hooks);
  } catch (const std::exception& e) {
    out.fault = true;
    out.message = e.what();
  }
  return out;
}

// Seeds run concurrently (each run is single threaded and deterministic).
std::vector<SeedRun> run_seeds(const std::string& env_kind,
                               const agents::TrainerConfig& tc,
                               const std::vector<uint64_t>& seeds) {
  std::vector<SeedRun> out(seeds.size());
  std::atomic<size_t> next{0};
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const size_t workers = std::min<size_t>(hw, seeds.size());
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= seeds.size()) return;
      out[i] = run_seed(env_kind, tc, seeds[i]);
    }
  };
  std::vector<std::thread> pool;
  for (size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();
  return out;
}

const std::vector<uint64_t> kSeeds = {1, 2, 3, 4, 5};
constexpr long kTwoGoalBudget = 120000;

// Final-window arrival proportions of one run.
struct Arrivals {
  double p_opt = 0.0;
  double p_sub = 0.0;
};

Arrivals final_arrivals(const std::vector<agents::MetricsRow>& rows) {
  if (rows.empty()) return {};
  const exp::GoalStats stats = exp::goal_arrival_stats(rows, 50, 0, 1);
  return {stats.p_optimal.back(), stats.p_suboptimal.back()};
}

// Env steps consumed when the trailing-25-episode mean extrinsic return
// first exceeds the threshold; the full budget when it never does.
long crossing_steps(const std::vector<agents::MetricsRow>& rows,
                    double threshold, long budget) {
  const size_t window = 25;
  double acc = 0.0;
  for (size_t i = 0; i < rows.size(); ++i) {
    acc += rows[i].extrinsic_return;
    if (i >= window) acc -= rows[i - window].extrinsic_return;
    const size_t have = std::min(i + 1, window);
    if (have == window && acc / static_cast<double>(window) > threshold)
      return rows[i].env_steps;
  }
  return budget;
}

// The two-goal runs feed two criteria; collect them once.
const std::vector<SeedRun>& two_goal_runs(agents::TrainMode mode) {
  static std::vector<SeedRun> rosa, vanilla, no_switch;
  std::vector<SeedRun>* slot = nullptr;
  switch (mode) {
    case agents::TrainMode::kRosa: slot = &rosa; break;
    case agents::TrainMode::kVanilla: slot = &vanilla; break;
    case agents::TrainMode::kRosaNoSwitch: slot = &no_switch; break;
    default: throw UsageError("unexpected two-goal mode");
  }
  if (slot->empty()) {
    agents::TrainerConfig tc = desk_config(kTwoGoalBudget);
    tc.mode = mode;
    *slot = run_seeds("two_goal", tc, kSeeds);
  }
  return *slot;
}

Outcome two_goal_direction() {
  const std::vector<SeedRun>& rosa = two_goal_runs(agents::TrainMode::kRosa);
  const std::vector<SeedRun>& vanilla =
      two_goal_runs(agents::TrainMode::kVanilla);
  for (const SeedRun& run : rosa)
    if (run.fault) return {false, "fault: " + run.message};
  for (const SeedRun& run : vanilla)
    if (run.fault) return {false, "fault: " + run.message};

  double vanilla_opt = 0.0;
  for (const SeedRun& run : vanilla) vanilla_opt += final_arrivals(run.rows).p_opt;
  vanilla_opt /= static_cast<double>(vanilla.size());

  int satisfied = 0;
  std::ostringstream per_seed;
  for (const SeedRun& run : rosa) {
    const Arrivals a = final_arrivals(run.rows);
    if (a.p_opt > a.p_sub && a.p_opt > vanilla_opt) ++satisfied;
    per_seed << ' ' << num(a.p_opt) << '/' << num(a.p_sub);
  }
  return {satisfied >= 4,
          std::to_string(satisfied) +
              "/5 seeds with optimal>suboptimal arrivals (opt/sub:" +
              per_seed.str() + "), vanilla mean optimal " + num(vanilla_opt)};
}

Outcome herring_mass_direction() {
  agents::TrainerConfig tc = desk_config(50000);
  tc.mode = agents::TrainMode::kRosa;
  const std::vector<SeedRun> rosa = run_seeds("red_herring", tc, kSeeds);
  tc.mode = agents::TrainMode::kRndBonus;
  const std::vector<SeedRun> rnd = run_seeds("red_herring", tc, kSeeds);

  exp::RunConfig rc;
  rc.env_kind = "red_herring";
  const auto env = exp::make_env(rc);
  const env::GridSpec& grid = *env->grid();

  double rosa_ratio = 0.0, rnd_ratio = 0.0;
  for (const SeedRun& run : rosa) {
    if (run.fault) return {false, "fault: " + run.message};
    rosa_ratio += exp::herring_mass_ratio(*run.heat, grid);
  }
  for (const SeedRun& run : rnd) {
    if (run.fault) return {false, "fault: " + run.message};
    rnd_ratio += exp::herring_mass_ratio(*run.heat, grid);
  }
  rosa_ratio /= static_cast<double>(rosa.size());
  rnd_ratio /= static_cast<double>(rnd.size());
  return {rosa_ratio < rnd_ratio,
          "mean decoy-region mass share: switching " + num(rosa_ratio) +
              " vs novelty-bonus baseline " + num(rnd_ratio)};
}

Outcome switch_speed_ablation() {
  const std::vector<SeedRun>& rosa = two_goal_runs(agents::TrainMode::kRosa);
  const std::vector<SeedRun>& fixed =
      two_goal_runs(agents::TrainMode::kRosaNoSwitch);
  for (const SeedRun& run : fixed)
    if (run.fault) return {false, "fault: " + run.message};

  double rosa_steps = 0.0, fixed_steps = 0.0;
  for (const SeedRun& run : rosa)
    rosa_steps += crossing_steps(run.rows, 0.5, kTwoGoalBudget);
  for (const SeedRun& run : fixed)
    fixed_steps += crossing_steps(run.rows, 0.5, kTwoGoalBudget);
  rosa_steps /= static_cast<double>(rosa.size());
  fixed_steps /= static_cast<double>(fixed.size());
  return {rosa_steps < fixed_steps,
          "mean env steps to trailing return 0.5: switching " +
              num(rosa_steps) + " vs always-on " + num(fixed_steps)};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "";
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism_and_cartpole() {
  // byte-identical rerun of a full run directory
  const fs::path tmp = fs::temp_directory_path() / "rosa_acceptance_det";
  fs::remove_all(tmp);
  exp::RunConfig rc;
  rc.env_kind = "corridor";
  rc.trainer = desk_config(4000);
  rc.trainer.mode = agents::TrainMode::kRosa;
  rc.trainer.ppo.rollout_len = 128;
  const exp::SeedOutcome a = exp::run_single_seed(rc, 7, (tmp / "a").string());
  const exp::SeedOutcome b = exp::run_single_seed(rc, 7, (tmp / "b").string());
  const std::string ma = slurp(tmp / "a/seed_7/metrics.csv");
  const std::string mb = slurp(tmp / "b/seed_7/metrics.csv");
  fs::remove_all(tmp);
  if (a.exit_code != 0 || b.exit_code != 0)
    return {false, "rerun pair did not complete cleanly"};
  if (ma.empty() || ma != mb)
    return {false, "repeated run produced different metrics.csv bytes"};

  // sparse cartpole smoke under the switching mode
  const auto t0 = std::chrono::steady_clock::now();
  agents::TrainerConfig tc = desk_config(12000);
  tc.mode = agents::TrainMode::kRosa;
  const SeedRun pole = run_seed("cartpole", tc, 11);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (pole.fault) return {false, "cartpole fault: " + pole.message};
  if (secs > 300.0)
    return {false, "cartpole smoke exceeded its 300s budget"};
  if (pole.switch_total <= 0)
    return {false, "cartpole run recorded no switch activity"};
  return {true, "identical rerun bytes; cartpole " +
                    std::to_string(pole.rows.size()) + " episodes, " +
                    std::to_string(pole.switch_total) + " switches in " +
                    num(secs) + "s"};
}

}  // namespace

std::vector<Criterion> learning_criteria() {
  return {
      {8, "two-goal maze: switching agent favors the better goal", 600.0,
       two_goal_direction},
      {9, "red herring: switching spends less shaping mass on the decoy",
       600.0, herring_mass_direction},
      {10, "two-goal maze: switching reaches the return threshold first",
       600.0, switch_speed_ablation},
      {11, "byte-identical reruns and a cartpole smoke run", 600.0,
       determinism_and_cartpole},
  };
}

}  // namespace acceptance
