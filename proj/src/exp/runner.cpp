#include "rosa/exp/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "json.hpp"
#include "rosa/dp/solver.hpp"
#include "rosa/exp/heatmap.hpp"
#include "rosa/exp/metrics.hpp"
#include "rosa/exp/plot.hpp"

namespace rosa::exp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json ppo_stats_json(const agents::PpoStats& st) {
  json j;
  j["policy_loss"] = st.policy_loss;
  j["value_loss"] = st.value_loss;
  j["entropy"] = st.entropy;
  j["clip_fraction"] = st.clip_fraction;
  j["approx_kl"] = st.approx_kl;
  j["minibatches"] = st.minibatches;
  return j;
}

}  // namespace

SeedOutcome run_single_seed(const RunConfig& cfg, uint64_t seed,
                            const std::string& run_dir) {
  SeedOutcome outcome;
  outcome.seed = seed;
  const fs::path seed_dir =
      fs::path(run_dir) / ("seed_" + std::to_string(seed));
  std::unique_ptr<env::EnvInstance> env;
  std::unique_ptr<agents::Trainer> trainer;
  try {
    fs::create_directories(seed_dir);
    env = make_env(cfg);
    agents::TrainerConfig tc = cfg.trainer;
    if (tc.mode == agents::TrainMode::kPbrsFixed) {
      const env::GridSpec* grid = env->grid();
      if (grid == nullptr)
        throw UsageError("pbrs_fixed needs a grid environment");
      tc.fixed_potential = resolve_potential_table(cfg, *grid);
    }
    trainer = std::make_unique<agents::Trainer>(*env, tc, seed);

    MetricsWriter metrics((seed_dir / "metrics.csv").string());
    std::ofstream events(seed_dir / "events.jsonl");
    if (!events)
      throw RuntimeFault("cannot write " + (seed_dir / "events.jsonl").string());
    std::optional<ShapingHeatmap> heat;
    if (const env::GridSpec* grid = env->grid())
      heat.emplace(grid->width, grid->height);

    {
      json j;
      j["type"] = "run_start";
      j["name"] = cfg.name;
      j["mode"] = agents::train_mode_name(cfg.trainer.mode);
      j["env"] = cfg.env_kind;
      j["seed"] = seed;
      events << j.dump() << "\n";
    }
    log_info("seed " + std::to_string(seed) + " starting (" + cfg.name + ")");

    std::vector<double> episode_returns;
    agents::TrainerHooks hooks;
    hooks.on_episode = [&](const agents::MetricsRow& row) {
      metrics.write(row);
      episode_returns.push_back(row.extrinsic_return);
    };
    hooks.on_update = [&](const agents::TrainStats& ts) {
      json j;
      j["type"] = "update";
      j["update"] = ts.update_index;
      j["records"] = ts.records;
      j["rnd_loss"] = ts.rnd_loss;
      j["controller"] = ppo_stats_json(ts.controller);
      j["switch"] = ppo_stats_json(ts.switch_head);
      j["magnitude"] = ppo_stats_json(ts.magnitude);
      events << j.dump() << "\n";
    };
    hooks.on_records =
        [&](const std::vector<agents::TransitionRecord>& recs) {
          if (heat) heat->add_batch(recs);
        };

    const auto t0 = std::chrono::steady_clock::now();
    trainer->run(hooks);
    const auto t1 = std::chrono::steady_clock::now();
    outcome.wall_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();

    trainer->save_checkpoint((seed_dir / "checkpoint").string());
    if (heat) {
      heat->save_csv((seed_dir / "heatmap.csv").string());
      std::ofstream svg(seed_dir / "heatmap.svg");
      if (svg)
        svg << render_heatmap_svg(*heat, HeatmapAgg::kSum, env->grid());
    }
    outcome.episodes = trainer->episodes();
    outcome.env_steps = trainer->env_steps();
    if (!episode_returns.empty()) {
      const size_t window =
          std::max<size_t>(1, episode_returns.size() / 5);
      double acc = 0.0;
      for (size_t i = episode_returns.size() - window;
           i < episode_returns.size(); ++i)
        acc += episode_returns[i];
      outcome.mean_final_return = acc / static_cast<double>(window);
    }
    {
      json j;
      j["type"] = "run_end";
      j["episodes"] = outcome.episodes;
      j["env_steps"] = outcome.env_steps;
      j["mean_final_return"] = outcome.mean_final_return;
      events << j.dump() << "\n";
    }
    log_info("seed " + std::to_string(seed) + " done: " +
             std::to_string(outcome.episodes) + " episodes");
  } catch (const UsageError& e) {
    outcome.exit_code = kExitUsage;
    outcome.message = e.what();
  } catch (const std::exception& e) {
    outcome.exit_code = kExitFault;
    outcome.message = e.what();
    if (trainer != nullptr) {
      try {
        trainer->save_checkpoint((seed_dir / "checkpoint_fault").string());
      } catch (...) {
        // the fault report matters more than the rescue checkpoint
      }
    }
  }
  return outcome;
}

int run_experiment(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  {
    std::ofstream f(fs::path(cfg.out_dir) / "config-resolved.json");
    if (!f)
      throw RuntimeFault("cannot write config-resolved.json in " +
                         cfg.out_dir);
    f << resolved_json(cfg).dump(2) << "\n";
  }

  std::vector<SeedOutcome> outcomes;
  for (uint64_t seed : cfg.seeds)
    outcomes.push_back(run_single_seed(cfg, seed, cfg.out_dir));

  {
    std::ofstream t(fs::path(cfg.out_dir) / "timings.csv");
    t << "# schema=rosa.timings.v1\n";
    t << "seed,wall_ms,episodes,env_steps\n";
    char buf[64];
    for (const SeedOutcome& o : outcomes) {
      std::snprintf(buf, sizeof(buf), "%.3f", o.wall_ms);
      t << o.seed << ',' << buf << ',' << o.episodes << ',' << o.env_steps
        << '\n';
    }
  }

  std::vector<std::string> csvs;
  for (const SeedOutcome& o : outcomes)
    if (o.exit_code == kExitOk)
      csvs.push_back((fs::path(cfg.out_dir) /
                      ("seed_" + std::to_string(o.seed)) / "metrics.csv")
                         .string());
  if (!csvs.empty()) {
    PlotOptions po;
    po.title = cfg.name + " (" + agents::train_mode_name(cfg.trainer.mode) +
               ")";
    emit_plot(csvs, (fs::path(cfg.out_dir) / "plot.svg").string(), po);
  }

  int exit_code = kExitOk;
  for (const SeedOutcome& o : outcomes) {
    if (o.exit_code == kExitOk) {
      std::cout << "[rosa] seed " << o.seed << ": ok, " << o.episodes
                << " episodes, " << o.env_steps
                << " env steps, mean final return "
                << format_double(o.mean_final_return) << "\n";
    } else {
      std::cout << "[rosa] seed " << o.seed << ": "
                << (o.exit_code == kExitUsage ? "config error" : "fault")
                << ": " << o.message << "\n";
    }
    exit_code = std::max(exit_code, o.exit_code);
  }
  return exit_code;
}

namespace {

struct PropResult {
  std::string name;
  bool pass = true;
  std::string detail;
};

void check(std::vector<PropResult>& props, const std::string& name, bool pass,
           const std::string& detail = "") {
  props.push_back({name, pass, detail});
}

std::vector<PropResult> oracle_properties(const dp::TabularMG& mg,
                                          uint64_t idx) {
  using dp::AugValue;
  std::vector<PropResult> props;

  mg.validate();
  check(props, "valid", true);

  const dp::ValueIterationResult vi = dp::value_iterate(mg, 1e-10);
  const AugValue& V = vi.value;
  const AugValue TV = dp::bellman_op(mg, V);
  check(props, "fixed_point", TV.sup_dist(V) < 1e-9,
        "residual " + format_double(TV.sup_dist(V)));

  double sym = 0.0;
  for (int s = 0; s < mg.n_states; ++s)
    sym = std::max(sym, std::abs(V.at(s, 0) - V.at(s, 1)));
  check(props, "slice_symmetry", sym < 1e-8, "gap " + format_double(sym));

  {
    bool ok = true;
    std::string detail;
    for (int s = 0; s < mg.n_states && ok; ++s) {
      const double margin = mg.max_phi(s) + mg.switch_cost;
      for (int i = 0; i < 2 && ok; ++i) {
        const int rule = dp::switch_rule(mg, V, s, i);
        const double gap = dp::intervention_max(mg, V, s, i) -
                           dp::continuation_max(mg, V, s, i);
        if (std::abs(gap - margin) > 1e-8) {
          ok = false;
          detail = "branch gap disagrees with the profitability margin at s=" +
                   std::to_string(s);
        } else if (margin > 1e-9 && rule != 1) {
          ok = false;
          detail = "profitable switch not taken at s=" + std::to_string(s);
        } else if (margin < -1e-9 && rule != 0) {
          ok = false;
          detail = "unprofitable switch taken at s=" + std::to_string(s);
        }
      }
      const int r0 = dp::switch_rule(mg, V, s, 0);
      const int r1 = dp::switch_rule(mg, V, s, 1);
      if (ok && r0 != r1) {
        ok = false;
        detail = "rule depends on the indicator at s=" + std::to_string(s);
      }
    }
    check(props, "switch_rule", ok, detail);
  }

  {
    dp::TabularMG blocked = mg;
    blocked.switch_cost = -1e6;
    const AugValue Vb = dp::value_iterate(blocked, 1e-10).value;
    const dp::MdpSolution plain = dp::solve_mdp(mg.P, mg.R, mg.gamma);
    double gap = 0.0;
    for (int s = 0; s < mg.n_states; ++s)
      for (int i = 0; i < 2; ++i)
        gap = std::max(gap, std::abs(Vb.at(s, i) - plain.v[s]));
    check(props, "prohibitive_cost", gap < 1e-8, "gap " + format_double(gap));
  }

  {
    double best_margin = 0.0;
    for (int s = 0; s < mg.n_states; ++s)
      best_margin = std::max(best_margin, mg.max_phi(s) + mg.switch_cost);
    const double bound =
        (mg.max_abs_r() + best_margin) / (1.0 - mg.gamma) + 1e-9;
    check(props, "value_bound", V.sup_norm() <= bound,
          "||V|| = " + format_double(V.sup_norm()) + ", bound " +
              format_double(bound));
  }

  {
    std::mt19937_64 rng = make_rng(0x6f7261ull, idx);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    bool contraction = true, monotone = true;
    for (int trial = 0; trial < 20; ++trial) {
      AugValue a(mg.n_states), b(mg.n_states);
      for (double& x : a.v) x = u(rng);
      for (double& x : b.v) x = u(rng);
      const AugValue Ta = dp::bellman_op(mg, a);
      const AugValue Tb = dp::bellman_op(mg, b);
      if (Ta.sup_dist(Tb) > mg.gamma * a.sup_dist(b) + 1e-12)
        contraction = false;
      AugValue lohi = a;  // lo = a, hi = a + |b| so lo <= hi elementwise
      for (size_t k = 0; k < lohi.v.size(); ++k)
        lohi.v[k] = a.v[k] + std::abs(b.v[k]);
      const AugValue Tlo = Ta;
      const AugValue Thi = dp::bellman_op(mg, lohi);
      for (size_t k = 0; k < Tlo.v.size(); ++k)
        if (Tlo.v[k] > Thi.v[k] + 1e-12) monotone = false;
    }
    check(props, "contraction", contraction);
    check(props, "monotonicity", monotone);
  }

  {
    const double per_state = 2.0 * mg.n_actions * mg.n_shaper_actions;
    const double total =
        std::pow(per_state, 2.0 * mg.n_states);
    if (total <= 2e7) {
      const dp::BruteForceResult bf = dp::brute_force_solve(mg);
      const double gap = bf.value.sup_dist(V);
      check(props, "exhaustive_match", gap < 1e-8,
            "gap " + format_double(gap) + " over " +
                std::to_string(bf.policies_scanned) + " policies");
    } else {
      check(props, "exhaustive_match", true, "skipped (instance too large)");
    }
  }

  {
    const dp::InvarianceReport rep = dp::invariance_check(mg, 3, idx);
    const bool ok = rep.argmax_match && rep.max_value_gap < 1e-8 &&
                    rep.max_shift_gap < 1e-8;
    check(props, "shaping_invariance", ok,
          std::string(rep.argmax_match ? "" : "greedy sets changed; ") +
              "value gap " + format_double(rep.max_value_gap) +
              ", shift gap " + format_double(rep.max_shift_gap));
  }

  {
    const double worst = dp::stable_point_improvement(mg);
    check(props, "improvement_direction", worst >= -1e-8,
          "min gain " + format_double(worst));
  }

  return props;
}

}  // namespace

int run_oracle_suite(const std::string& dir, std::ostream& out) {
  if (!fs::is_directory(dir))
    throw UsageError("oracle: " + dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".mg")
      files.push_back(entry.path());
  if (files.empty())
    throw UsageError("oracle: no .mg instance files in " + dir);
  std::sort(files.begin(), files.end());

  int failures = 0;
  uint64_t idx = 0;
  for (const fs::path& file : files) {
    ++idx;
    std::vector<PropResult> props;
    std::string load_error;
    try {
      const dp::TabularMG mg = dp::TabularMG::load(file.string());
      props = oracle_properties(mg, idx);
    } catch (const std::exception& e) {
      load_error = e.what();
    }
    const std::string name = file.filename().string();
    if (!load_error.empty()) {
      ++failures;
      out << name << ": FAIL (" << load_error << ")\n";
      continue;
    }
    bool all = true;
    for (const PropResult& p : props) {
      if (!p.pass) {
        all = false;
        ++failures;
        out << name << ": FAIL " << p.name
            << (p.detail.empty() ? "" : " (" + p.detail + ")") << "\n";
      }
    }
    if (all) out << name << ": PASS (" << props.size() << " properties)\n";
  }
  out << (failures == 0 ? "all instances pass\n"
                        : std::to_string(failures) + " property failures\n");
  return failures == 0 ? kExitOk : kExitFault;
}

}  // namespace rosa::exp
