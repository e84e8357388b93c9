#include "rosa/exp/sweep.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "rosa/exp/metrics.hpp"
#include "rosa/exp/plot.hpp"
#include "rosa/exp/runner.hpp"

namespace rosa::exp {

namespace fs = std::filesystem;

std::vector<std::string> expand_glob(const std::string& pattern) {
  if (pattern.empty()) throw UsageError("sweep: empty glob pattern");
  const fs::path p(pattern);
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  const std::string leaf = p.filename().string();
  std::vector<std::string> out;
  if (leaf.find_first_of("*?[") == std::string::npos) {
    if (fs::is_regular_file(p)) out.push_back(p.string());
    return out;
  }
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (fnmatch(leaf.c_str(), name.c_str(), 0) == 0)
      out.push_back(entry.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct SweepTask {
  size_t config_index;
  uint64_t seed;
};

struct ConfigEntry {
  std::string path;
  RunConfig cfg;
  std::vector<SeedOutcome> outcomes;  // one per seed, in seed order
};

}  // namespace

int run_sweep(const std::vector<std::string>& config_paths, int jobs,
              const std::string& summary_dir) {
  if (config_paths.empty())
    throw UsageError("sweep: no config files matched");
  if (jobs < 1) throw UsageError("sweep: jobs must be >= 1");

  std::vector<ConfigEntry> entries;
  std::vector<SweepTask> tasks;
  for (const std::string& path : config_paths) {
    ConfigEntry entry;
    entry.path = path;
    entry.cfg = load_run_config(path);  // UsageError propagates: exit 2
    entry.outcomes.resize(entry.cfg.seeds.size());
    fs::create_directories(entry.cfg.out_dir);
    std::ofstream f(fs::path(entry.cfg.out_dir) / "config-resolved.json");
    if (!f)
      throw RuntimeFault("sweep: cannot write config-resolved.json for " +
                         path);
    f << resolved_json(entry.cfg).dump(2) << "\n";
    entries.push_back(std::move(entry));
  }
  for (size_t ci = 0; ci < entries.size(); ++ci)
    for (uint64_t seed : entries[ci].cfg.seeds)
      tasks.push_back({ci, seed});

  std::atomic<size_t> next{0};
  std::mutex io_mutex;
  const int workers = std::min<int>(jobs, static_cast<int>(tasks.size()));
  const auto worker = [&]() {
    while (true) {
      const size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const SweepTask& task = tasks[t];
      ConfigEntry& entry = entries[task.config_index];
      const SeedOutcome o =
          run_single_seed(entry.cfg, task.seed, entry.cfg.out_dir);
      const auto it = std::find(entry.cfg.seeds.begin(),
                                entry.cfg.seeds.end(), task.seed);
      entry.outcomes[static_cast<size_t>(
          std::distance(entry.cfg.seeds.begin(), it))] = o;
      std::lock_guard<std::mutex> lock(io_mutex);
      std::cout << "[rosa] " << entry.cfg.name << " seed " << o.seed << ": "
                << (o.exit_code == kExitOk ? "ok" : o.message) << "\n";
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();

  int exit_code = kExitOk;
  fs::create_directories(summary_dir);
  std::ofstream summary(fs::path(summary_dir) / "summary.csv");
  if (!summary) throw RuntimeFault("sweep: cannot write summary.csv");
  summary << "# schema=rosa.sweep.v1\n";
  summary << "name,mode,env,seeds,failures,mean_final_return,"
             "std_final_return,total_wall_ms\n";
  for (ConfigEntry& entry : entries) {
    // per-config post-processing: timings + combined plot
    std::vector<std::string> csvs;
    double wall = 0.0;
    int failures = 0;
    {
      std::ofstream t(fs::path(entry.cfg.out_dir) / "timings.csv");
      t << "# schema=rosa.timings.v1\n";
      t << "seed,wall_ms,episodes,env_steps\n";
      char buf[64];
      for (const SeedOutcome& o : entry.outcomes) {
        std::snprintf(buf, sizeof(buf), "%.3f", o.wall_ms);
        t << o.seed << ',' << buf << ',' << o.episodes << ',' << o.env_steps
          << '\n';
      }
    }
    std::vector<double> finals;
    for (const SeedOutcome& o : entry.outcomes) {
      exit_code = std::max(exit_code, o.exit_code);
      wall += o.wall_ms;
      if (o.exit_code == kExitOk) {
        csvs.push_back((fs::path(entry.cfg.out_dir) /
                        ("seed_" + std::to_string(o.seed)) / "metrics.csv")
                           .string());
        finals.push_back(o.mean_final_return);
      } else {
        ++failures;
      }
    }
    if (!csvs.empty()) {
      PlotOptions po;
      po.title = entry.cfg.name;
      emit_plot(csvs,
                (fs::path(entry.cfg.out_dir) / "plot.svg").string(), po);
    }
    double mean = 0.0, sd = 0.0;
    if (!finals.empty()) {
      for (double f : finals) mean += f;
      mean /= finals.size();
      for (double f : finals) sd += (f - mean) * (f - mean);
      sd = std::sqrt(sd / finals.size());
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", wall);
    summary << entry.cfg.name << ','
            << agents::train_mode_name(entry.cfg.trainer.mode) << ','
            << entry.cfg.env_kind << ',' << entry.cfg.seeds.size() << ','
            << failures << ',' << format_double(mean) << ','
            << format_double(sd) << ',' << buf << '\n';
  }
  return exit_code;
}

}  // namespace rosa::exp
