#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rosa/exp/config.hpp"
#include "rosa/exp/heatmap.hpp"
#include "rosa/exp/plot.hpp"
#include "rosa/exp/runner.hpp"
#include "rosa/exp/sweep.hpp"

namespace fs = std::filesystem;
using namespace rosa;

namespace {

int cmd_run(const std::string& config_path, std::optional<uint64_t> seed,
            const std::string& out_override) {
  exp::RunConfig cfg = exp::load_run_config(config_path);
  if (seed) cfg.seeds = {*seed};
  if (!out_override.empty()) cfg.out_dir = out_override;
  return exp::run_experiment(cfg);
}

int cmd_sweep(const std::vector<std::string>& globs, int jobs,
              const std::string& summary_dir) {
  std::vector<std::string> paths;
  for (const std::string& g : globs) {
    const std::vector<std::string> matched = exp::expand_glob(g);
    paths.insert(paths.end(), matched.begin(), matched.end());
  }
  if (paths.empty())
    throw UsageError("sweep: no config files matched the given patterns");
  return exp::run_sweep(paths, jobs, summary_dir);
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& out,
             const std::string& y_column, int smooth,
             const std::string& title) {
  exp::PlotOptions opts;
  opts.y_column = y_column;
  opts.smooth_window = smooth;
  opts.title = title;
  exp::emit_plot(inputs, out, opts);
  std::cout << "[rosa] wrote " << out << "\n";
  return exp::kExitOk;
}

exp::HeatmapAgg parse_agg(const std::string& name) {
  if (name == "sum") return exp::HeatmapAgg::kSum;
  if (name == "abs_sum") return exp::HeatmapAgg::kAbsSum;
  if (name == "mean") return exp::HeatmapAgg::kMean;
  throw UsageError("heatmap: agg must be sum, abs_sum or mean");
}

int cmd_heatmap(const std::string& run_dir, const std::string& agg_name) {
  const exp::HeatmapAgg agg = parse_agg(agg_name);
  // Accept either one seed directory holding heatmap.csv or a run directory
  // with seed_*/ subdirectories (merged across seeds).
  std::vector<std::string> sources;
  if (fs::is_regular_file(fs::path(run_dir) / "heatmap.csv")) {
    sources.push_back((fs::path(run_dir) / "heatmap.csv").string());
  } else if (fs::is_directory(run_dir)) {
    for (const auto& entry : fs::directory_iterator(run_dir)) {
      if (!entry.is_directory()) continue;
      if (entry.path().filename().string().rfind("seed_", 0) != 0) continue;
      const fs::path csv = entry.path() / "heatmap.csv";
      if (fs::is_regular_file(csv)) sources.push_back(csv.string());
    }
    std::sort(sources.begin(), sources.end());
  }
  if (sources.empty())
    throw UsageError("heatmap: no heatmap.csv under " + run_dir);

  exp::ShapingHeatmap merged = exp::ShapingHeatmap::load_csv(sources[0]);
  for (size_t i = 1; i < sources.size(); ++i)
    merged.merge(exp::ShapingHeatmap::load_csv(sources[i]));

  // find the layout for a wall overlay, if the run config is nearby
  const env::GridSpec* grid_ptr = nullptr;
  env::GridSpec grid;
  for (fs::path probe : {fs::path(run_dir), fs::path(run_dir).parent_path()}) {
    const fs::path cfg_path = probe / "config-resolved.json";
    if (!fs::is_regular_file(cfg_path)) continue;
    try {
      const exp::RunConfig cfg = exp::load_run_config(cfg_path.string());
      const auto env = exp::make_env(cfg);
      if (env->grid() != nullptr) {
        grid = *env->grid();
        grid_ptr = &grid;
      }
    } catch (const std::exception&) {
      // overlay is cosmetic; render without it
    }
    break;
  }

  const fs::path out = fs::path(run_dir) / "heatmap.svg";
  std::ofstream f(out);
  if (!f) throw RuntimeFault("heatmap: cannot write " + out.string());
  f << exp::render_heatmap_svg(merged, agg, grid_ptr);
  std::cout << "[rosa] wrote " << out.string() << "\n";
  return exp::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Reward-shaping experiments: switching shaper, novelty bonuses and a "
      "tabular oracle. Set ROSA_LOG=1 (info) or 2 (debug) for progress "
      "output on stderr."};
  app.require_subcommand(1);

  std::string config_path, out_override;
  CLI::App* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("--config", config_path, "JSON experiment config")
      ->required();
  uint64_t seed_value = 0;
  CLI::Option* seed_opt =
      run->add_option("--seed", seed_value, "Run only this seed");
  run->add_option("--out", out_override, "Override the output directory");

  std::vector<std::string> globs;
  int jobs = 1;
  std::string summary_dir = "runs";
  CLI::App* sweep =
      app.add_subcommand("sweep", "Run several configs, seeds in parallel");
  sweep->add_option("--glob", globs, "Config file glob(s)")->required();
  sweep->add_option("-j,--jobs", jobs, "Worker threads");
  sweep->add_option("--summary-dir", summary_dir,
                    "Directory for summary.csv");

  std::string instances_dir;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "Check solver properties on tabular instances");
  oracle->add_option("--instances", instances_dir, "Directory of .mg files")
      ->required();

  std::vector<std::string> plot_inputs;
  std::string plot_out, y_column = "extrinsic_return", title;
  int smooth = 1;
  CLI::App* plot = app.add_subcommand("plot", "Learning curve SVG from CSVs");
  plot->add_option("--in", plot_inputs, "Per-seed metrics.csv files")
      ->required();
  plot->add_option("--out", plot_out, "Output SVG path")->required();
  plot->add_option("--y", y_column, "Metrics column to plot");
  plot->add_option("--smooth", smooth, "Trailing moving-average window");
  plot->add_option("--title", title, "Plot title");

  std::string heat_dir, agg = "sum";
  CLI::App* heatmap = app.add_subcommand(
      "heatmap", "Render the auxiliary-reward heatmap of a run");
  heatmap->add_option("--run", heat_dir, "Run or seed directory")->required();
  heatmap->add_option("--agg", agg, "sum, abs_sum or mean");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exp::kExitOk : exp::kExitUsage;
  }

  try {
    if (*run)
      return cmd_run(config_path,
                     seed_opt->count() > 0
                         ? std::optional<uint64_t>(seed_value)
                         : std::nullopt,
                     out_override);
    if (*sweep) return cmd_sweep(globs, jobs, summary_dir);
    if (*oracle) return exp::run_oracle_suite(instances_dir, std::cout);
    if (*plot) return cmd_plot(plot_inputs, plot_out, y_column, smooth, title);
    if (*heatmap) return cmd_heatmap(heat_dir, agg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exp::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "fault: " << e.what() << "\n";
    return exp::kExitFault;
  }
  return exp::kExitUsage;
}
