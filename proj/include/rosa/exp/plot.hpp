#pragma once

#include <string>
#include <vector>

namespace rosa::exp {

struct PlotOptions {
  std::string y_column = "extrinsic_return";
  std::string title;
  int smooth_window = 1;  // 1 = raw values, >1 = trailing moving average
  int width = 720;
  int height = 420;
};

/// Learning curve over per-seed metrics CSVs: per-episode mean across seeds
/// with a +-1 population-std band. Series are aligned on episode index and
/// truncated to the shortest run.
std::string render_learning_curve_svg(const std::vector<std::string>& csvs,
                                      const PlotOptions& opts = {});

void emit_plot(const std::vector<std::string>& csvs,
               const std::string& out_svg, const PlotOptions& opts = {});

}  // namespace rosa::exp
