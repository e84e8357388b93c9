#pragma once

#include <string>
#include <vector>

#include "rosa/agents/rollout.hpp"
#include "rosa/env/layout.hpp"

namespace rosa::exp {

enum class HeatmapAgg { kMean, kSum, kAbsSum };

/// Per-cell aggregate of the auxiliary reward mass r_i * g deposited while
/// standing in each grid cell.
class ShapingHeatmap {
 public:
  ShapingHeatmap() = default;
  ShapingHeatmap(int width, int height);

  void add(const agents::TransitionRecord& rec);
  void add_batch(const std::vector<agents::TransitionRecord>& recs);
  /// Accumulates another map over the same grid (e.g. other seeds).
  void merge(const ShapingHeatmap& other);

  int width() const { return width_; }
  int height() const { return height_; }
  long total_count() const { return total_count_; }
  /// Signed total over all cells; equals the sum of r_i * g over every
  /// record fed in (conservation invariant for the sum aggregation).
  double total_mass() const;
  double total_abs_mass() const;

  std::vector<double> values(HeatmapAgg agg) const;

  const std::vector<double>& cell_sum() const { return sum_; }
  const std::vector<double>& cell_abs_sum() const { return abs_sum_; }
  const std::vector<long>& cell_count() const { return count_; }

  void save_csv(const std::string& path) const;
  static ShapingHeatmap load_csv(const std::string& path);

 private:
  int width_ = 0, height_ = 0;
  std::vector<double> sum_;
  std::vector<double> abs_sum_;
  std::vector<long> count_;
  long total_count_ = 0;
};

/// Share of the absolute auxiliary-reward mass spent inside the layout's
/// herring region. Returns 0 when no mass was deposited at all.
double herring_mass_ratio(const ShapingHeatmap& map, const env::GridSpec& grid);

/// Standalone SVG of the per-cell aggregate (one rect per cell, diverging
/// palette for signed values). Pass the layout to overlay walls when known.
std::string render_heatmap_svg(const ShapingHeatmap& map, HeatmapAgg agg,
                               const env::GridSpec* grid = nullptr);

}  // namespace rosa::exp
