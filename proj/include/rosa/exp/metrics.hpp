#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "rosa/agents/trainer.hpp"

namespace rosa::exp {

/// Episode metrics CSV. The first line is a schema comment so readers can
/// detect format drift; every value is written with round-trip precision so
/// identical runs produce byte-identical files.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& path);
  void write(const agents::MetricsRow& row);
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

std::vector<agents::MetricsRow> read_metrics_csv(const std::string& path);

/// Round-trip double formatting shared by the CSV writers (shortest form
/// preferred, full precision kept).
std::string format_double(double x);

struct GoalStats {
  std::vector<double> p_optimal;
  std::vector<double> p_suboptimal;
  std::vector<double> p_none;  // episode ended without reaching either goal
};

/// Rolling proportions of episodes ending at each goal over a trailing
/// window (shorter at the start of the run).
GoalStats goal_arrival_stats(const std::vector<agents::MetricsRow>& rows,
                             int window, int optimal_id, int suboptimal_id);

}  // namespace rosa::exp
