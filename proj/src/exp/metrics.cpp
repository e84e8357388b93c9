#include "rosa/exp/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "rosa/common.hpp"

namespace rosa::exp {

namespace {
constexpr const char* kSchema = "# schema=rosa.metrics.v1";
constexpr const char* kHeader =
    "episode,env_steps,extrinsic_return,shaped_return,switch_count,"
    "mean_bonus,goal_id";
}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

MetricsWriter::MetricsWriter(const std::string& path) : out_(path) {
  if (!out_) throw RuntimeFault("metrics: cannot write " + path);
  out_ << kSchema << "\n" << kHeader << "\n";
}

void MetricsWriter::write(const agents::MetricsRow& row) {
  out_ << row.episode << ',' << row.env_steps << ','
       << format_double(row.extrinsic_return) << ','
       << format_double(row.shaped_return) << ',' << row.switch_count << ','
       << format_double(row.mean_bonus) << ',' << row.goal_id << '\n';
}

std::vector<agents::MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("metrics: cannot open " + path);
  std::vector<agents::MetricsRow> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kHeader)
        throw UsageError("metrics: unexpected header in " + path);
      header_seen = true;
      continue;
    }
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 7)
      throw UsageError("metrics: malformed row in " + path + ": " + line);
    agents::MetricsRow row;
    try {
      row.episode = std::stol(fields[0]);
      row.env_steps = std::stol(fields[1]);
      row.extrinsic_return = std::stod(fields[2]);
      row.shaped_return = std::stod(fields[3]);
      row.switch_count = std::stoi(fields[4]);
      row.mean_bonus = std::stod(fields[5]);
      row.goal_id = std::stoi(fields[6]);
    } catch (const std::exception&) {
      throw UsageError("metrics: malformed row in " + path + ": " + line);
    }
    rows.push_back(row);
  }
  if (!header_seen) throw UsageError("metrics: no header in " + path);
  return rows;
}

GoalStats goal_arrival_stats(const std::vector<agents::MetricsRow>& rows,
                             int window, int optimal_id, int suboptimal_id) {
  if (window <= 0) throw UsageError("goal_arrival_stats: window must be > 0");
  if (optimal_id == suboptimal_id)
    throw UsageError("goal_arrival_stats: goal ids must differ");
  GoalStats stats;
  const size_t n = rows.size();
  stats.p_optimal.resize(n);
  stats.p_suboptimal.resize(n);
  stats.p_none.resize(n);
  long opt = 0, sub = 0, none = 0;
  const auto classify = [&](int goal_id) {
    if (goal_id == optimal_id) return &opt;
    if (goal_id == suboptimal_id) return &sub;
    return &none;
  };
  for (size_t i = 0; i < n; ++i) {
    ++*classify(rows[i].goal_id);
    if (i >= static_cast<size_t>(window)) --*classify(rows[i - window].goal_id);
    const double denom = std::min<size_t>(i + 1, window);
    stats.p_optimal[i] = opt / denom;
    stats.p_suboptimal[i] = sub / denom;
    stats.p_none[i] = none / denom;
  }
  return stats;
}

}  // namespace rosa::exp
