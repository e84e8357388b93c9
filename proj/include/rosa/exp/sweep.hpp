#pragma once

#include <string>
#include <vector>

namespace rosa::exp {

/// Expands a glob pattern (*, ?, character classes; the pattern's directory
/// part is taken literally) into sorted matching paths.
std::vector<std::string> expand_glob(const std::string& pattern);

/// Runs every config in parallel with `jobs` worker threads. Work is split
/// at seed granularity, so a single run's seeds can progress concurrently
/// while each seed itself stays single threaded and deterministic. Writes
/// summary.csv into out_dir and returns the severest per-seed exit code.
int run_sweep(const std::vector<std::string>& config_paths, int jobs,
              const std::string& summary_dir = "runs");

}  // namespace rosa::exp
