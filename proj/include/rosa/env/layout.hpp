#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace rosa::env {

using Cell = std::pair<int, int>;  // (row, col)

/// Static description of a gridworld. Parsed from the layout text format:
///
///   header lines        key value pairs, one per line:
///                         step_reward <float>     (default 0)
///                         max_steps <int>         (required)
///                         terminal <digit> <float>  reward table entry
///   grid rows           the first line starting with '#' begins the grid;
///                       '#' wall, '.' free, 'S' start, 'h' free cell in the
///                       herring region, digit 0-9 a terminal cell paying the
///                       reward from the terminal table. A blank line ends
///                       the grid.
struct GridSpec {
  int width = 0;
  int height = 0;
  std::set<Cell> walls;
  Cell start{0, 0};
  std::map<Cell, int> terminal_id;        // cell -> digit id
  std::map<int, double> terminal_reward;  // digit id -> reward
  std::set<Cell> herring;                 // rewardless distractor region
  double step_reward = 0.0;
  int max_steps = 0;

  bool in_bounds(const Cell& c) const {
    return c.first >= 0 && c.first < height && c.second >= 0 &&
           c.second < width;
  }
  bool is_wall(const Cell& c) const { return walls.count(c) > 0; }
  bool is_terminal(const Cell& c) const { return terminal_id.count(c) > 0; }
  int cell_index(const Cell& c) const { return c.first * width + c.second; }
  int n_cells() const { return width * height; }
  std::vector<Cell> free_cells() const;

  /// Shortest path length between two cells through free cells, or -1.
  int bfs_distance(const Cell& from, const Cell& to) const;
  /// Distances from a cell to every cell (-1 unreachable).
  std::vector<int> bfs_distances(const Cell& from) const;

  /// Throws UsageError if the spec is malformed (start on a wall/terminal,
  /// unreachable terminal, nonpositive max_steps, ...).
  void validate() const;
};

GridSpec parse_layout(const std::string& text);
GridSpec load_layout_file(const std::string& path);
std::string render_layout(const GridSpec& spec);

}  // namespace rosa::env
