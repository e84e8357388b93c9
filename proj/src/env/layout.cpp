#include "rosa/env/layout.hpp"

#include <cctype>
#include <deque>
#include <fstream>
#include <sstream>

#include "rosa/common.hpp"

namespace rosa::env {

std::vector<Cell> GridSpec::free_cells() const {
  std::vector<Cell> out;
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      if (!is_wall({r, c})) out.push_back({r, c});
  return out;
}

std::vector<int> GridSpec::bfs_distances(const Cell& from) const {
  std::vector<int> dist(n_cells(), -1);
  if (!in_bounds(from) || is_wall(from)) return dist;
  std::deque<Cell> q{from};
  dist[cell_index(from)] = 0;
  while (!q.empty()) {
    Cell c = q.front();
    q.pop_front();
    // Terminal cells absorb: paths may end there but not pass through.
    if (is_terminal(c) && c != from) continue;
    const int d = dist[cell_index(c)];
    const Cell nbrs[4] = {{c.first - 1, c.second},
                          {c.first + 1, c.second},
                          {c.first, c.second - 1},
                          {c.first, c.second + 1}};
    for (const Cell& n : nbrs) {
      if (!in_bounds(n) || is_wall(n)) continue;
      if (dist[cell_index(n)] >= 0) continue;
      dist[cell_index(n)] = d + 1;
      q.push_back(n);
    }
  }
  return dist;
}

int GridSpec::bfs_distance(const Cell& from, const Cell& to) const {
  if (!in_bounds(to)) return -1;
  return bfs_distances(from)[cell_index(to)];
}

void GridSpec::validate() const {
  if (width <= 0 || height <= 0) throw UsageError("grid: empty layout");
  if (max_steps <= 0) throw UsageError("grid: max_steps must be positive");
  if (!in_bounds(start) || is_wall(start))
    throw UsageError("grid: start cell missing or on a wall");
  if (is_terminal(start)) throw UsageError("grid: start cell is terminal");
  if (terminal_id.empty()) throw UsageError("grid: no terminal cells");
  for (const auto& [cell, id] : terminal_id) {
    if (terminal_reward.count(id) == 0)
      throw UsageError("grid: terminal " + std::to_string(id) +
                       " has no reward table entry");
    if (bfs_distance(start, cell) < 0)
      throw UsageError("grid: terminal " + std::to_string(id) +
                       " unreachable from start");
  }
  for (const Cell& h : herring) {
    if (!in_bounds(h) || is_wall(h) || is_terminal(h))
      throw UsageError("grid: herring region must be free non-terminal cells");
  }
}

GridSpec parse_layout(const std::string& text) {
  GridSpec spec;
  std::istringstream in(text);
  std::string line;
  bool in_grid = false;
  std::vector<std::string> rows;
  bool have_max_steps = false;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const bool blank = line.find_first_not_of(" \t") == std::string::npos;
    if (!in_grid) {
      if (blank) continue;
      if (line[0] == '#') {
        in_grid = true;
        rows.push_back(line);
        continue;
      }
      std::istringstream ls(line);
      std::string key;
      ls >> key;
      if (key == "step_reward") {
        if (!(ls >> spec.step_reward))
          throw UsageError("layout: bad step_reward line");
      } else if (key == "max_steps") {
        if (!(ls >> spec.max_steps))
          throw UsageError("layout: bad max_steps line");
        have_max_steps = true;
      } else if (key == "terminal") {
        int id;
        double reward;
        if (!(ls >> id >> reward) || id < 0 || id > 9)
          throw UsageError("layout: bad terminal line");
        spec.terminal_reward[id] = reward;
      } else {
        throw UsageError("layout: unknown header key '" + key + "'");
      }
    } else {
      if (blank) break;
      rows.push_back(line);
    }
  }

  if (rows.empty()) throw UsageError("layout: no grid rows");
  spec.height = static_cast<int>(rows.size());
  spec.width = static_cast<int>(rows[0].size());
  bool have_start = false;
  for (int r = 0; r < spec.height; ++r) {
    if (static_cast<int>(rows[r].size()) != spec.width)
      throw UsageError("layout: ragged grid rows");
    for (int c = 0; c < spec.width; ++c) {
      const char ch = rows[r][c];
      const Cell cell{r, c};
      if (ch == '#') {
        spec.walls.insert(cell);
      } else if (ch == '.') {
        // free
      } else if (ch == 'h') {
        spec.herring.insert(cell);
      } else if (ch == 'S') {
        if (have_start) throw UsageError("layout: multiple start cells");
        spec.start = cell;
        have_start = true;
      } else if (std::isdigit(static_cast<unsigned char>(ch))) {
        spec.terminal_id[cell] = ch - '0';
      } else {
        throw UsageError(std::string("layout: bad grid character '") + ch +
                         "'");
      }
    }
  }
  if (!have_start) throw UsageError("layout: missing start cell");
  if (!have_max_steps) throw UsageError("layout: missing max_steps header");
  spec.validate();
  return spec;
}

GridSpec load_layout_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("layout: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_layout(ss.str());
}

std::string render_layout(const GridSpec& spec) {
  std::ostringstream out;
  out << "step_reward " << spec.step_reward << "\n";
  out << "max_steps " << spec.max_steps << "\n";
  for (const auto& [id, reward] : spec.terminal_reward)
    out << "terminal " << id << " " << reward << "\n";
  out << "\n";
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) {
      const Cell cell{r, c};
      char ch = '.';
      if (spec.is_wall(cell))
        ch = '#';
      else if (cell == spec.start)
        ch = 'S';
      else if (spec.is_terminal(cell))
        ch = static_cast<char>('0' + spec.terminal_id.at(cell));
      else if (spec.herring.count(cell))
        ch = 'h';
      out << ch;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace rosa::env
