#include <cmath>

#include "rosa/env/env.hpp"

namespace rosa::env {

namespace {

class GridEnv : public EnvInstance {
 public:
  GridEnv(GridSpec spec, std::string name)
      : spec_(std::move(spec)), name_(std::move(name)) {
    spec_.validate();
  }

  int obs_dim() const override { return spec_.n_cells(); }
  int n_actions() const override { return 4; }
  const std::string& name() const override { return name_; }
  const GridSpec* grid() const override { return &spec_; }
  int current_cell() const override { return spec_.cell_index(pos_); }

 protected:
  Vec raw_reset(std::mt19937_64&) override {
    pos_ = spec_.start;
    return encode();
  }

  RawStep raw_step(int action, std::mt19937_64&) override {
    static const int dr[4] = {-1, 1, 0, 0};
    static const int dc[4] = {0, 0, -1, 1};
    Cell next{pos_.first + dr[action], pos_.second + dc[action]};
    if (!spec_.in_bounds(next) || spec_.is_wall(next)) next = pos_;
    pos_ = next;
    RawStep rs;
    rs.reward = spec_.step_reward;
    rs.done = false;
    if (spec_.is_terminal(pos_)) {
      rs.goal_id = spec_.terminal_id.at(pos_);
      rs.reward += spec_.terminal_reward.at(rs.goal_id);
      rs.done = true;
    }
    rs.obs = encode();
    return rs;
  }

  int max_steps() const override { return spec_.max_steps; }

 private:
  Vec encode() const {
    Vec v = Vec::Zero(spec_.n_cells());
    v[spec_.cell_index(pos_)] = 1.0;
    return v;
  }

  GridSpec spec_;
  std::string name_;
  Cell pos_;
};

constexpr const char* kTwoGoalLayout = R"(step_reward 0
max_steps 200
terminal 0 1.0
terminal 1 0.5

###########
#S..1######
#.#########
#.........#
#########.#
######...0#
###########
)";

constexpr const char* kSubgoalLayout = R"(step_reward -0.01
max_steps 200
terminal 0 1.0

###########
#S....#...#
#.....#...#
#.........#
#.....#..0#
###########
)";

constexpr const char* kRedHerringLayout = R"(step_reward 0
max_steps 200
terminal 0 1.0

#################
#S...#hhhhhhhhhh#
#....#hhhhhhhhhh#
#.0..#hhhhhhhhhh#
#....hhhhhhhhhhh#
#....#hhhhhhhhhh#
#################
)";

constexpr const char* kCorridorLayout = R"(step_reward -0.05
max_steps 100
terminal 0 1.0
terminal 1 0.5

#############
#1....S....0#
#############
)";

GridSpec pick(const std::optional<GridSpec>& custom, const char* fallback) {
  return custom ? *custom : parse_layout(fallback);
}

/// The two relevant goals of a maze: the unique 1.0 terminal and the unique
/// 0.5 terminal.
struct TwoGoals {
  Cell optimal;
  Cell suboptimal;
};

TwoGoals find_two_goals(const GridSpec& spec) {
  const Cell* opt = nullptr;
  const Cell* sub = nullptr;
  for (const auto& [cell, id] : spec.terminal_id) {
    const double r = spec.terminal_reward.at(id);
    if (r == 1.0 && opt == nullptr)
      opt = &cell;
    else if (r == 0.5 && sub == nullptr)
      sub = &cell;
    else
      throw UsageError("maze: expected exactly one 1.0 and one 0.5 terminal");
  }
  if (opt == nullptr || sub == nullptr)
    throw UsageError("maze: expected terminals paying 1.0 and 0.5");
  return {*opt, *sub};
}

}  // namespace

std::unique_ptr<EnvInstance> make_env_from_grid(GridSpec spec,
                                                std::string name) {
  return std::make_unique<GridEnv>(std::move(spec), std::move(name));
}

std::unique_ptr<EnvInstance> make_two_goal_maze(
    const std::optional<GridSpec>& custom) {
  GridSpec spec = pick(custom, kTwoGoalLayout);
  TwoGoals goals = find_two_goals(spec);
  const int d_sub = spec.bfs_distance(spec.start, goals.suboptimal);
  const int d_opt = spec.bfs_distance(spec.start, goals.optimal);
  if (d_sub >= d_opt)
    throw UsageError(
        "two_goal maze: the 0.5 goal must be strictly closer to the start "
        "than the 1.0 goal");
  return make_env_from_grid(std::move(spec), "two_goal");
}

std::unique_ptr<EnvInstance> make_subgoal_maze(
    const std::optional<GridSpec>& custom) {
  GridSpec spec = pick(custom, kSubgoalLayout);
  if (spec.step_reward >= 0.0)
    throw UsageError("subgoal maze: per-step reward must be negative");
  return make_env_from_grid(std::move(spec), "subgoal");
}

std::unique_ptr<EnvInstance> make_red_herring_maze(
    const std::optional<GridSpec>& custom) {
  GridSpec spec = pick(custom, kRedHerringLayout);
  const size_t n_free = spec.free_cells().size();
  if (spec.herring.empty() ||
      static_cast<double>(spec.herring.size()) < 0.4 * static_cast<double>(n_free))
    throw UsageError(
        "red_herring maze: herring region must cover at least 40% of the "
        "free cells");
  return make_env_from_grid(std::move(spec), "red_herring");
}

std::unique_ptr<EnvInstance> make_corridor_maze(
    const std::optional<GridSpec>& custom) {
  GridSpec spec = pick(custom, kCorridorLayout);
  TwoGoals goals = find_two_goals(spec);
  if (spec.bfs_distance(spec.start, goals.optimal) !=
      spec.bfs_distance(spec.start, goals.suboptimal))
    throw UsageError("corridor maze: goals must be equidistant from start");
  if (spec.step_reward >= 0.0)
    throw UsageError("corridor maze: per-step reward must be negative");
  return make_env_from_grid(std::move(spec), "corridor");
}

}  // namespace rosa::env
