#include "apil/env/grid_world.hpp"

#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace apil::env {

std::string_view to_string(ExeAction a) noexcept {
  switch (a) {
    case ExeAction::up: return "up";
    case ExeAction::right: return "right";
    case ExeAction::down: return "down";
    case ExeAction::left: return "left";
  }
  return "?";
}

std::string_view to_string(EnvKind k) noexcept {
  switch (k) {
    case EnvKind::grid: return "grid";
    case EnvKind::maze: return "maze";
    case EnvKind::custom: return "custom";
  }
  return "?";
}

EnvKind parse_env_kind(std::string_view name) {
  if (name == "grid") return EnvKind::grid;
  if (name == "maze") return EnvKind::maze;
  throw std::invalid_argument("unknown environment '" + std::string(name) + "' (expected grid|maze)");
}

GridWorld GridWorld::grid() {
  GridWorld w;
  w.config_ = {EnvKind::grid, 8, 5, 5};
  w.start_ = {0, 0};
  w.goal_ = {4, 4};
  w.walls_.assign(25, false);
  w.actions_ = {ExeAction::right, ExeAction::down};
  w.compute_distances();
  return w;
}

GridWorld GridWorld::maze() { return from_map(kDefaultMazeMap, 12, EnvKind::maze); }

GridWorld GridWorld::from_map(std::string_view text, std::optional<int> horizon, EnvKind kind) {
  std::vector<std::string> lines;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw std::invalid_argument("map is empty");
  const auto width = lines.front().size();
  GridWorld w;
  w.config_.kind = kind;
  w.config_.rows = static_cast<int>(lines.size());
  w.config_.cols = static_cast<int>(width);
  w.walls_.assign(lines.size() * width, false);
  int starts = 0;
  int goals = 0;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    if (lines[r].size() != width) {
      throw std::invalid_argument("map row " + std::to_string(r) + " has inconsistent width");
    }
    for (std::size_t c = 0; c < width; ++c) {
      const GridPos p{static_cast<int>(r), static_cast<int>(c)};
      switch (lines[r][c]) {
        case 'S': w.start_ = p; ++starts; break;
        case 'G': w.goal_ = p; ++goals; break;
        case '#': w.walls_[w.cell(p)] = true; break;
        case '.': break;
        default:
          throw std::invalid_argument(std::string("unexpected map character '") + lines[r][c] + "'");
      }
    }
  }
  if (starts != 1 || goals != 1) {
    throw std::invalid_argument("map needs exactly one 'S' and one 'G'");
  }
  w.actions_ = {ExeAction::up, ExeAction::right, ExeAction::down, ExeAction::left};
  w.compute_distances();
  const int start_distance = w.distances_[w.cell(w.start_)];
  if (start_distance < 0) throw std::invalid_argument("goal is unreachable from the start cell");
  w.config_.horizon = horizon.value_or(start_distance + 2);
  if (w.config_.horizon < start_distance) {
    throw std::invalid_argument("horizon " + std::to_string(w.config_.horizon) +
                                " is shorter than the start distance " +
                                std::to_string(start_distance));
  }
  return w;
}

GridWorld GridWorld::load_map(const std::filesystem::path& path, std::optional<int> horizon) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open map file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_map(buf.str(), horizon, EnvKind::custom);
}

bool GridWorld::in_bounds(GridPos p) const noexcept {
  return p.row >= 0 && p.col >= 0 && p.row < config_.rows && p.col < config_.cols;
}

bool GridWorld::is_wall(GridPos p) const {
  if (!in_bounds(p)) throw std::out_of_range("position outside the grid");
  return walls_[cell(p)];
}

std::size_t GridWorld::action_index(ExeAction a) const {
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    if (actions_[i] == a) return i;
  }
  throw std::logic_error("action " + std::string(to_string(a)) + " is not in this action space");
}

namespace {
GridPos shifted(GridPos p, ExeAction a) {
  switch (a) {
    case ExeAction::up: --p.row; break;
    case ExeAction::right: ++p.col; break;
    case ExeAction::down: ++p.row; break;
    case ExeAction::left: --p.col; break;
  }
  return p;
}
}  // namespace

GridPos GridWorld::move(GridPos p, ExeAction a) const {
  GridPos next = shifted(p, a);
  if (config_.kind == EnvKind::grid && !in_bounds(next)) {
    // The agent cannot leave the GRID board: a move across the border is
    // taken along the other axis, so every action sequence reaches the goal.
    next = shifted(p, a == ExeAction::right ? ExeAction::down : ExeAction::right);
  }
  if (!in_bounds(next) || walls_[cell(next)]) return p;
  return next;
}

void GridWorld::compute_distances() {
  const auto n = walls_.size();
  distances_.assign(n, -1);
  for (int r = 0; r < config_.rows; ++r) {
    for (int c = 0; c < config_.cols; ++c) {
      const GridPos from{r, c};
      if (walls_[cell(from)]) continue;
      // Forward BFS per cell: the action space may be directed (GRID).
      std::vector<int> seen(n, -1);
      std::deque<GridPos> frontier{from};
      seen[cell(from)] = 0;
      while (!frontier.empty()) {
        const GridPos p = frontier.front();
        frontier.pop_front();
        if (p == goal_) {
          distances_[cell(from)] = seen[cell(p)];
          break;
        }
        for (auto a : actions_) {
          const GridPos q = move(p, a);
          if (seen[cell(q)] < 0) {
            seen[cell(q)] = seen[cell(p)] + 1;
            frontier.push_back(q);
          }
        }
      }
    }
  }
}

EnvState GridWorld::reset() const { return EnvState{start_, goal_, 0, start_ == goal_}; }

EnvState GridWorld::step(const EnvState& s, ExeAction a) const {
  if (s.terminal) throw std::logic_error("step called on a terminal state");
  action_index(a);
  EnvState next = s;
  next.agent = move(s.agent, a);
  next.step_count = s.step_count + 1;
  next.terminal = next.agent == goal_ || next.step_count >= config_.horizon;
  return next;
}

int GridWorld::distance(GridPos p) const {
  if (!in_bounds(p)) throw std::out_of_range("position outside the grid");
  const int d = distances_[cell(p)];
  if (d < 0) throw std::logic_error("goal unreachable from this cell");
  return d;
}

double GridWorld::distance(const EnvState& s) const { return distance(s.agent); }

std::vector<ExeAction> GridWorld::ref_action_set(const EnvState& s) const {
  if (s.terminal) throw std::logic_error("reference actions requested for a terminal state");
  const int here = distance(s.agent);
  std::vector<ExeAction> out;
  for (auto a : actions_) {
    // Literal moves only: a border-crossing GRID action is never a reference action.
    const GridPos next = shifted(s.agent, a);
    if (!in_bounds(next) || walls_[cell(next)]) continue;
    const int there = distances_[cell(next)];
    if (there >= 0 && there == here - 1) out.push_back(a);
  }
  return out;
}

std::vector<double> GridWorld::encode(const EnvState& s) const {
  std::vector<double> f(feature_width(), kEmptyCode);
  for (std::size_t i = 0; i < walls_.size(); ++i) {
    if (walls_[i]) f[i] = kWallCode;
  }
  f[cell(s.goal)] = kGoalCode;
  f[cell(s.agent)] = kAgentCode;
  return f;
}

std::vector<GridPos> GridWorld::open_cells() const {
  std::vector<GridPos> out;
  for (int r = 0; r < config_.rows; ++r) {
    for (int c = 0; c < config_.cols; ++c) {
      const GridPos p{r, c};
      if (!walls_[cell(p)] && !(p == goal_) && distances_[cell(p)] >= 0) out.push_back(p);
    }
  }
  return out;
}

EnvState GridWorld::state_at(GridPos p, int step_count) const {
  if (!in_bounds(p) || walls_[cell(p)]) throw std::invalid_argument("state_at: not an open cell");
  return EnvState{p, goal_, step_count, p == goal_ || step_count >= config_.horizon};
}

std::string state_id(const EnvState& s) {
  return "r" + std::to_string(s.agent.row) + "c" + std::to_string(s.agent.col);
}

}  // namespace apil::env
