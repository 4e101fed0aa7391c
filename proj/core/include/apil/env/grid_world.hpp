#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace apil::env {

enum class ExeAction : std::uint8_t { up, right, down, left };

std::string_view to_string(ExeAction a) noexcept;

enum class EnvKind { grid, maze, custom };

std::string_view to_string(EnvKind k) noexcept;
/// Accepts "grid" and "maze"; throws std::invalid_argument otherwise.
EnvKind parse_env_kind(std::string_view name);

struct GridPos {
  int row = 0;
  int col = 0;
  bool operator==(const GridPos&) const = default;
};

struct EnvState {
  GridPos agent;
  GridPos goal;
  int step_count = 0;
  bool terminal = false;
  bool operator==(const EnvState&) const = default;
};

struct EpisodeConfig {
  EnvKind kind = EnvKind::grid;
  int horizon = 8;
  int rows = 5;
  int cols = 5;
};

inline constexpr double kEmptyCode = 0.0;
inline constexpr double kWallCode = 0.25;
inline constexpr double kAgentCode = 0.5;
inline constexpr double kGoalCode = 1.0;

/// The built-in MazeGrid map, row 0 first.
inline constexpr std::string_view kDefaultMazeMap =
    "S.....\n"
    ".####.\n"
    "......\n"
    ".####.\n"
    "......\n"
    "#####G\n";

/// A rectangular grid with optional walls, a single start and goal cell, a
/// fixed action space and a time limit. Moves into a wall or across the
/// border leave the agent in place, except on GRID, where a border-crossing
/// move is taken along the other axis so that every action sequence reaches
/// the goal.
class GridWorld {
 public:
  /// 5x5 open grid, start top-left, goal bottom-right, actions [right, down], T = 8.
  static GridWorld grid();
  /// kDefaultMazeMap with actions [up, right, down, left], T = 12.
  static GridWorld maze();
  /// Parses a map made of 'S', 'G', '#' and '.'. The horizon defaults to the
  /// start distance plus two. Throws std::invalid_argument for malformed maps,
  /// an unreachable goal or a horizon shorter than the start distance.
  static GridWorld from_map(std::string_view text, std::optional<int> horizon = std::nullopt,
                            EnvKind kind = EnvKind::custom);
  static GridWorld load_map(const std::filesystem::path& path,
                            std::optional<int> horizon = std::nullopt);

  const EpisodeConfig& config() const noexcept { return config_; }
  EnvKind kind() const noexcept { return config_.kind; }
  int rows() const noexcept { return config_.rows; }
  int cols() const noexcept { return config_.cols; }
  int horizon() const noexcept { return config_.horizon; }
  GridPos start() const noexcept { return start_; }
  GridPos goal() const noexcept { return goal_; }
  bool is_wall(GridPos p) const;
  bool in_bounds(GridPos p) const noexcept;

  /// Canonical action order; policy outputs are indexed by position in this list.
  std::span<const ExeAction> actions() const noexcept { return actions_; }
  std::size_t action_index(ExeAction a) const;

  std::size_t feature_width() const noexcept {
    return static_cast<std::size_t>(config_.rows * config_.cols);
  }

  EnvState reset() const;
  /// Throws std::logic_error on a terminal state or an action outside the action space.
  EnvState step(const EnvState& s, ExeAction a) const;
  /// Shortest-path step count to the goal.
  double distance(const EnvState& s) const;
  int distance(GridPos p) const;
  /// Actions that strictly decrease the distance, in canonical order. Throws
  /// std::logic_error on a terminal state.
  std::vector<ExeAction> ref_action_set(const EnvState& s) const;
  std::vector<double> encode(const EnvState& s) const;

  /// Every non-wall, non-goal cell from which the goal is reachable.
  std::vector<GridPos> open_cells() const;
  /// State with the agent placed at `p` and the clock at `step_count`.
  EnvState state_at(GridPos p, int step_count = 0) const;

 private:
  GridWorld() = default;
  GridPos move(GridPos p, ExeAction a) const;
  void compute_distances();
  std::size_t cell(GridPos p) const noexcept {
    return static_cast<std::size_t>(p.row * config_.cols + p.col);
  }

  EpisodeConfig config_;
  GridPos start_;
  GridPos goal_;
  std::vector<bool> walls_;
  std::vector<int> distances_;  // -1 where the goal is unreachable
  std::vector<ExeAction> actions_;
};

/// "r<row>c<col>" label used in reports.
std::string state_id(const EnvState& s);

}  // namespace apil::env
