#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "apil/env/grid_world.hpp"

namespace apil::query {

enum class AskAction : std::uint8_t { continue_, query };
enum class AskLabel : std::uint8_t { continue_, query, ignore };

std::string_view to_string(AskAction a) noexcept;
std::string_view to_string(AskLabel l) noexcept;

/// Which comparison marks a queried step as making progress.
enum class ProgressRule {
  /// g_t >= sigma * min(later observed gaps): the gap shrinks by sigma.
  gap_reduction,
  /// d_t <= sigma * min(later observed distances), as printed in the
  /// algorithm listing; kept for ablation only.
  listing,
};

struct ApilConfig {
  double sigma = 2.0;
  double epsilon = 0.0;
  /// Expected final distance of an always-query agent (d*_T).
  double teacher_final_distance = 0.0;
  ProgressRule rule = ProgressRule::gap_reduction;
};

void validate(const ApilConfig& cfg);

/// Inputs of the query network at one step.
struct QueryInput {
  std::vector<double> features;
  std::vector<double> mean_policy;
  /// T - t.
  int remaining = 0;
};

struct TrajectoryStep {
  QueryInput input;
  env::ExeAction exe_action = env::ExeAction::right;
  AskAction ask = AskAction::continue_;
  /// Distance reported by the teacher; present exactly at queried steps.
  std::optional<double> dist;
};

/// One executed episode. Distances are known at queried steps and at the end.
struct Trajectory {
  std::vector<TrajectoryStep> steps;
  std::optional<double> final_dist;

  std::size_t length() const noexcept { return steps.size(); }
  std::size_t query_count() const noexcept;
};

/// Throws std::invalid_argument when d_T is missing or a queried step has no
/// distance.
void check_well_formed(const Trajectory& traj);

/// Hindsight progress flag per step, from a single backward sweep.
std::vector<bool> progressable(const Trajectory& traj, const ApilConfig& cfg);

/// continue where progressable, query elsewhere.
std::vector<AskLabel> apil_labels(const Trajectory& traj, const ApilConfig& cfg);

/// Query-teacher labels with the ignore action: agree with the agent on
/// progressable steps (ignore when it queried), disagree elsewhere.
std::vector<AskLabel> ignore_labels(const Trajectory& traj, const ApilConfig& cfg);

/// Single-cell form of the ignore table.
AskLabel ignore_label(bool progressable, AskAction agent_action) noexcept;

}  // namespace apil::query
