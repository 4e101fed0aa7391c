#pragma once

#include <optional>
#include <vector>

#include "apil/query/labels.hpp"

namespace fixtures {

/// Trajectory whose step t is queried iff dist[t] is set.
inline apil::query::Trajectory trajectory(const std::vector<std::optional<double>>& dist,
                                          std::optional<double> d_T) {
  using namespace apil::query;
  Trajectory traj;
  for (const auto& d : dist) {
    TrajectoryStep s;
    s.ask = d ? AskAction::query : AskAction::continue_;
    s.dist = d;
    traj.steps.push_back(s);
  }
  traj.final_dist = d_T;
  return traj;
}

}  // namespace fixtures
