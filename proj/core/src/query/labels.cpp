#include "apil/query/labels.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace apil::query {

std::string_view to_string(AskAction a) noexcept {
  return a == AskAction::query ? "query" : "continue";
}

std::string_view to_string(AskLabel l) noexcept {
  switch (l) {
    case AskLabel::continue_: return "continue";
    case AskLabel::query: return "query";
    case AskLabel::ignore: return "ignore";
  }
  return "?";
}

void validate(const ApilConfig& cfg) {
  if (!(cfg.sigma > 1.0)) throw std::invalid_argument("sigma must be greater than 1");
  if (!(cfg.epsilon >= 0.0)) throw std::invalid_argument("epsilon must be nonnegative");
  if (!(cfg.teacher_final_distance >= 0.0)) {
    throw std::invalid_argument("teacher final distance must be nonnegative");
  }
}

std::size_t Trajectory::query_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      steps.begin(), steps.end(), [](const auto& s) { return s.ask == AskAction::query; }));
}

void check_well_formed(const Trajectory& traj) {
  if (!traj.final_dist) throw std::invalid_argument("trajectory is missing the final distance d_T");
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const auto& s = traj.steps[t];
    if (s.ask == AskAction::query && !s.dist) {
      throw std::invalid_argument("queried step " + std::to_string(t) + " has no distance");
    }
  }
}

std::vector<bool> progressable(const Trajectory& traj, const ApilConfig& cfg) {
  check_well_formed(traj);
  const double d_final = *traj.final_dist;
  const bool use_gap = cfg.rule == ProgressRule::gap_reduction;
  const double offset = use_gap ? cfg.teacher_final_distance : 0.0;

  double best = d_final - offset;
  bool progress = d_final <= cfg.epsilon;
  std::vector<bool> out(traj.steps.size(), false);
  for (std::size_t t = traj.steps.size(); t-- > 0;) {
    const auto& step = traj.steps[t];
    if (step.ask == AskAction::query) {
      const double g = *step.dist - offset;
      const bool reduced = use_gap ? g >= cfg.sigma * best : g <= cfg.sigma * best;
      progress = progress || reduced;
      best = std::min(best, g);
    }
    out[t] = progress;
  }
  return out;
}

std::vector<AskLabel> apil_labels(const Trajectory& traj, const ApilConfig& cfg) {
  const auto prog = progressable(traj, cfg);
  std::vector<AskLabel> labels(prog.size());
  for (std::size_t t = 0; t < prog.size(); ++t) {
    labels[t] = prog[t] ? AskLabel::continue_ : AskLabel::query;
  }
  return labels;
}

AskLabel ignore_label(bool progressable, AskAction agent_action) noexcept {
  if (progressable) {
    return agent_action == AskAction::query ? AskLabel::ignore : AskLabel::continue_;
  }
  return agent_action == AskAction::query ? AskLabel::continue_ : AskLabel::query;
}

std::vector<AskLabel> ignore_labels(const Trajectory& traj, const ApilConfig& cfg) {
  const auto prog = progressable(traj, cfg);
  std::vector<AskLabel> labels(prog.size());
  for (std::size_t t = 0; t < prog.size(); ++t) {
    labels[t] = ignore_label(prog[t], traj.steps[t].ask);
  }
  return labels;
}

}  // namespace apil::query
