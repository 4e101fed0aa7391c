#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "apil/env/grid_world.hpp"
#include "apil/nn/random.hpp"

namespace apil::teachers {

enum class TeacherKind { detm_first, detm_last, rand };

enum class TeacherModel { detm, rand, two_rand, two_dif_detm };

std::string_view to_string(TeacherModel m) noexcept;
/// Accepts detm|rand|tworand|twodifdetm; throws std::invalid_argument otherwise.
TeacherModel parse_teacher_model(std::string_view name);

struct TeacherResponse {
  env::ExeAction exe_action;
  std::size_t identity = 0;
  double dist = 0.0;
};

/// Action distribution a single member puts on the reference set, aligned with
/// the environment's action space.
std::vector<double> member_distribution(TeacherKind kind, const env::GridWorld& world,
                                        const env::EnvState& s);

/// K simulated teachers. One member is active for a whole episode.
class Committee {
 public:
  explicit Committee(std::vector<TeacherKind> members);

  std::size_t size() const noexcept { return members_.size(); }
  std::span<const TeacherKind> members() const noexcept { return members_; }
  std::size_t active_member() const noexcept { return active_; }

  /// Uniform draw over members; call once per episode at reset.
  std::size_t select_member(nn::Rng& rng);
  /// Forces the active member (tests and probes).
  void set_active_member(std::size_t k);

  /// Reference action of the active member, its identity and d(s). Throws
  /// std::logic_error on a terminal state.
  TeacherResponse respond(const env::GridWorld& world, const env::EnvState& s, nn::Rng& rng) const;

 private:
  std::vector<TeacherKind> members_;
  std::size_t active_ = 0;
};

Committee make_committee(TeacherModel model);

/// Mean final distance over always-query rollouts; 0 for GRID, where every
/// action sequence reaches the goal.
double estimate_teacher_final_distance(Committee committee, const env::GridWorld& world,
                                       int n_rollouts, nn::Rng& rng);

}  // namespace apil::teachers
