#include "apil/teachers/committee.hpp"

#include <stdexcept>
#include <string>

namespace apil::teachers {

std::string_view to_string(TeacherModel m) noexcept {
  switch (m) {
    case TeacherModel::detm: return "detm";
    case TeacherModel::rand: return "rand";
    case TeacherModel::two_rand: return "tworand";
    case TeacherModel::two_dif_detm: return "twodifdetm";
  }
  return "?";
}

TeacherModel parse_teacher_model(std::string_view name) {
  if (name == "detm") return TeacherModel::detm;
  if (name == "rand") return TeacherModel::rand;
  if (name == "tworand") return TeacherModel::two_rand;
  if (name == "twodifdetm") return TeacherModel::two_dif_detm;
  throw std::invalid_argument("unknown teacher model '" + std::string(name) +
                              "' (expected detm|rand|tworand|twodifdetm)");
}

std::vector<double> member_distribution(TeacherKind kind, const env::GridWorld& world,
                                        const env::EnvState& s) {
  const auto ref = world.ref_action_set(s);
  std::vector<double> dist(world.actions().size(), 0.0);
  switch (kind) {
    case TeacherKind::detm_first: dist[world.action_index(ref.front())] = 1.0; break;
    case TeacherKind::detm_last: dist[world.action_index(ref.back())] = 1.0; break;
    case TeacherKind::rand:
      for (auto a : ref) dist[world.action_index(a)] = 1.0 / static_cast<double>(ref.size());
      break;
  }
  return dist;
}

Committee::Committee(std::vector<TeacherKind> members) : members_(std::move(members)) {
  if (members_.empty()) throw std::invalid_argument("a committee needs at least one member");
}

std::size_t Committee::select_member(nn::Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, members_.size() - 1);
  active_ = pick(rng);
  return active_;
}

void Committee::set_active_member(std::size_t k) {
  if (k >= members_.size()) throw std::out_of_range("committee member index out of range");
  active_ = k;
}

TeacherResponse Committee::respond(const env::GridWorld& world, const env::EnvState& s,
                                   nn::Rng& rng) const {
  if (s.terminal) throw std::logic_error("teacher queried on a terminal state");
  const auto ref = world.ref_action_set(s);
  env::ExeAction action = ref.front();
  switch (members_[active_]) {
    case TeacherKind::detm_first: action = ref.front(); break;
    case TeacherKind::detm_last: action = ref.back(); break;
    case TeacherKind::rand: {
      std::uniform_int_distribution<std::size_t> pick(0, ref.size() - 1);
      action = ref[pick(rng)];
      break;
    }
  }
  return {action, active_, world.distance(s)};
}

Committee make_committee(TeacherModel model) {
  switch (model) {
    case TeacherModel::detm: return Committee({TeacherKind::detm_first});
    case TeacherModel::rand: return Committee({TeacherKind::rand});
    case TeacherModel::two_rand: return Committee({TeacherKind::rand, TeacherKind::rand});
    case TeacherModel::two_dif_detm:
      return Committee({TeacherKind::detm_first, TeacherKind::detm_last});
  }
  throw std::invalid_argument("unknown teacher model");
}

double estimate_teacher_final_distance(Committee committee, const env::GridWorld& world,
                                       int n_rollouts, nn::Rng& rng) {
  if (n_rollouts < 1) throw std::invalid_argument("n_rollouts must be at least 1");
  if (world.kind() == env::EnvKind::grid) return 0.0;
  double total = 0.0;
  for (int i = 0; i < n_rollouts; ++i) {
    committee.select_member(rng);
    auto s = world.reset();
    while (!s.terminal) s = world.step(s, committee.respond(world, s, rng).exe_action);
    total += world.distance(s);
  }
  return total / n_rollouts;
}

}  // namespace apil::teachers
