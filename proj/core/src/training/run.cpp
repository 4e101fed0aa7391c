#include "apil/training/run.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "apil/nn/checkpoint.hpp"

namespace apil::training {
namespace {

// Random sub-stream ids; a run seed fans out into these.
enum Stream : std::uint64_t {
  kInit = 1,
  kTeacherEstimate = 2,
  kProbeRollout = 3,
  kProbeEstimate = 4,
  kTrainBase = 16,
  kEvalBase = 32,
};

constexpr std::array kMethods = {Method::apil,   Method::phil_ignore, Method::bc,
                                 Method::dagger, Method::intrun,      Method::extrun,
                                 Method::behvun, Method::errpred,     Method::never};

agent::AgentConfig make_agent_config(const RunConfig& cfg, const env::GridWorld& world,
                                     std::size_t n_teachers) {
  auto a = agent::agent_config_for(world, n_teachers);
  a.dropout_rate = cfg.dropout_rate;
  a.train_with_dropout = cfg.train_with_dropout;
  a.persona_init_scale = cfg.persona_init_scale;
  a.adam.lr = cfg.lr;
  return a;
}

query::QueryNetConfig make_query_config(const RunConfig& cfg, const env::GridWorld& world) {
  query::QueryNetConfig q;
  q.feature_width = world.feature_width();
  q.n_actions = world.actions().size();
  q.horizon = world.horizon();
  q.adam.lr = cfg.lr;
  return q;
}

query::ErrorPredictorConfig make_errpred_config(const RunConfig& cfg, const env::GridWorld& world) {
  query::ErrorPredictorConfig e;
  e.feature_width = world.feature_width();
  e.n_actions = world.actions().size();
  e.threshold = cfg.errpred_threshold;
  e.adam.lr = cfg.lr;
  return e;
}

std::size_t own_action(std::span<const double> mean, bool greedy, nn::Rng& rng) {
  if (greedy) return static_cast<std::size_t>(std::max_element(mean.begin(), mean.end()) - mean.begin());
  return nn::sample_categorical(mean, rng);
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::apil: return "apil";
    case Method::phil_ignore: return "phil-ignore";
    case Method::bc: return "bc";
    case Method::dagger: return "dagger";
    case Method::intrun: return "intrun";
    case Method::extrun: return "extrun";
    case Method::behvun: return "behvun";
    case Method::errpred: return "errpred";
    case Method::never: return "never";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (auto m : kMethods) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument(
      "unknown method '" + std::string(name) +
      "' (expected apil|phil-ignore|bc|dagger|intrun|extrun|behvun|errpred|never)");
}

std::span<const Method> all_methods() noexcept { return kMethods; }

bool uses_query_net(Method m) noexcept { return m == Method::apil || m == Method::phil_ignore; }

bool is_threshold_method(Method m) noexcept {
  return m == Method::intrun || m == Method::extrun || m == Method::behvun;
}

query::ThresholdKind threshold_kind(Method m) {
  switch (m) {
    case Method::intrun: return query::ThresholdKind::intrinsic;
    case Method::extrun: return query::ThresholdKind::extrinsic;
    case Method::behvun: return query::ThresholdKind::behavioral;
    default: throw std::invalid_argument("method has no uncertainty threshold");
  }
}

void validate(const RunConfig& cfg) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("invalid config field '" + field + "': " + why);
  };
  if (cfg.episodes < 1) fail("episodes", "must be at least 1");
  if (!(cfg.lr > 0.0)) fail("lr", "must be positive");
  if (!(cfg.apil.sigma > 1.0)) fail("sigma", "must be greater than 1");
  if (!(cfg.apil.epsilon >= 0.0)) fail("epsilon", "must be nonnegative");
  if (cfg.teacher_final_distance && !(*cfg.teacher_final_distance >= 0.0)) {
    fail("teacher_final_distance", "must be nonnegative");
  }
  if (cfg.teacher_rollouts < 1) fail("teacher_rollouts", "must be at least 1");
  if (cfg.uncertainty.n1 < 1) fail("n1", "must be at least 1");
  if (cfg.uncertainty.n2 < 1) fail("n2", "must be at least 1");
  if (cfg.uncertainty_every < 1) fail("uncertainty_every", "must be at least 1");
  for (int n : cfg.probe_n1) {
    if (n < 1) fail("probe_n1", "values must be at least 1");
  }
  if (!(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0)) fail("dropout", "must lie in [0, 1)");
  if (!(cfg.persona_init_scale > 0.0 && std::isfinite(cfg.persona_init_scale))) {
    fail("persona_init", "must be positive");
  }
  if (!std::isfinite(cfg.tau)) fail("tau", "must be finite");
  if (!std::isfinite(cfg.errpred_threshold)) fail("errpred_threshold", "must be finite");
  if (cfg.horizon && *cfg.horizon < 1) fail("horizon", "must be positive");
  if (cfg.horizon && cfg.map_path.empty()) fail("horizon", "only custom maps take a horizon");
}

EpisodeRngs EpisodeRngs::from_seed(std::uint64_t seed, std::uint64_t base_stream) {
  return {nn::make_stream(seed, base_stream), nn::make_stream(seed, base_stream + 1),
          nn::make_stream(seed, base_stream + 2), nn::make_stream(seed, base_stream + 3)};
}

env::GridWorld make_world(const RunConfig& cfg) {
  if (!cfg.map_path.empty()) return env::GridWorld::load_map(cfg.map_path, cfg.horizon);
  if (cfg.horizon) {
    throw std::invalid_argument("invalid config field 'horizon': only custom maps take a horizon");
  }
  return cfg.env == env::EnvKind::maze ? env::GridWorld::maze() : env::GridWorld::grid();
}

namespace {
const RunConfig& validated(const RunConfig& cfg) {
  validate(cfg);
  return cfg;
}
}  // namespace

Learner::Learner(RunConfig cfg)
    : cfg_(validated(cfg)),
      world_(make_world(cfg_)),
      committee_(teachers::make_committee(cfg_.teacher)),
      apil_(cfg_.apil),
      agent_([&] {
        auto rng = nn::make_stream(cfg_.seed, kInit);
        return agent::PersonaAgent(make_agent_config(cfg_, world_, committee_.size()), rng);
      }()),
      query_net_([&] {
        auto rng = nn::make_stream(cfg_.seed, kInit + 100);
        return query::QueryNet(make_query_config(cfg_, world_), rng);
      }()),
      errpred_([&] {
        auto rng = nn::make_stream(cfg_.seed, kInit + 200);
        return query::ErrorPredictor(make_errpred_config(cfg_, world_), rng);
      }()),
      train_rngs_(EpisodeRngs::from_seed(cfg_.seed, kTrainBase)),
      probe_rng_(nn::make_stream(cfg_.seed, kProbeEstimate)) {
  if (cfg_.teacher_final_distance) {
    apil_.teacher_final_distance = *cfg_.teacher_final_distance;
  } else {
    auto rng = nn::make_stream(cfg_.seed, kTeacherEstimate);
    apil_.teacher_final_distance =
        teachers::estimate_teacher_final_distance(committee_, world_, cfg_.teacher_rollouts, rng);
  }

  // Frozen probe: one uniformly random walk over reference actions.
  auto rng = nn::make_stream(cfg_.seed, kProbeRollout);
  auto walker = teachers::make_committee(teachers::TeacherModel::rand);
  for (auto s = world_.reset(); !s.terminal;) {
    probe_.push_back(s);
    s = world_.step(s, walker.respond(world_, s, rng).exe_action);
  }
}

query::AskAction Learner::decide(const query::QueryInput& input, Mode mode,
                                 EpisodeRngs& rngs) const {
  switch (cfg_.method) {
    case Method::apil:
    case Method::phil_ignore:
      return mode == Mode::train ? query_net_.sample(input, rngs.ask) : query_net_.greedy(input);
    case Method::bc:
    case Method::dagger: return query::always_query();
    case Method::never: return query::never_query();
    case Method::intrun:
    case Method::extrun:
    case Method::behvun: {
      const auto report = uncertainty::estimate(agent_, input.features, cfg_.uncertainty, rngs.estimate);
      return query::threshold_policy(threshold_kind(cfg_.method), cfg_.tau, report);
    }
    case Method::errpred: return errpred_.decide(input.features, input.mean_policy);
  }
  return query::never_query();
}

EpisodeResult Learner::run_episode(int episode, Mode mode, EpisodeRngs& rngs) {
  const bool training = mode == Mode::train;
  const bool greedy = cfg_.greedy && !training;
  const int n1 = cfg_.uncertainty.n1;
  EpisodeResult result;
  committee_.select_member(rngs.teacher);

  double exe_loss = 0.0;
  double errpred_loss = 0.0;
  std::size_t queries = 0;
  auto s = world_.reset();
  while (!s.terminal) {
    query::TrajectoryStep step;
    step.input.features = world_.encode(s);
    step.input.mean_policy = agent_.mean_exe_policy(step.input.features, n1, rngs.agent);
    step.input.remaining = world_.horizon() - s.step_count;
    step.ask = decide(step.input, mode, rngs);

    env::ExeAction action;
    if (step.ask == query::AskAction::query) {
      ++queries;
      const auto response = committee_.respond(world_, s, rngs.teacher);
      step.dist = response.dist;
      if (training) {
        exe_loss += agent_.exe_losses(step.input.features, response, &rngs.agent).policy;
        if (cfg_.method == Method::errpred) {
          const auto m = query::margin(step.input.mean_policy, world_.action_index(response.exe_action));
          errpred_loss += errpred_.accumulate(step.input.features, step.input.mean_policy, m);
        }
      }
      if (cfg_.method == Method::dagger) {
        // DAgger labels every state but keeps executing its own policy.
        action = world_.actions()[own_action(step.input.mean_policy, greedy, rngs.agent)];
      } else {
        action = agent_.act(step.input.features, true, response, rngs.agent, n1);
      }
    } else {
      action = world_.actions()[own_action(step.input.mean_policy, greedy, rngs.agent)];
    }
    step.exe_action = action;
    result.states.push_back(s);
    result.trajectory.steps.push_back(std::move(step));
    s = world_.step(s, action);
  }
  result.trajectory.final_dist = world_.distance(s);

  auto& m = result.metrics;
  m.episode = episode;
  const auto steps = result.trajectory.length();
  m.query_rate = steps ? static_cast<double>(queries) / static_cast<double>(steps) : 0.0;
  m.final_dist = *result.trajectory.final_dist;
  m.success = m.final_dist <= 0.0;
  m.exe_loss = queries ? exe_loss / static_cast<double>(queries) : 0.0;

  if (training) {
    agent_.update();
    if (uses_query_net(cfg_.method)) {
      const auto labels = cfg_.method == Method::apil
                              ? query::apil_labels(result.trajectory, apil_)
                              : query::ignore_labels(result.trajectory, apil_);
      std::vector<query::QueryInput> inputs;
      inputs.reserve(steps);
      for (const auto& st : result.trajectory.steps) inputs.push_back(st.input);
      const double loss = query::query_imitation_loss(query_net_, inputs, labels);
      const auto active = std::count_if(labels.begin(), labels.end(),
                                        [](auto l) { return l != query::AskLabel::ignore; });
      m.ask_loss = active ? loss / static_cast<double>(active) : 0.0;
      query_net_.update();
    } else if (cfg_.method == Method::errpred) {
      m.ask_loss = queries ? errpred_loss / static_cast<double>(queries) : 0.0;
      errpred_.update();
    }
  }
  return result;
}

uncertainty::UncertaintyReport Learner::probe_uncertainty(int n1) {
  auto c = cfg_.uncertainty;
  c.n1 = n1;
  std::vector<uncertainty::UncertaintyReport> reports;
  reports.reserve(probe_.size());
  for (const auto& s : probe_) {
    auto r = uncertainty::estimate(agent_, world_.encode(s), c, probe_rng_);
    r.state_id = env::state_id(s);
    reports.push_back(std::move(r));
  }
  return uncertainty::mean_report(reports);
}

void Learner::save(const std::string& path) {
  auto groups = agent_.checkpoint_groups();
  for (auto g : query_net_.checkpoint_groups()) groups.push_back(g);
  for (auto g : errpred_.checkpoint_groups()) groups.push_back(g);
  nn::save_checkpoint(path, groups);
}

void Learner::load(const std::string& path) {
  auto groups = agent_.checkpoint_groups();
  for (auto g : query_net_.checkpoint_groups()) groups.push_back(g);
  for (auto g : errpred_.checkpoint_groups()) groups.push_back(g);
  nn::load_checkpoint(path, groups);
}

RunResult train(Learner& learner, const EpisodeCallback& on_episode) {
  const auto& cfg = learner.config();
  RunResult out;
  out.episodes.reserve(static_cast<std::size_t>(cfg.episodes));
  for (int e = 0; e < cfg.episodes; ++e) {
    auto result = learner.train_episode(e);
    const bool log_now = e % cfg.uncertainty_every == 0 || e == cfg.episodes - 1;
    if (log_now) {
      result.metrics.uncertainty = learner.probe_uncertainty(cfg.uncertainty.n1);
      for (int n1 : cfg.probe_n1) out.probe.push_back({e, n1, learner.probe_uncertainty(n1)});
    }
    if (on_episode) on_episode(learner, result.metrics);
    out.episodes.push_back(std::move(result.metrics));
  }
  return out;
}

EvalSummary evaluate(Learner& learner, int n_episodes, std::uint64_t seed) {
  if (n_episodes < 1) throw std::invalid_argument("evaluation needs at least one episode");
  auto rngs = EpisodeRngs::from_seed(seed, kEvalBase);
  EvalSummary summary;
  summary.episodes = n_episodes;
  for (int e = 0; e < n_episodes; ++e) {
    auto r = learner.run_episode(e, Mode::evaluate, rngs);
    summary.query_rate += r.metrics.query_rate;
    summary.success_rate += r.metrics.success ? 1.0 : 0.0;
    summary.mean_final_dist += r.metrics.final_dist;
    summary.visited.insert(summary.visited.end(), r.states.begin(), r.states.end());
  }
  summary.query_rate /= n_episodes;
  summary.success_rate /= n_episodes;
  summary.mean_final_dist /= n_episodes;
  return summary;
}

namespace {
std::span<const EpisodeMetrics> tail(std::span<const EpisodeMetrics> episodes, std::size_t window) {
  if (episodes.empty()) throw std::invalid_argument("no episodes");
  const auto n = std::min(window, episodes.size());
  return episodes.subspan(episodes.size() - n);
}
}  // namespace

double tail_query_rate(std::span<const EpisodeMetrics> episodes, std::size_t window) {
  const auto t = tail(episodes, window);
  double sum = 0.0;
  for (const auto& m : t) sum += m.query_rate;
  return sum / static_cast<double>(t.size());
}

double tail_success_rate(std::span<const EpisodeMetrics> episodes, std::size_t window) {
  const auto t = tail(episodes, window);
  double sum = 0.0;
  for (const auto& m : t) sum += m.success ? 1.0 : 0.0;
  return sum / static_cast<double>(t.size());
}

double query_rate_slope(std::span<const EpisodeMetrics> episodes) {
  const double n = static_cast<double>(episodes.size());
  if (episodes.size() < 2) return 0.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const double x = static_cast<double>(i);
    const double y = episodes[i].query_rate;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> default_tau_grid() {
  std::vector<double> taus;
  for (int i = 1; i <= 20; ++i) taus.push_back(0.05 * i);
  return taus;
}

TuneResult tune_threshold(RunConfig base, double target_rate, std::span<const double> taus,
                          std::size_t window, double tolerance) {
  if (taus.empty()) throw std::invalid_argument("empty tau grid");
  TuneResult out;
  for (double tau : taus) {
    base.tau = tau;
    base.uncertainty_every = base.episodes;
    Learner learner(base);
    const auto run = train(learner);
    out.tried.emplace_back(tau, tail_query_rate(run.episodes, window));
  }
  const auto within = std::find_if(out.tried.begin(), out.tried.end(), [&](const auto& p) {
    return std::abs(p.second - target_rate) <= tolerance;
  });
  const auto pick =
      within != out.tried.end()
          ? within
          : std::min_element(out.tried.begin(), out.tried.end(), [&](const auto& a, const auto& b) {
              return std::abs(a.second - target_rate) < std::abs(b.second - target_rate);
            });
  out.tau = pick->first;
  out.query_rate = pick->second;
  return out;
}

}  // namespace apil::training
