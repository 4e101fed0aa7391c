#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apil/agent/persona_agent.hpp"
#include "apil/env/grid_world.hpp"
#include "apil/query/baselines.hpp"
#include "apil/query/labels.hpp"
#include "apil/query/query_net.hpp"
#include "apil/teachers/committee.hpp"
#include "apil/uncertainty/estimators.hpp"

namespace apil::training {

enum class Method { apil, phil_ignore, bc, dagger, intrun, extrun, behvun, errpred, never };

std::string_view to_string(Method m) noexcept;
/// apil|phil-ignore|bc|dagger|intrun|extrun|behvun|errpred|never.
Method parse_method(std::string_view name);
std::span<const Method> all_methods() noexcept;
bool uses_query_net(Method m) noexcept;
bool is_threshold_method(Method m) noexcept;
query::ThresholdKind threshold_kind(Method m);

struct RunConfig {
  env::EnvKind env = env::EnvKind::grid;
  /// Custom map file; overrides `env` when non-empty.
  std::string map_path;
  std::optional<int> horizon;
  teachers::TeacherModel teacher = teachers::TeacherModel::detm;
  Method method = Method::apil;
  int episodes = 1000;
  std::uint64_t seed = 0;
  double lr = 1e-3;
  query::ApilConfig apil;
  /// Overrides the rollout estimate of d*_T when set.
  std::optional<double> teacher_final_distance;
  int teacher_rollouts = 100;
  uncertainty::UncertaintyConfig uncertainty;
  /// Probe uncertainty is logged every this many episodes and at the last one.
  int uncertainty_every = 25;
  /// Additional n1 values evaluated on the probe at the same cadence.
  std::vector<int> probe_n1;
  double tau = 0.1;
  double errpred_threshold = 0.5;
  double dropout_rate = 0.2;
  bool train_with_dropout = false;
  /// Persona rows start uniform in [-scale, scale].
  double persona_init_scale = 0.1;
  /// Evaluation takes the argmax of the mean policy instead of sampling.
  bool greedy = false;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const RunConfig& cfg);

struct EpisodeMetrics {
  int episode = 0;
  double query_rate = 0.0;
  bool success = false;
  double final_dist = 0.0;
  /// Mean execution-policy NLL over queried steps.
  double exe_loss = 0.0;
  /// Mean query-policy loss over labelled steps (regression loss for errpred).
  double ask_loss = 0.0;
  std::optional<uncertainty::UncertaintyReport> uncertainty;
};

struct ProbeRow {
  int episode = 0;
  int n1 = 0;
  uncertainty::UncertaintyReport report;
};

struct EpisodeResult {
  query::Trajectory trajectory;
  /// States in which an ask decision was taken.
  std::vector<env::EnvState> states;
  EpisodeMetrics metrics;
};

/// Random streams consumed by one episode loop.
struct EpisodeRngs {
  nn::Rng teacher;
  nn::Rng agent;
  nn::Rng ask;
  nn::Rng estimate;

  static EpisodeRngs from_seed(std::uint64_t seed, std::uint64_t base_stream);
};

enum class Mode { train, evaluate };

/// Everything one run owns: environment, committee, agent, query policies and
/// random streams. Not shareable between threads; independent learners are.
class Learner {
 public:
  explicit Learner(RunConfig cfg);

  const RunConfig& config() const noexcept { return cfg_; }
  const env::GridWorld& world() const noexcept { return world_; }
  const teachers::Committee& committee() const noexcept { return committee_; }
  teachers::Committee& committee() noexcept { return committee_; }
  agent::PersonaAgent& agent() noexcept { return agent_; }
  const agent::PersonaAgent& agent() const noexcept { return agent_; }
  query::QueryNet& query_net() noexcept { return query_net_; }
  const query::QueryNet& query_net() const noexcept { return query_net_; }
  query::ErrorPredictor& error_predictor() noexcept { return errpred_; }
  double teacher_final_distance() const noexcept { return apil_.teacher_final_distance; }
  const std::vector<env::EnvState>& probe_states() const noexcept { return probe_; }

  /// One episode of the active-imitation loop. In train mode the agent,
  /// query net and error predictor are updated once at the end; evaluate
  /// mode only reads parameters and uses greedy ask decisions.
  EpisodeResult run_episode(int episode, Mode mode, EpisodeRngs& rngs);
  /// Uses the learner's own training streams.
  EpisodeResult train_episode(int episode) { return run_episode(episode, Mode::train, train_rngs_); }

  /// Uncertainty averaged over the probe states, drawn from the probe stream.
  uncertainty::UncertaintyReport probe_uncertainty(int n1);

  void save(const std::string& path);
  void load(const std::string& path);

 private:
  query::AskAction decide(const query::QueryInput& input, Mode mode, EpisodeRngs& rngs) const;

  RunConfig cfg_;
  env::GridWorld world_;
  teachers::Committee committee_;
  query::ApilConfig apil_;
  agent::PersonaAgent agent_;
  query::QueryNet query_net_;
  query::ErrorPredictor errpred_;
  std::vector<env::EnvState> probe_;
  EpisodeRngs train_rngs_;
  nn::Rng probe_rng_;
};

env::GridWorld make_world(const RunConfig& cfg);

struct RunResult {
  std::vector<EpisodeMetrics> episodes;
  std::vector<ProbeRow> probe;
};

using EpisodeCallback = std::function<void(const Learner&, const EpisodeMetrics&)>;

/// Runs cfg.episodes training episodes, logging probe uncertainty at the
/// configured cadence.
RunResult train(Learner& learner, const EpisodeCallback& on_episode = {});

struct EvalSummary {
  int episodes = 0;
  double query_rate = 0.0;
  double success_rate = 0.0;
  double mean_final_dist = 0.0;
  /// Every state in which the agent took a decision, in visiting order.
  std::vector<env::EnvState> visited;
};

/// Seeded evaluation with no parameter updates.
EvalSummary evaluate(Learner& learner, int n_episodes, std::uint64_t seed);

/// Mean of query_rate / success over the last `window` episodes.
double tail_query_rate(std::span<const EpisodeMetrics> episodes, std::size_t window);
double tail_success_rate(std::span<const EpisodeMetrics> episodes, std::size_t window);
/// Least-squares slope of the query-rate series against the episode index.
double query_rate_slope(std::span<const EpisodeMetrics> episodes);

struct TuneResult {
  double tau = 0.0;
  double query_rate = 0.0;
  /// (tau, final-window query rate) for every tau tried.
  std::vector<std::pair<double, double>> tried;
};

/// {0.05, 0.10, ..., 1.00}.
std::vector<double> default_tau_grid();

/// Trains `base` once per tau and keeps the smallest tau whose final-window
/// query rate is within `tolerance` of `target_rate`, or the closest one when
/// none is.
TuneResult tune_threshold(RunConfig base, double target_rate, std::span<const double> taus,
                          std::size_t window = 100, double tolerance = 0.05);

}  // namespace apil::training
