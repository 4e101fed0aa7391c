#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "apil/env/grid_world.hpp"
#include "apil/nn/adam.hpp"
#include "apil/nn/checkpoint.hpp"
#include "apil/nn/layers.hpp"
#include "apil/nn/random.hpp"
#include "apil/teachers/committee.hpp"

namespace apil::agent {

/// Nonnegative entries summing to one.
using ProbVec = std::vector<double>;

inline constexpr double kProbSumTolerance = 1e-9;
bool is_prob_vec(std::span<const double> p, double tol = kProbSumTolerance) noexcept;

struct AgentConfig {
  std::size_t feature_width = 25;
  std::vector<env::ExeAction> actions = {env::ExeAction::right, env::ExeAction::down};
  std::size_t n_teachers = 1;
  std::size_t hidden = 100;
  std::size_t persona_width = 50;
  /// MC-dropout rate on the persona-policy input.
  double dropout_rate = 0.2;
  /// Apply a fresh dropout mask to the policy input during training updates.
  bool train_with_dropout = false;
  /// Persona rows start uniform in [-scale, scale].
  double persona_init_scale = 0.1;
  nn::AdamConfig adam;
};

/// Builds the agent configuration matching an environment and a committee size.
AgentConfig agent_config_for(const env::GridWorld& world, std::size_t n_teachers);

struct PolicySample {
  std::size_t identity = 0;
  ProbVec probs;
};

struct ExeLosses {
  double policy = 0.0;
  double identity = 0.0;
};

/// Policy distribution over teacher personas: an identity network, a persona
/// embedding table and a persona-conditioned execution policy with shared
/// internal weights. Policy parameters (network + embeddings) and identity
/// parameters are optimised by separate Adam states.
class PersonaAgent {
 public:
  PersonaAgent(AgentConfig cfg, nn::Rng& init_rng);

  const AgentConfig& config() const noexcept { return cfg_; }
  std::size_t n_actions() const noexcept { return cfg_.actions.size(); }
  std::size_t n_teachers() const noexcept { return cfg_.n_teachers; }
  std::size_t policy_input_width() const noexcept { return cfg_.feature_width + cfg_.persona_width; }

  ProbVec identity_distribution(std::span<const double> features) const;
  /// pi_{theta, h(k)}(.|s); an empty mask means no dropout.
  ProbVec persona_policy(std::span<const double> features, std::size_t k,
                         std::span<const double> mask = {}) const;
  std::vector<double> persona_vector(std::size_t k) const;

  /// One parameter draw from the dropout posterior.
  std::vector<double> sample_posterior_mask(nn::Rng& rng) const;

  /// k ~ rho(.|s) and the policy of persona k, under a fresh dropout mask
  /// when posterior_sampling is set.
  PolicySample sample_policy(std::span<const double> features, nn::Rng& rng,
                             bool posterior_sampling) const;
  /// n policy samples under one fixed mask (empty = no dropout).
  std::vector<PolicySample> sample_policies(std::span<const double> features, int n, nn::Rng& rng,
                                            std::span<const double> mask = {}) const;
  /// Arithmetic mean of n sampled persona policies.
  ProbVec mean_exe_policy(std::span<const double> features, int n, nn::Rng& rng,
                          std::span<const double> mask = {}) const;

  /// NLL of the teacher action under the observed persona's policy and NLL of
  /// the observed identity under rho. Gradients accumulate until update().
  /// `rng` is only used when training with dropout.
  ExeLosses exe_losses(std::span<const double> features, const teachers::TeacherResponse& response,
                       nn::Rng* rng = nullptr);

  /// Reference action when queried; otherwise a draw from the N-sample mean
  /// policy, or its argmax when greedy. Throws std::invalid_argument when
  /// queried without a response.
  env::ExeAction act(std::span<const double> features, bool queried,
                     const std::optional<teachers::TeacherResponse>& response, nn::Rng& rng,
                     int n_samples, bool greedy = false) const;

  /// Applies one Adam step to each parameter group that received loss terms
  /// since the last update. Returns true when anything changed.
  bool update();
  std::size_t pending_terms() const noexcept { return pending_terms_; }

  nn::ParamSet& policy_params() noexcept { return policy_params_; }
  const nn::ParamSet& policy_params() const noexcept { return policy_params_; }
  nn::ParamSet& identity_params() noexcept { return identity_params_; }
  const nn::ParamSet& identity_params() const noexcept { return identity_params_; }
  const nn::Mlp& policy_net() const noexcept { return policy_net_; }
  const nn::Mlp& identity_net() const noexcept { return identity_net_; }
  const nn::Embedding& personas() const noexcept { return personas_; }

  std::vector<nn::CheckpointGroup> checkpoint_groups();

 private:
  std::vector<double> policy_input(std::span<const double> features, std::size_t k) const;

  AgentConfig cfg_;
  nn::ParamSet policy_params_;
  nn::ParamSet identity_params_;
  nn::Mlp policy_net_;
  nn::Embedding personas_;
  nn::Mlp identity_net_;
  nn::AdamState policy_adam_;
  nn::AdamState identity_adam_;
  std::size_t pending_terms_ = 0;
};

}  // namespace apil::agent
