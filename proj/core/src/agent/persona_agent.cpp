#include "apil/agent/persona_agent.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "apil/nn/dropout.hpp"
#include "apil/nn/loss.hpp"

namespace apil::agent {

bool is_prob_vec(std::span<const double> p, double tol) noexcept {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) return false;
    sum += v;
  }
  return !p.empty() && std::abs(sum - 1.0) <= tol;
}

AgentConfig agent_config_for(const env::GridWorld& world, std::size_t n_teachers) {
  AgentConfig cfg;
  cfg.feature_width = world.feature_width();
  cfg.actions.assign(world.actions().begin(), world.actions().end());
  cfg.n_teachers = n_teachers;
  return cfg;
}

PersonaAgent::PersonaAgent(AgentConfig cfg, nn::Rng& init_rng) : cfg_(std::move(cfg)) {
  if (cfg_.n_teachers == 0 || cfg_.actions.empty() || cfg_.feature_width == 0) {
    throw std::invalid_argument("agent needs teachers, actions and features");
  }
  policy_net_ = nn::Mlp(policy_params_, "policy", policy_input_width(), cfg_.hidden,
                        cfg_.actions.size());
  personas_ = nn::Embedding(policy_params_, "persona", cfg_.n_teachers, cfg_.persona_width);
  identity_net_ = nn::Mlp(identity_params_, "identity", cfg_.feature_width, cfg_.hidden,
                          cfg_.n_teachers);
  policy_net_.init(policy_params_, init_rng);
  personas_.init(policy_params_, init_rng, cfg_.persona_init_scale);
  identity_net_.init(identity_params_, init_rng);
  policy_adam_ = nn::AdamState(policy_params_, cfg_.adam);
  identity_adam_ = nn::AdamState(identity_params_, cfg_.adam);
}

ProbVec PersonaAgent::identity_distribution(std::span<const double> features) const {
  return nn::softmax(identity_net_.forward(identity_params_, features));
}

std::vector<double> PersonaAgent::persona_vector(std::size_t k) const {
  return personas_.lookup(policy_params_, k);
}

std::vector<double> PersonaAgent::policy_input(std::span<const double> features,
                                               std::size_t k) const {
  if (features.size() != cfg_.feature_width) {
    throw std::invalid_argument("state features have width " + std::to_string(features.size()) +
                                ", expected " + std::to_string(cfg_.feature_width));
  }
  std::vector<double> x(features.begin(), features.end());
  const auto h = personas_.lookup(policy_params_, k);
  x.insert(x.end(), h.begin(), h.end());
  return x;
}

ProbVec PersonaAgent::persona_policy(std::span<const double> features, std::size_t k,
                                     std::span<const double> mask) const {
  auto x = policy_input(features, k);
  if (!mask.empty()) x = nn::apply_mask(x, mask);
  return nn::softmax(policy_net_.forward(policy_params_, x));
}

std::vector<double> PersonaAgent::sample_posterior_mask(nn::Rng& rng) const {
  return nn::sample_dropout_mask({cfg_.dropout_rate, "policy.input"}, policy_input_width(), rng);
}

PolicySample PersonaAgent::sample_policy(std::span<const double> features, nn::Rng& rng,
                                         bool posterior_sampling) const {
  const auto rho = identity_distribution(features);
  const std::size_t k = nn::sample_categorical(rho, rng);
  if (posterior_sampling) {
    const auto mask = sample_posterior_mask(rng);
    return {k, persona_policy(features, k, mask)};
  }
  return {k, persona_policy(features, k)};
}

std::vector<PolicySample> PersonaAgent::sample_policies(std::span<const double> features, int n,
                                                        nn::Rng& rng,
                                                        std::span<const double> mask) const {
  if (n < 1) throw std::invalid_argument("need at least one policy sample");
  const auto rho = identity_distribution(features);
  std::map<std::size_t, ProbVec> cache;
  std::vector<PolicySample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::size_t k = nn::sample_categorical(rho, rng);
    auto it = cache.find(k);
    if (it == cache.end()) it = cache.emplace(k, persona_policy(features, k, mask)).first;
    out.push_back({k, it->second});
  }
  return out;
}

ProbVec PersonaAgent::mean_exe_policy(std::span<const double> features, int n, nn::Rng& rng,
                                      std::span<const double> mask) const {
  const auto samples = sample_policies(features, n, rng, mask);
  ProbVec mean(n_actions(), 0.0);
  for (const auto& s : samples) {
    for (std::size_t a = 0; a < mean.size(); ++a) mean[a] += s.probs[a];
  }
  for (double& v : mean) v /= static_cast<double>(samples.size());
  return mean;
}

ExeLosses PersonaAgent::exe_losses(std::span<const double> features,
                                   const teachers::TeacherResponse& response, nn::Rng* rng) {
  const auto target = static_cast<std::size_t>(
      std::find(cfg_.actions.begin(), cfg_.actions.end(), response.exe_action) -
      cfg_.actions.begin());
  if (target >= cfg_.actions.size()) throw std::invalid_argument("teacher action outside action space");
  if (response.identity >= cfg_.n_teachers) throw std::out_of_range("teacher identity out of range");

  ExeLosses losses;

  auto x = policy_input(features, response.identity);
  std::vector<double> mask;
  if (cfg_.train_with_dropout && cfg_.dropout_rate > 0.0) {
    if (!rng) throw std::invalid_argument("training with dropout needs an rng");
    mask = sample_posterior_mask(*rng);
    x = nn::apply_mask(x, mask);
  }
  nn::Mlp::Cache policy_cache;
  const auto logits = policy_net_.forward(policy_params_, x, &policy_cache);
  const auto nll = nn::softmax_nll(logits, target);
  losses.policy = nll.loss;
  auto grad_x = policy_net_.backward(policy_params_, policy_cache, nll.grad);
  if (!mask.empty()) grad_x = nn::apply_mask(grad_x, mask);
  personas_.backward(policy_params_, response.identity,
                     std::span<const double>(grad_x).subspan(cfg_.feature_width));

  nn::Mlp::Cache identity_cache;
  const auto id_logits = identity_net_.forward(identity_params_, features, &identity_cache);
  const auto id_nll = nn::softmax_nll(id_logits, response.identity);
  losses.identity = id_nll.loss;
  identity_net_.backward(identity_params_, identity_cache, id_nll.grad);

  ++pending_terms_;
  return losses;
}

env::ExeAction PersonaAgent::act(std::span<const double> features, bool queried,
                                 const std::optional<teachers::TeacherResponse>& response,
                                 nn::Rng& rng, int n_samples, bool greedy) const {
  if (queried) {
    if (!response) throw std::invalid_argument("queried step without a teacher response");
    return response->exe_action;
  }
  const auto mean = mean_exe_policy(features, n_samples, rng);
  const std::size_t idx =
      greedy ? static_cast<std::size_t>(std::max_element(mean.begin(), mean.end()) - mean.begin())
             : nn::sample_categorical(mean, rng);
  return cfg_.actions[idx];
}

bool PersonaAgent::update() {
  if (pending_terms_ == 0) return false;
  nn::adam_step(policy_params_, policy_adam_);
  nn::adam_step(identity_params_, identity_adam_);
  pending_terms_ = 0;
  return true;
}

std::vector<nn::CheckpointGroup> PersonaAgent::checkpoint_groups() {
  return {{"agent", &policy_params_}, {"agent", &identity_params_}};
}

}  // namespace apil::agent
