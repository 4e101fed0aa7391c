#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "apil/nn/adam.hpp"
#include "apil/nn/checkpoint.hpp"
#include "apil/nn/layers.hpp"
#include "apil/nn/random.hpp"
#include "apil/query/labels.hpp"

namespace apil::query {

struct QueryNetConfig {
  std::size_t feature_width = 25;
  std::size_t n_actions = 2;
  int horizon = 8;
  std::size_t time_width = 16;
  std::size_t hidden = 100;
  nn::AdamConfig adam;
};

/// Query policy over {continue, query} from the state features, the agent's
/// mean execution policy and a learned embedding of the remaining steps.
class QueryNet {
 public:
  QueryNet(QueryNetConfig cfg, nn::Rng& init_rng);

  const QueryNetConfig& config() const noexcept { return cfg_; }
  std::size_t input_width() const noexcept {
    return cfg_.feature_width + cfg_.n_actions + cfg_.time_width;
  }

  /// Softmax logits; index 0 = continue, 1 = query.
  std::vector<double> logits(const QueryInput& in) const;
  std::vector<double> probs(const QueryInput& in) const;
  AskAction sample(const QueryInput& in, nn::Rng& rng) const;
  AskAction greedy(const QueryInput& in) const;

  /// Backpropagates dloss/dlogits for one input into the gradient accumulators.
  void backward_logits(const QueryInput& in, std::span<const double> grad_logits);

  /// One Adam step when gradients were accumulated since the last update.
  bool update();
  bool has_pending() const noexcept { return pending_; }
  void zero_grad() { params_.zero_grad(); pending_ = false; }

  nn::ParamSet& params() noexcept { return params_; }
  const nn::ParamSet& params() const noexcept { return params_; }
  /// Concatenated gradient accumulators in parameter order.
  std::vector<double> flat_grad() const;

  std::vector<nn::CheckpointGroup> checkpoint_groups() { return {{"query", &params_}}; }

 private:
  std::vector<double> assemble(const QueryInput& in) const;

  QueryNetConfig cfg_;
  nn::ParamSet params_;
  nn::Embedding time_;
  nn::Mlp net_;
  nn::AdamState adam_;
  bool pending_ = false;
};

std::size_t ask_index(AskAction a) noexcept;
AskAction ask_from_index(std::size_t i) noexcept;

/// Sum over steps of NLL(label) for labels other than ignore; gradients are
/// accumulated into the net.
double query_imitation_loss(QueryNet& net, std::span<const QueryInput> inputs,
                            std::span<const AskLabel> labels);

/// REINFORCE surrogate of the query-minimisation objective for one sampled
/// action: -log pi(a) * 1{a != query}. Gradients are accumulated.
double reinforce_query_min_loss(QueryNet& net, const QueryInput& input, AskAction agent_action);

/// Compares, at a progressable state, the gradient of the ignore-variant
/// imitation loss with the REINFORCE gradient of the query-minimisation
/// objective. Returns the max absolute elementwise difference. `net` is
/// copied; its accumulators are not touched.
double ignore_reinforce_gradient_gap(const QueryNet& net, const QueryInput& input, AskAction agent_action);

}  // namespace apil::query
