#include "apil/query/query_net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "apil/nn/loss.hpp"

namespace apil::query {

std::size_t ask_index(AskAction a) noexcept { return a == AskAction::query ? 1 : 0; }
AskAction ask_from_index(std::size_t i) noexcept {
  return i == 1 ? AskAction::query : AskAction::continue_;
}

QueryNet::QueryNet(QueryNetConfig cfg, nn::Rng& init_rng) : cfg_(cfg) {
  if (cfg_.horizon < 1) throw std::invalid_argument("query net horizon must be positive");
  time_ = nn::Embedding(params_, "remaining", static_cast<std::size_t>(cfg_.horizon) + 1,
                        cfg_.time_width);
  net_ = nn::Mlp(params_, "ask", input_width(), cfg_.hidden, 2);
  time_.init(params_, init_rng, 1.0 / std::sqrt(static_cast<double>(cfg_.time_width)));
  net_.init(params_, init_rng);
  adam_ = nn::AdamState(params_, cfg_.adam);
}

std::vector<double> QueryNet::assemble(const QueryInput& in) const {
  if (in.features.size() != cfg_.feature_width || in.mean_policy.size() != cfg_.n_actions) {
    throw std::invalid_argument("query input has the wrong width");
  }
  if (in.remaining < 0 || in.remaining > cfg_.horizon) {
    throw std::out_of_range("remaining steps outside [0, T]");
  }
  std::vector<double> x;
  x.reserve(input_width());
  x.insert(x.end(), in.features.begin(), in.features.end());
  x.insert(x.end(), in.mean_policy.begin(), in.mean_policy.end());
  const auto t = time_.lookup(params_, static_cast<std::size_t>(in.remaining));
  x.insert(x.end(), t.begin(), t.end());
  return x;
}

std::vector<double> QueryNet::logits(const QueryInput& in) const {
  return net_.forward(params_, assemble(in));
}

std::vector<double> QueryNet::probs(const QueryInput& in) const { return nn::softmax(logits(in)); }

AskAction QueryNet::sample(const QueryInput& in, nn::Rng& rng) const {
  return ask_from_index(nn::sample_categorical(probs(in), rng));
}

AskAction QueryNet::greedy(const QueryInput& in) const {
  const auto l = logits(in);
  return l[1] > l[0] ? AskAction::query : AskAction::continue_;
}

void QueryNet::backward_logits(const QueryInput& in, std::span<const double> grad_logits) {
  nn::Mlp::Cache cache;
  net_.forward(params_, assemble(in), &cache);
  const auto gx = net_.backward(params_, cache, grad_logits);
  time_.backward(params_, static_cast<std::size_t>(in.remaining),
                 std::span<const double>(gx).subspan(cfg_.feature_width + cfg_.n_actions));
  pending_ = true;
}

bool QueryNet::update() {
  if (!pending_) return false;
  nn::adam_step(params_, adam_);
  pending_ = false;
  return true;
}

std::vector<double> QueryNet::flat_grad() const {
  std::vector<double> out;
  for (const auto& p : params_) out.insert(out.end(), p.grad.values().begin(), p.grad.values().end());
  return out;
}

double query_imitation_loss(QueryNet& net, std::span<const QueryInput> inputs,
                            std::span<const AskLabel> labels) {
  if (inputs.size() != labels.size()) throw std::invalid_argument("inputs and labels differ in length");
  double total = 0.0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    if (labels[t] == AskLabel::ignore) continue;
    const auto target = labels[t] == AskLabel::query ? std::size_t{1} : std::size_t{0};
    const auto nll = nn::softmax_nll(net.logits(inputs[t]), target);
    total += nll.loss;
    net.backward_logits(inputs[t], nll.grad);
  }
  return total;
}

double reinforce_query_min_loss(QueryNet& net, const QueryInput& input, AskAction agent_action) {
  const double reward = agent_action == AskAction::query ? 0.0 : 1.0;
  if (reward == 0.0) return 0.0;
  const auto l = net.logits(input);
  const auto p = nn::softmax(l);
  const std::size_t a = ask_index(agent_action);
  // d/dlogits of -r * log softmax(l)[a] = r * (p - onehot(a)).
  std::vector<double> grad(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) grad[i] = reward * (p[i] - (i == a ? 1.0 : 0.0));
  net.backward_logits(input, grad);
  return -reward * std::log(p[a]);
}

double ignore_reinforce_gradient_gap(const QueryNet& net, const QueryInput& input, AskAction agent_action) {
  QueryNet imitate = net;
  imitate.zero_grad();
  const AskLabel label = ignore_label(true, agent_action);
  query_imitation_loss(imitate, std::span(&input, 1), std::span(&label, 1));

  QueryNet reinforce = net;
  reinforce.zero_grad();
  reinforce_query_min_loss(reinforce, input, agent_action);

  const auto a = imitate.flat_grad();
  const auto b = reinforce.flat_grad();
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
  return diff;
}

}  // namespace apil::query
