#include "apil/harness/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "apil/agent/persona_agent.hpp"
#include "apil/nn/layers.hpp"
#include "apil/nn/loss.hpp"
#include "apil/nn/random.hpp"
#include "apil/query/baselines.hpp"
#include "apil/query/query_net.hpp"

namespace apil::harness {
namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> uniform_vector(std::size_t n, double lo, double hi, nn::Rng& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

std::size_t uniform_index(std::size_t lo, std::size_t hi, nn::Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

void randomize(nn::ParamSet& params, nn::Rng& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& p : params) {
    for (auto& x : p.value.values()) x = u(rng);
  }
}

std::vector<double> random_prob_vec(std::size_t n, nn::Rng& rng) {
  auto v = uniform_vector(n, 0.05, 1.0, rng);
  double s = 0.0;
  for (double x : v) s += x;
  for (auto& x : v) x /= s;
  return v;
}

struct Tally {
  GradCheckResult result;
  double tol;

  void add(double rel) {
    ++result.cases;
    result.max_rel_error = std::max(result.max_rel_error, rel);
  }
  GradCheckResult finish() {
    result.passed = result.max_rel_error < tol;
    return result;
  }
};

}  // namespace

double relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) return INFINITY;
  double d = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    d += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
  }
  return std::sqrt(d) / std::max({norm(analytic), norm(numeric), 1e-8});
}

std::vector<double> numeric_gradient(std::span<double> values, const std::function<double()>& loss,
                                     double step) {
  std::vector<double> g(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + step;
    const double up = loss();
    values[i] = saved - step;
    const double down = loss();
    values[i] = saved;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

std::vector<double> numeric_gradient(std::span<nn::ParamSet* const> sets,
                                     const std::function<double()>& loss, double step) {
  std::vector<double> out;
  for (auto* set : sets) {
    for (auto& p : *set) {
      const auto g = numeric_gradient(p.value.values(), loss, step);
      out.insert(out.end(), g.begin(), g.end());
    }
  }
  return out;
}

std::vector<double> flat_grads(std::span<nn::ParamSet* const> sets) {
  std::vector<double> out;
  for (const auto* set : sets) {
    for (const auto& p : *set) out.insert(out.end(), p.grad.values().begin(), p.grad.values().end());
  }
  return out;
}

GradCheckResult check_dense(const GradCheckConfig& cfg) {
  auto rng = nn::make_stream(cfg.seed, 101);
  Tally tally{{"dense"}, cfg.tolerance};
  for (int c = 0; c < cfg.cases; ++c) {
    const auto in = uniform_index(1, 8, rng);
    const auto out = uniform_index(1, 8, rng);
    const auto act = uniform_index(0, 1, rng) == 0 ? nn::Activation::identity : nn::Activation::tanh;
    nn::ParamSet params;
    nn::Dense layer(params, "d", in, out, act);
    randomize(params, rng, 1.0);
    auto x = uniform_vector(in, -1.0, 1.0, rng);
    const auto coef = uniform_vector(out, -1.0, 1.0, rng);

    auto loss = [&] {
      const auto y = layer.forward(params, x);
      double s = 0.0;
      for (std::size_t i = 0; i < out; ++i) s += coef[i] * y[i];
      return s;
    };
    nn::Dense::Cache cache;
    layer.forward(params, x, &cache);
    params.zero_grad();
    auto analytic_x = layer.backward(params, cache, coef);
    nn::ParamSet* sets[] = {&params};
    auto analytic = flat_grads(sets);
    analytic.insert(analytic.end(), analytic_x.begin(), analytic_x.end());

    auto numeric = numeric_gradient(sets, loss, cfg.step);
    const auto numeric_x = numeric_gradient(x, loss, cfg.step);
    numeric.insert(numeric.end(), numeric_x.begin(), numeric_x.end());
    tally.add(relative_error(analytic, numeric));
  }
  return tally.finish();
}

GradCheckResult check_embedding(const GradCheckConfig& cfg) {
  // Persona rows reach the loss through the persona-conditioned policy, so
  // the embedding check runs through the whole execution-loss path.
  auto rng = nn::make_stream(cfg.seed, 102);
  Tally tally{{"embedding"}, cfg.tolerance};
  for (int c = 0; c < cfg.cases; ++c) {
    agent::AgentConfig a;
    a.feature_width = uniform_index(2, 6, rng);
    a.actions = uniform_index(0, 1, rng) == 0
                    ? std::vector<env::ExeAction>{env::ExeAction::right, env::ExeAction::down}
                    : std::vector<env::ExeAction>{env::ExeAction::up, env::ExeAction::right,
                                                  env::ExeAction::down, env::ExeAction::left};
    a.n_teachers = uniform_index(1, 3, rng);
    a.hidden = uniform_index(2, 8, rng);
    a.persona_width = uniform_index(1, 5, rng);
    a.train_with_dropout = uniform_index(0, 1, rng) == 1;
    agent::PersonaAgent agent(a, rng);
    randomize(agent.policy_params(), rng, 1.0);
    randomize(agent.identity_params(), rng, 1.0);

    const auto features = uniform_vector(a.feature_width, 0.0, 1.0, rng);
    teachers::TeacherResponse response{a.actions[uniform_index(0, a.actions.size() - 1, rng)],
                                       uniform_index(0, a.n_teachers - 1, rng), 0.0};
    // Every evaluation replays the same dropout mask.
    const auto mask_seed = rng();
    auto loss = [&] {
      nn::Rng mask_rng(mask_seed);
      const auto l = agent.exe_losses(features, response, &mask_rng);
      return l.policy + l.identity;
    };
    agent.policy_params().zero_grad();
    agent.identity_params().zero_grad();
    loss();
    nn::ParamSet* sets[] = {&agent.policy_params(), &agent.identity_params()};
    const auto analytic = flat_grads(sets);
    const auto numeric = numeric_gradient(sets, loss, cfg.step);
    tally.add(relative_error(analytic, numeric));
  }
  return tally.finish();
}

GradCheckResult check_softmax_nll(const GradCheckConfig& cfg) {
  auto rng = nn::make_stream(cfg.seed, 103);
  Tally tally{{"softmax_nll"}, cfg.tolerance};
  for (int c = 0; c < cfg.cases; ++c) {
    const auto n = uniform_index(2, 8, rng);
    auto logits = uniform_vector(n, -4.0, 4.0, rng);
    const auto target = uniform_index(0, n - 1, rng);
    const auto analytic = nn::softmax_nll(logits, target).grad;
    const auto numeric =
        numeric_gradient(logits, [&] { return nn::softmax_nll(logits, target).loss; }, cfg.step);
    tally.add(relative_error(analytic, numeric));
  }
  return tally.finish();
}

GradCheckResult check_query_loss(const GradCheckConfig& cfg) {
  auto rng = nn::make_stream(cfg.seed, 104);
  Tally tally{{"query_loss"}, cfg.tolerance};
  for (int c = 0; c < cfg.cases; ++c) {
    query::QueryNetConfig q;
    q.feature_width = uniform_index(2, 6, rng);
    q.n_actions = uniform_index(2, 4, rng);
    q.horizon = static_cast<int>(uniform_index(1, 8, rng));
    q.time_width = uniform_index(1, 4, rng);
    q.hidden = uniform_index(2, 8, rng);
    query::QueryNet net(q, rng);
    randomize(net.params(), rng, 1.0);

    const auto steps = uniform_index(1, static_cast<std::size_t>(q.horizon), rng);
    std::vector<query::QueryInput> inputs;
    std::vector<query::AskLabel> labels;
    for (std::size_t t = 0; t < steps; ++t) {
      inputs.push_back({uniform_vector(q.feature_width, 0.0, 1.0, rng),
                        random_prob_vec(q.n_actions, rng), q.horizon - static_cast<int>(t)});
      labels.push_back(static_cast<query::AskLabel>(uniform_index(0, 2, rng)));
    }
    if (std::all_of(labels.begin(), labels.end(),
                    [](auto l) { return l == query::AskLabel::ignore; })) {
      labels.front() = query::AskLabel::query;
    }

    net.zero_grad();
    query::query_imitation_loss(net, inputs, labels);
    const auto analytic = net.flat_grad();
    nn::ParamSet* sets[] = {&net.params()};
    const auto numeric =
        numeric_gradient(sets, [&] { return query::query_imitation_loss(net, inputs, labels); },
                         cfg.step);
    tally.add(relative_error(analytic, numeric));
  }
  return tally.finish();
}

GradCheckResult check_errpred(const GradCheckConfig& cfg) {
  auto rng = nn::make_stream(cfg.seed, 105);
  Tally tally{{"errpred"}, cfg.tolerance};
  for (int c = 0; c < cfg.cases; ++c) {
    query::ErrorPredictorConfig e;
    e.feature_width = uniform_index(2, 6, rng);
    e.n_actions = uniform_index(2, 4, rng);
    e.hidden = uniform_index(2, 8, rng);
    query::ErrorPredictor pred(e, rng);
    randomize(pred.params(), rng, 1.0);
    const auto features = uniform_vector(e.feature_width, 0.0, 1.0, rng);
    const auto mean = random_prob_vec(e.n_actions, rng);
    const double target = query::margin(mean, uniform_index(0, e.n_actions - 1, rng));

    auto loss = [&] { return pred.accumulate(features, mean, target); };
    pred.params().zero_grad();
    loss();
    nn::ParamSet* sets[] = {&pred.params()};
    const auto analytic = flat_grads(sets);
    const auto numeric = numeric_gradient(sets, loss, cfg.step);
    tally.add(relative_error(analytic, numeric));
  }
  return tally.finish();
}

std::vector<GradCheckResult> run_gradchecks(const GradCheckConfig& cfg) {
  return {check_dense(cfg), check_embedding(cfg), check_softmax_nll(cfg), check_query_loss(cfg),
          check_errpred(cfg)};
}

}  // namespace apil::harness
