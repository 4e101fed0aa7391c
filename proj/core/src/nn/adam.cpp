#include "apil/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace apil::nn {

AdamState::AdamState(const ParamSet& params, AdamConfig cfg) : config(cfg) {
  first_moment.reserve(params.size());
  second_moment.reserve(params.size());
  for (const auto& p : params) {
    first_moment.push_back(Tensor::zeros_like(p.value));
    second_moment.push_back(Tensor::zeros_like(p.value));
  }
}

void adam_step(ParamSet& params, AdamState& state) {
  if (state.first_moment.size() != params.size()) {
    throw std::invalid_argument("adam state does not match parameter set");
  }
  for (const auto& p : params) {
    if (!p.grad.all_finite()) throw std::domain_error("non-finite gradient in parameter " + p.name);
  }
  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params.value(i).values();
    auto g = params.grad(i).values();
    auto m = state.first_moment[i].values();
    auto v = state.second_moment[i].values();
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      w[j] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
  params.zero_grad();
}

}  // namespace apil::nn
