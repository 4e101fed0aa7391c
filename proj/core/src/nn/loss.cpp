#include "apil/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace apil::nn {

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax of empty logits");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

NllResult softmax_nll(std::span<const double> logits, std::size_t target) {
  if (target >= logits.size()) {
    throw std::out_of_range("nll target " + std::to_string(target) + " out of range for " +
                            std::to_string(logits.size()) + " classes");
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - mx);
  const double log_z = mx + std::log(z);

  NllResult r;
  r.probs = softmax(logits);
  r.loss = log_z - logits[target];
  r.grad = r.probs;
  r.grad[target] -= 1.0;
  return r;
}

SquaredErrorResult squared_error(double prediction, double target) noexcept {
  const double diff = prediction - target;
  return {0.5 * diff * diff, diff};
}

}  // namespace apil::nn
