#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace apil::nn {

/// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);

struct NllResult {
  std::vector<double> probs;
  double loss = 0.0;
  /// dloss/dlogits = probs - onehot(target).
  std::vector<double> grad;
};

/// Negative log-likelihood of `target` under softmax(logits). The loss is
/// evaluated through log-sum-exp so saturated logits do not overflow.
NllResult softmax_nll(std::span<const double> logits, std::size_t target);

struct SquaredErrorResult {
  double loss = 0.0;
  double grad = 0.0;
};

/// 0.5 * (prediction - target)^2 and its derivative in the prediction.
SquaredErrorResult squared_error(double prediction, double target) noexcept;

}  // namespace apil::nn
