#pragma once

#include <cstdint>
#include <vector>

#include "apil/nn/params.hpp"

namespace apil::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;

  AdamState() = default;
  AdamState(const ParamSet& params, AdamConfig cfg);

  bool operator==(const AdamState&) const = default;
};

/// One bias-corrected Adam update using the accumulated gradients, which are
/// zeroed afterwards. Throws std::domain_error naming the first parameter
/// whose gradient is not finite; nothing is modified in that case.
void adam_step(ParamSet& params, AdamState& state);

}  // namespace apil::nn
