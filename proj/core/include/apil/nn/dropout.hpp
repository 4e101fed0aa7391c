#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "apil/nn/random.hpp"

namespace apil::nn {

struct DropoutSpec {
  double rate = 0.0;
  /// Name of the layer input the mask applies to.
  std::string target;
};

/// Inverted-dropout mask: each entry is 0 with probability `rate` and
/// 1/(1-rate) otherwise, so the mask has unit expectation. Throws
/// std::invalid_argument for width == 0 or a rate outside [0, 1).
std::vector<double> sample_dropout_mask(const DropoutSpec& spec, std::size_t width, Rng& rng);

/// x * mask elementwise.
std::vector<double> apply_mask(std::span<const double> x, std::span<const double> mask);

}  // namespace apil::nn
