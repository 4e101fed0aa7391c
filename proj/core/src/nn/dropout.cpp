#include "apil/nn/dropout.hpp"

#include <stdexcept>

namespace apil::nn {

std::vector<double> sample_dropout_mask(const DropoutSpec& spec, std::size_t width, Rng& rng) {
  if (width == 0) throw std::invalid_argument("dropout mask width must be positive");
  if (!(spec.rate >= 0.0 && spec.rate < 1.0)) {
    throw std::invalid_argument("dropout rate must lie in [0, 1)");
  }
  std::vector<double> mask(width, 1.0);
  if (spec.rate == 0.0) return mask;
  const double keep = 1.0 / (1.0 - spec.rate);
  std::bernoulli_distribution drop(spec.rate);
  for (double& m : mask) m = drop(rng) ? 0.0 : keep;
  return mask;
}

std::vector<double> apply_mask(std::span<const double> x, std::span<const double> mask) {
  if (x.size() != mask.size()) throw std::invalid_argument("dropout mask width mismatch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * mask[i];
  return out;
}

}  // namespace apil::nn
