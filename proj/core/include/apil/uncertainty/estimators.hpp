#pragma once

#include <span>
#include <string>
#include <vector>

#include "apil/agent/persona_agent.hpp"
#include "apil/nn/random.hpp"

namespace apil::uncertainty {

struct UncertaintyConfig {
  /// Policy samples per parameter draw.
  int n1 = 5;
  /// Parameter (dropout) draws.
  int n2 = 10;
};

void validate(const UncertaintyConfig& cfg);

/// All values in nats. behavioral == intrinsic + extrinsic and
/// total == model + behavioral hold up to rounding by construction.
struct UncertaintyReport {
  double intrinsic = 0.0;
  double extrinsic = 0.0;
  double behavioral = 0.0;
  double total = 0.0;
  double model = 0.0;
  UncertaintyConfig config;
  std::string state_id;
};

/// Shannon entropy in nats with 0 log 0 = 0.
double entropy(std::span<const double> p);

/// Policy samples grouped by parameter draw: draws[i][j] is the j-th policy
/// sampled under the i-th parameter draw. All groups must be non-empty and all
/// policies must have the same width.
using PolicyDraws = std::vector<std::vector<agent::ProbVec>>;

/// Entropy decomposition of a fixed set of Monte-Carlo samples:
/// per draw, intrinsic = mean entropy, behavioral = entropy of the mean,
/// extrinsic = their difference; total = entropy of the grand mean and
/// model = total - mean behavioral. Per-draw values are averaged.
UncertaintyReport decompose(const PolicyDraws& draws);

/// Samples n2 dropout masks from the agent's posterior and n1 policies under
/// each, then decomposes.
UncertaintyReport estimate(const agent::PersonaAgent& agent, std::span<const double> features,
                           const UncertaintyConfig& cfg, nn::Rng& rng);

/// Elementwise mean of the numeric fields. Throws on an empty list.
UncertaintyReport mean_report(std::span<const UncertaintyReport> reports);

struct VarianceDecomposition {
  double total = 0.0;
  double intrinsic = 0.0;
  double extrinsic = 0.0;
};

/// Law of total variance for a weighted mixture of components with the given
/// means and variances. Throws std::invalid_argument on mismatched lengths or
/// a negative variance.
VarianceDecomposition variance_decomposition(std::span<const double> means,
                                             std::span<const double> variances,
                                             std::span<const double> weights);

struct InflationSeries {
  int n1 = 0;
  /// State-averaged model uncertainty, one value per training stage.
  std::vector<double> model;
};

/// Model-uncertainty estimates of several agent snapshots (training stages)
/// averaged over `states`, repeated for each n1 in n1_values; cfg.n2 is kept.
std::vector<InflationSeries> sampling_inflation_sweep(
    std::span<const agent::PersonaAgent* const> stages,
    const std::vector<std::vector<double>>& states, std::span<const int> n1_values,
    const UncertaintyConfig& cfg, nn::Rng& rng);

}  // namespace apil::uncertainty
