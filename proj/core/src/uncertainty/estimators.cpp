#include "apil/uncertainty/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace apil::uncertainty {

void validate(const UncertaintyConfig& cfg) {
  if (cfg.n1 < 1) throw std::invalid_argument("n1 must be at least 1");
  if (cfg.n2 < 1) throw std::invalid_argument("n2 must be at least 1");
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

UncertaintyReport decompose(const PolicyDraws& draws) {
  if (draws.empty()) throw std::invalid_argument("no parameter draws");
  const std::size_t width = draws.front().empty() ? 0 : draws.front().front().size();
  if (width == 0) throw std::invalid_argument("empty policy sample");

  UncertaintyReport r;
  r.config.n2 = static_cast<int>(draws.size());
  r.config.n1 = static_cast<int>(draws.front().size());
  std::vector<double> grand_mean(width, 0.0);
  double sum_intrinsic = 0.0;
  double sum_extrinsic = 0.0;
  double sum_behavioral = 0.0;
  for (const auto& group : draws) {
    if (group.empty()) throw std::invalid_argument("parameter draw without policy samples");
    std::vector<double> mean(width, 0.0);
    double mean_entropy = 0.0;
    for (const auto& pi : group) {
      if (pi.size() != width) throw std::invalid_argument("policy width mismatch");
      for (std::size_t a = 0; a < width; ++a) mean[a] += pi[a];
      mean_entropy += entropy(pi);
    }
    const double n = static_cast<double>(group.size());
    for (double& v : mean) v /= n;
    mean_entropy /= n;
    const double behavioral = entropy(mean);
    sum_intrinsic += mean_entropy;
    sum_extrinsic += behavioral - mean_entropy;
    sum_behavioral += behavioral;
    for (std::size_t a = 0; a < width; ++a) grand_mean[a] += mean[a];
  }
  const double n2 = static_cast<double>(draws.size());
  for (double& v : grand_mean) v /= n2;
  r.intrinsic = sum_intrinsic / n2;
  r.extrinsic = sum_extrinsic / n2;
  r.behavioral = r.intrinsic + r.extrinsic;
  r.total = entropy(grand_mean);
  r.model = r.total - r.behavioral;
  return r;
}

UncertaintyReport estimate(const agent::PersonaAgent& agent, std::span<const double> features,
                           const UncertaintyConfig& cfg, nn::Rng& rng) {
  validate(cfg);
  PolicyDraws draws;
  draws.reserve(static_cast<std::size_t>(cfg.n2));
  for (int i = 0; i < cfg.n2; ++i) {
    const auto mask = agent.sample_posterior_mask(rng);
    auto samples = agent.sample_policies(features, cfg.n1, rng, mask);
    std::vector<agent::ProbVec> group;
    group.reserve(samples.size());
    for (auto& s : samples) group.push_back(std::move(s.probs));
    draws.push_back(std::move(group));
  }
  auto r = decompose(draws);
  r.config = cfg;
  return r;
}

UncertaintyReport mean_report(std::span<const UncertaintyReport> reports) {
  if (reports.empty()) throw std::invalid_argument("mean of no reports");
  UncertaintyReport m;
  m.config = reports.front().config;
  m.state_id = "mean";
  for (const auto& r : reports) {
    m.intrinsic += r.intrinsic;
    m.extrinsic += r.extrinsic;
    m.total += r.total;
  }
  const double n = static_cast<double>(reports.size());
  m.intrinsic /= n;
  m.extrinsic /= n;
  m.total /= n;
  m.behavioral = m.intrinsic + m.extrinsic;
  m.model = m.total - m.behavioral;
  return m;
}

VarianceDecomposition variance_decomposition(std::span<const double> means,
                                             std::span<const double> variances,
                                             std::span<const double> weights) {
  if (means.size() != weights.size() || variances.size() != weights.size() || weights.empty()) {
    throw std::invalid_argument("variance decomposition needs equally sized, non-empty inputs");
  }
  VarianceDecomposition d;
  double m_bar = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (variances[k] < 0.0) {
      throw std::invalid_argument("negative variance for component " + std::to_string(k));
    }
    d.intrinsic += weights[k] * variances[k];
    m_bar += weights[k] * means[k];
  }
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double dev = means[k] - m_bar;
    d.extrinsic += weights[k] * dev * dev;
  }
  d.total = d.intrinsic + d.extrinsic;
  return d;
}

std::vector<InflationSeries> sampling_inflation_sweep(
    std::span<const agent::PersonaAgent* const> stages,
    const std::vector<std::vector<double>>& states, std::span<const int> n1_values,
    const UncertaintyConfig& cfg, nn::Rng& rng) {
  if (states.empty()) throw std::invalid_argument("inflation sweep needs probe states");
  std::vector<InflationSeries> out;
  for (int n1 : n1_values) {
    UncertaintyConfig c = cfg;
    c.n1 = n1;
    validate(c);
    InflationSeries series{n1, {}};
    for (const auto* stage : stages) {
      double sum = 0.0;
      for (const auto& s : states) sum += estimate(*stage, s, c, rng).model;
      series.model.push_back(sum / static_cast<double>(states.size()));
    }
    out.push_back(std::move(series));
  }
  return out;
}

}  // namespace apil::uncertainty
