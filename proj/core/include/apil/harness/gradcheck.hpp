#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "apil/nn/params.hpp"

namespace apil::harness {

struct GradCheckConfig {
  int cases = 100;
  std::uint64_t seed = 0;
  double step = 1e-5;
  double tolerance = 1e-4;
};

struct GradCheckResult {
  std::string suite;
  int cases = 0;
  double max_rel_error = 0.0;
  bool passed = false;
};

/// ||a - n|| / max(||a||, ||n||, 1e-8).
double relative_error(std::span<const double> analytic, std::span<const double> numeric);

/// Central differences of `loss` with respect to every scalar in `values`,
/// restoring each entry after probing.
std::vector<double> numeric_gradient(std::span<double> values, const std::function<double()>& loss,
                                     double step);

/// Central differences with respect to every parameter of every set, in order.
std::vector<double> numeric_gradient(std::span<nn::ParamSet* const> sets,
                                     const std::function<double()>& loss, double step);

/// Concatenated gradient accumulators of the sets, in order.
std::vector<double> flat_grads(std::span<nn::ParamSet* const> sets);

GradCheckResult check_dense(const GradCheckConfig& cfg);
GradCheckResult check_embedding(const GradCheckConfig& cfg);
GradCheckResult check_softmax_nll(const GradCheckConfig& cfg);
GradCheckResult check_query_loss(const GradCheckConfig& cfg);
GradCheckResult check_errpred(const GradCheckConfig& cfg);

/// All five suites.
std::vector<GradCheckResult> run_gradchecks(const GradCheckConfig& cfg);

}  // namespace apil::harness
