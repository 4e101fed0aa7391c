#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "apil/nn/adam.hpp"
#include "apil/nn/checkpoint.hpp"
#include "apil/nn/layers.hpp"
#include "apil/query/labels.hpp"
#include "apil/uncertainty/estimators.hpp"

namespace apil::query {

enum class ThresholdKind { intrinsic, extrinsic, behavioral };

/// query iff the selected uncertainty is strictly greater than tau.
AskAction threshold_policy(ThresholdKind kind, double tau,
                           const uncertainty::UncertaintyReport& report) noexcept;

constexpr AskAction always_query() noexcept { return AskAction::query; }
constexpr AskAction never_query() noexcept { return AskAction::continue_; }

struct ErrorPredictorConfig {
  std::size_t feature_width = 25;
  std::size_t n_actions = 2;
  std::size_t hidden = 100;
  double threshold = 0.5;
  nn::AdamConfig adam;
};

/// Regresses the margin 1 - pi_exe(a*|s) from the state and the mean
/// execution policy. Starts out predicting exactly 1.0 so that an untrained
/// predictor always queries.
class ErrorPredictor {
 public:
  ErrorPredictor(ErrorPredictorConfig cfg, nn::Rng& init_rng);

  const ErrorPredictorConfig& config() const noexcept { return cfg_; }
  double predict(std::span<const double> features, std::span<const double> mean_policy) const;
  AskAction decide(std::span<const double> features, std::span<const double> mean_policy) const;

  /// Squared-error loss 0.5 (prediction - margin)^2; gradients accumulate.
  double accumulate(std::span<const double> features, std::span<const double> mean_policy,
                    double margin);
  bool update();

  nn::ParamSet& params() noexcept { return params_; }
  const nn::ParamSet& params() const noexcept { return params_; }
  std::vector<nn::CheckpointGroup> checkpoint_groups() { return {{"errpred", &params_}}; }

 private:
  std::vector<double> assemble(std::span<const double> features,
                               std::span<const double> mean_policy) const;

  ErrorPredictorConfig cfg_;
  nn::ParamSet params_;
  nn::Mlp net_;
  nn::AdamState adam_;
  bool pending_ = false;
};

/// 1 - pi(a*|s).
double margin(std::span<const double> mean_policy, std::size_t teacher_action);

}  // namespace apil::query
