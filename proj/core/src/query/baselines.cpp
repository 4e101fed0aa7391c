#include "apil/query/baselines.hpp"

#include <stdexcept>

#include "apil/nn/loss.hpp"

namespace apil::query {

AskAction threshold_policy(ThresholdKind kind, double tau,
                           const uncertainty::UncertaintyReport& report) noexcept {
  double u = 0.0;
  switch (kind) {
    case ThresholdKind::intrinsic: u = report.intrinsic; break;
    case ThresholdKind::extrinsic: u = report.extrinsic; break;
    case ThresholdKind::behavioral: u = report.behavioral; break;
  }
  return u > tau ? AskAction::query : AskAction::continue_;
}

ErrorPredictor::ErrorPredictor(ErrorPredictorConfig cfg, nn::Rng& init_rng) : cfg_(cfg) {
  net_ = nn::Mlp(params_, "errpred", cfg_.feature_width + cfg_.n_actions, cfg_.hidden, 1);
  net_.init(params_, init_rng);
  params_.value(net_.output_layer().weight_index()).fill(0.0);
  params_.value(net_.output_layer().bias_index()).fill(1.0);
  adam_ = nn::AdamState(params_, cfg_.adam);
}

std::vector<double> ErrorPredictor::assemble(std::span<const double> features,
                                             std::span<const double> mean_policy) const {
  if (features.size() != cfg_.feature_width || mean_policy.size() != cfg_.n_actions) {
    throw std::invalid_argument("error predictor input has the wrong width");
  }
  std::vector<double> x(features.begin(), features.end());
  x.insert(x.end(), mean_policy.begin(), mean_policy.end());
  return x;
}

double ErrorPredictor::predict(std::span<const double> features,
                               std::span<const double> mean_policy) const {
  return net_.forward(params_, assemble(features, mean_policy))[0];
}

AskAction ErrorPredictor::decide(std::span<const double> features,
                                 std::span<const double> mean_policy) const {
  return predict(features, mean_policy) > cfg_.threshold ? AskAction::query : AskAction::continue_;
}

double ErrorPredictor::accumulate(std::span<const double> features,
                                  std::span<const double> mean_policy, double margin) {
  nn::Mlp::Cache cache;
  const auto y = net_.forward(params_, assemble(features, mean_policy), &cache);
  const auto se = nn::squared_error(y[0], margin);
  const double g = se.grad;
  net_.backward(params_, cache, std::span(&g, 1));
  pending_ = true;
  return se.loss;
}

bool ErrorPredictor::update() {
  if (!pending_) return false;
  nn::adam_step(params_, adam_);
  pending_ = false;
  return true;
}

double margin(std::span<const double> mean_policy, std::size_t teacher_action) {
  if (teacher_action >= mean_policy.size()) throw std::out_of_range("teacher action out of range");
  return 1.0 - mean_policy[teacher_action];
}

}  // namespace apil::query
