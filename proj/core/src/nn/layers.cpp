#include "apil/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace apil::nn {

Dense::Dense(ParamSet& params, const std::string& name, std::size_t in, std::size_t out,
             Activation activation)
    : in_(in), out_(out), activation_(activation) {
  if (in == 0 || out == 0) throw std::invalid_argument("dense layer widths must be positive");
  weight_ = params.add(name + ".weight", {out, in});
  bias_ = params.add(name + ".bias", {out});
}

void Dense::init(ParamSet& params, Rng& rng) const {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& w : params.value(weight_).values()) w = dist(rng);
  for (double& b : params.value(bias_).values()) b = dist(rng);
}

std::vector<double> Dense::forward(const ParamSet& params, std::span<const double> x,
                                   Cache* cache) const {
  if (x.size() != in_) {
    throw std::invalid_argument("dense layer expects input width " + std::to_string(in_) +
                                ", got " + std::to_string(x.size()));
  }
  const Tensor& w = params.value(weight_);
  const Tensor& b = params.value(bias_);
  std::vector<double> y(out_);
  for (std::size_t o = 0; o < out_; ++o) {
    const double* row = w.data() + o * in_;
    double acc = b[o];
    for (std::size_t i = 0; i < in_; ++i) acc += row[i] * x[i];
    y[o] = activation_ == Activation::tanh ? std::tanh(acc) : acc;
  }
  if (cache) {
    cache->input.assign(x.begin(), x.end());
    cache->output = y;
  }
  return y;
}

std::vector<double> Dense::backward(ParamSet& params, const Cache& cache,
                                    std::span<const double> grad_output) const {
  if (grad_output.size() != out_ || cache.input.size() != in_) {
    throw std::invalid_argument("dense backward shape mismatch");
  }
  const Tensor& w = params.value(weight_);
  Tensor& gw = params.grad(weight_);
  Tensor& gb = params.grad(bias_);
  std::vector<double> grad_in(in_, 0.0);
  for (std::size_t o = 0; o < out_; ++o) {
    double g = grad_output[o];
    if (activation_ == Activation::tanh) g *= 1.0 - cache.output[o] * cache.output[o];
    if (g == 0.0) continue;
    gb[o] += g;
    const double* row = w.data() + o * in_;
    double* grow = gw.data() + o * in_;
    for (std::size_t i = 0; i < in_; ++i) {
      grow[i] += g * cache.input[i];
      grad_in[i] += g * row[i];
    }
  }
  return grad_in;
}

std::vector<double> dense_forward(const ParamSet& params, const Dense& layer,
                                  std::span<const double> x, Dense::Cache* cache) {
  return layer.forward(params, x, cache);
}

Embedding::Embedding(ParamSet& params, const std::string& name, std::size_t rows,
                     std::size_t width)
    : rows_(rows), width_(width) {
  if (rows == 0 || width == 0) throw std::invalid_argument("embedding dimensions must be positive");
  table_ = params.add(name + ".table", {rows, width});
}

void Embedding::init(ParamSet& params, Rng& rng, double scale) const {
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (double& v : params.value(table_).values()) v = dist(rng);
}

std::vector<double> Embedding::lookup(const ParamSet& params, std::size_t k) const {
  if (k >= rows_) {
    throw std::out_of_range("embedding row " + std::to_string(k) + " out of range for " +
                            std::to_string(rows_) + " rows");
  }
  auto row = params.value(table_).row(k);
  return {row.begin(), row.end()};
}

void Embedding::backward(ParamSet& params, std::size_t k, std::span<const double> grad) const {
  if (k >= rows_) throw std::out_of_range("embedding row out of range");
  if (grad.size() != width_) throw std::invalid_argument("embedding gradient width mismatch");
  auto row = params.grad(table_).row(k);
  for (std::size_t i = 0; i < width_; ++i) row[i] += grad[i];
}

Mlp::Mlp(ParamSet& params, const std::string& name, std::size_t in, std::size_t hidden,
         std::size_t out)
    : hidden_(params, name + ".hidden", in, hidden, Activation::tanh),
      output_(params, name + ".output", hidden, out, Activation::identity) {}

void Mlp::init(ParamSet& params, Rng& rng) const {
  hidden_.init(params, rng);
  output_.init(params, rng);
}

std::vector<double> Mlp::forward(const ParamSet& params, std::span<const double> x,
                                 Cache* cache) const {
  auto h = hidden_.forward(params, x, cache ? &cache->hidden : nullptr);
  return output_.forward(params, h, cache ? &cache->output : nullptr);
}

std::vector<double> Mlp::backward(ParamSet& params, const Cache& cache,
                                  std::span<const double> grad_output) const {
  auto gh = output_.backward(params, cache.output, grad_output);
  return hidden_.backward(params, cache.hidden, gh);
}

}  // namespace apil::nn
