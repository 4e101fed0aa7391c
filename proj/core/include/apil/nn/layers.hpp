#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "apil/nn/params.hpp"
#include "apil/nn/random.hpp"

namespace apil::nn {

enum class Activation { identity, tanh };

/// Fully connected layer y = act(W x + b) with W stored as [out, in].
class Dense {
 public:
  struct Cache {
    std::vector<double> input;
    std::vector<double> output;
  };

  Dense() = default;
  Dense(ParamSet& params, const std::string& name, std::size_t in, std::size_t out,
        Activation activation);

  std::size_t in_width() const noexcept { return in_; }
  std::size_t out_width() const noexcept { return out_; }
  std::size_t weight_index() const noexcept { return weight_; }
  std::size_t bias_index() const noexcept { return bias_; }
  Activation activation() const noexcept { return activation_; }

  /// Uniform in [-1/sqrt(in), 1/sqrt(in)] for both weights and biases.
  void init(ParamSet& params, Rng& rng) const;

  /// Throws std::invalid_argument when x.size() != in_width().
  std::vector<double> forward(const ParamSet& params, std::span<const double> x,
                              Cache* cache = nullptr) const;

  /// Accumulates dL/dW and dL/db into params and returns dL/dx.
  std::vector<double> backward(ParamSet& params, const Cache& cache,
                               std::span<const double> grad_output) const;

 private:
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  std::size_t weight_ = 0;
  std::size_t bias_ = 0;
  Activation activation_ = Activation::identity;
};

/// Free-function form of Dense::forward for a layer described by its
/// parameter indices.
std::vector<double> dense_forward(const ParamSet& params, const Dense& layer,
                                  std::span<const double> x, Dense::Cache* cache = nullptr);

/// Lookup table of `rows` vectors of width `width`.
class Embedding {
 public:
  Embedding() = default;
  Embedding(ParamSet& params, const std::string& name, std::size_t rows, std::size_t width);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t table_index() const noexcept { return table_; }

  void init(ParamSet& params, Rng& rng, double scale) const;

  /// Row k; throws std::out_of_range when k >= rows().
  std::vector<double> lookup(const ParamSet& params, std::size_t k) const;
  /// Adds grad into row k of the table's gradient.
  void backward(ParamSet& params, std::size_t k, std::span<const double> grad) const;

 private:
  std::size_t rows_ = 0;
  std::size_t width_ = 0;
  std::size_t table_ = 0;
};

/// One tanh hidden layer followed by a linear output layer.
class Mlp {
 public:
  struct Cache {
    Dense::Cache hidden;
    Dense::Cache output;
  };

  Mlp() = default;
  Mlp(ParamSet& params, const std::string& name, std::size_t in, std::size_t hidden,
      std::size_t out);

  std::size_t in_width() const noexcept { return hidden_.in_width(); }
  std::size_t out_width() const noexcept { return output_.out_width(); }
  const Dense& hidden_layer() const noexcept { return hidden_; }
  const Dense& output_layer() const noexcept { return output_; }

  void init(ParamSet& params, Rng& rng) const;
  std::vector<double> forward(const ParamSet& params, std::span<const double> x,
                              Cache* cache = nullptr) const;
  std::vector<double> backward(ParamSet& params, const Cache& cache,
                               std::span<const double> grad_output) const;

 private:
  Dense hidden_;
  Dense output_;
};

}  // namespace apil::nn
