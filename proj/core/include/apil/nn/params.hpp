#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "apil/nn/tensor.hpp"

namespace apil::nn {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  bool operator==(const Parameter&) const = default;
};

/// Owns a group of named parameters together with their gradient
/// accumulators. Layers refer to their parameters by index into the set.
class ParamSet {
 public:
  /// Registers a zero-initialised parameter. Names must be unique.
  std::size_t add(std::string name, std::vector<std::size_t> shape);

  std::size_t size() const noexcept { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_.at(i); }
  const Parameter& operator[](std::size_t i) const { return params_.at(i); }

  Tensor& value(std::size_t i) { return params_.at(i).value; }
  const Tensor& value(std::size_t i) const { return params_.at(i).value; }
  Tensor& grad(std::size_t i) { return params_.at(i).grad; }
  const Tensor& grad(std::size_t i) const { return params_.at(i).grad; }

  /// Index of the parameter called `name`; throws std::out_of_range.
  std::size_t index_of(std::string_view name) const;

  void zero_grad() noexcept;
  std::size_t scalar_count() const noexcept;

  auto begin() noexcept { return params_.begin(); }
  auto end() noexcept { return params_.end(); }
  auto begin() const noexcept { return params_.begin(); }
  auto end() const noexcept { return params_.end(); }

  bool operator==(const ParamSet&) const = default;

 private:
  std::vector<Parameter> params_;
};

}  // namespace apil::nn
