#include "apil/nn/params.hpp"

#include <stdexcept>

namespace apil::nn {

std::size_t ParamSet::add(std::string name, std::vector<std::size_t> shape) {
  for (const auto& p : params_) {
    if (p.name == name) throw std::invalid_argument("duplicate parameter name: " + name);
  }
  Tensor value(shape);
  Tensor grad(std::move(shape));
  params_.push_back(Parameter{std::move(name), std::move(value), std::move(grad)});
  return params_.size() - 1;
}

std::size_t ParamSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  throw std::out_of_range("no parameter named " + std::string(name));
}

void ParamSet::zero_grad() noexcept {
  for (auto& p : params_) p.grad.fill(0.0);
}

std::size_t ParamSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

}  // namespace apil::nn
