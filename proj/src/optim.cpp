#include "ltssl/optim.hpp"

#include <stdexcept>

namespace ltssl {

void SgdOptimizer::step(const std::vector<NamedParam>& params) {
  for (const auto& p : params) {
    if (!p.tensor.grad_populated())
      throw std::invalid_argument("sgd_step: missing grad on parameter " + p.name);
    auto& v = velocity_[p.name];
    auto& data = p.tensor.impl()->data;
    const auto& grad = p.tensor.impl()->grad;
    if (v.size() != data.size()) v.assign(data.size(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
      v[i] = momentum_ * v[i] + grad[i] + weight_decay_ * data[i];
      data[i] -= lr_ * v[i];
    }
    p.tensor.impl()->grad.clear();
  }
}

}  // namespace ltssl
