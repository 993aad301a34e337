#ifndef LTSSL_OPTIM_HPP
#define LTSSL_OPTIM_HPP

#include <map>
#include <string>
#include <vector>

#include "ltssl/tensor.hpp"

namespace ltssl {

struct NamedParam {
  std::string name;
  Tensor tensor;
};

// SGD with momentum and weight decay. Per parameter:
//   v <- momentum * v + grad + weight_decay * param
//   param <- param - lr * v
// and the gradient is cleared afterwards. Velocities are kept per parameter
// name, created as zeros on first step, and serialized into checkpoints.
class SgdOptimizer {
 public:
  SgdOptimizer() = default;
  SgdOptimizer(double lr, double momentum, double weight_decay)
      : lr_(lr), momentum_(momentum), weight_decay_(weight_decay) {}

  // Steps exactly the given parameters; each must have a populated gradient.
  void step(const std::vector<NamedParam>& params);

  double learning_rate() const { return lr_; }
  double momentum() const { return momentum_; }
  double weight_decay() const { return weight_decay_; }

  std::map<std::string, std::vector<double>>& velocities() { return velocity_; }
  const std::map<std::string, std::vector<double>>& velocities() const { return velocity_; }

 private:
  double lr_ = 3e-2;
  double momentum_ = 0.9;
  double weight_decay_ = 5e-4;
  std::map<std::string, std::vector<double>> velocity_;
};

}  // namespace ltssl

#endif
