#pragma once

#include <span>
#include <vector>

#include "adnet/autodiff.hpp"

namespace adnet {

enum class OptimizerKind { Sgd, Adam };

struct OptimizerHyper {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Applies one update per call using each parameter's current gradient.
/// Adam moments are kept per parameter in registration order.
class Optimizer {
 public:
  explicit Optimizer(OptimizerHyper hyper);

  void step(std::span<Parameter* const> params);
  long steps_taken() const noexcept { return step_; }

 private:
  OptimizerHyper hyper_;
  long step_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

}  // namespace adnet
