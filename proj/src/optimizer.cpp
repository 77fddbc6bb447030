#include "adnet/optimizer.hpp"

#include <cmath>

#include "adnet/error.hpp"

namespace adnet {

Optimizer::Optimizer(OptimizerHyper hyper) : hyper_(hyper) {
  if (!(hyper_.learning_rate > 0.0)) throw Error(ErrorCode::BadConfig, "learning rate must be positive");
}

void Optimizer::step(std::span<Parameter* const> params) {
  ++step_;
  if (hyper_.kind == OptimizerKind::Sgd) {
    for (Parameter* p : params)
      for (std::size_t i = 0; i < p->value.size(); ++i) p->value[i] -= hyper_.learning_rate * p->grad[i];
    return;
  }
  if (m_.empty()) {
    for (Parameter* p : params) {
      m_.emplace_back(p->value.shape());
      v_.emplace_back(p->value.shape());
    }
  }
  if (m_.size() != params.size()) throw Error(ErrorCode::ShapeMismatch, "optimizer parameter set changed between steps");
  const double b1 = hyper_.beta1, b2 = hyper_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p.value[i] -= hyper_.learning_rate * mhat / (std::sqrt(vhat) + hyper_.epsilon);
    }
  }
}

}  // namespace adnet
