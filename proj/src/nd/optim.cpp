#include "hoigaze/nd/optim.hpp"

#include <cmath>

#include "hoigaze/errors.hpp"

namespace hoigaze::nd {

AdamOptimizer::AdamOptimizer(AdamOptions options) : options_(options) {
  if (options_.base_lr <= 0.0) throw ConfigError("learning rate must be positive");
  if (options_.decay <= 0.0 || options_.decay > 1.0) throw ConfigError("lr decay must lie in (0, 1]");
  if (options_.weight_decay < 0.0) throw ConfigError("weight decay must be non-negative");
}

double AdamOptimizer::learning_rate(std::size_t epoch) const {
  return options_.base_lr * std::pow(options_.decay, static_cast<double>(epoch));
}

void AdamOptimizer::step(const std::vector<Param*>& params, std::size_t epoch) {
  if (first_moment_.empty()) {
    for (const Param* p : params) {
      first_moment_.emplace_back(p->value.shape());
      second_moment_.emplace_back(p->value.shape());
    }
  }
  if (first_moment_.size() != params.size()) {
    throw UsageError("optimizer was initialised with a different parameter list");
  }
  ++steps_;
  const double lr = learning_rate(epoch);
  const double t = static_cast<double>(steps_);
  const double bias1 = 1.0 - std::pow(options_.beta1, t);
  const double bias2 = 1.0 - std::pow(options_.beta2, t);
  const double shrink = 1.0 - lr * options_.weight_decay;

  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = *params[i];
    NdArray& m = first_moment_[i];
    NdArray& v = second_moment_[i];
    if (m.shape() != p.value.shape()) {
      throw ShapeError("moment shape mismatch for parameter '" + p.name + "'");
    }
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double grad = p.grad[k];
      m[k] = options_.beta1 * m[k] + (1.0 - options_.beta1) * grad;
      v[k] = options_.beta2 * v[k] + (1.0 - options_.beta2) * grad * grad;
      const double m_hat = m[k] / bias1;
      const double v_hat = v[k] / bias2;
      p.value[k] *= shrink;
      p.value[k] -= lr * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

AdamOptimizer make_adam(double base_lr, double decay) {
  AdamOptions o;
  o.base_lr = base_lr;
  o.decay = decay;
  return AdamOptimizer(o);
}

AdamOptimizer make_adamw(double base_lr, double decay, double weight_decay) {
  AdamOptions o;
  o.base_lr = base_lr;
  o.decay = decay;
  o.weight_decay = weight_decay;
  return AdamOptimizer(o);
}

}  // namespace hoigaze::nd
