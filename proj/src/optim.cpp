#include "lggnet/optim.hpp"

#include <cmath>

namespace lggnet {
namespace {

void check_class(std::size_t classes, int true_class) {
  if (true_class < 0 || static_cast<std::size_t>(true_class) >= classes) {
    throw LabelError("class index " + std::to_string(true_class) + " outside [0, " + std::to_string(classes) + ")");
  }
}

}  // namespace

template <typename T>
double cross_entropy(const Tensor<T>& probs, int true_class) {
  check_class(probs.size(), true_class);
  const double p = std::max(static_cast<double>(probs[static_cast<std::size_t>(true_class)]), kProbabilityFloor);
  return -std::log(p);
}

template <typename T>
Tensor<T> softmax_xent_grad_from_probs(const Tensor<T>& probs, int true_class) {
  check_class(probs.size(), true_class);
  Tensor<T> grad = probs;
  grad[static_cast<std::size_t>(true_class)] -= T{1};
  return grad;
}

template <typename T>
Tensor<T> softmax_xent_grad(const Tensor<T>& logits, int true_class) {
  check_class(logits.size(), true_class);
  return softmax_xent_grad_from_probs(softmax(logits), true_class);
}

void validate(const OptimizerConfig& c) {
  if (!(c.momentum >= 0.0 && c.momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
  if (!(c.beta2 >= 0.0 && c.beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)");
  if (!(c.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
}

void validate(const LrSchedule& s) {
  if (!(s.initial > 0.0) || !std::isfinite(s.initial)) throw ConfigError("initial learning rate must be positive");
  if (!(s.factor > 0.0 && s.factor <= 1.0)) throw ConfigError("decay factor must lie in (0, 1]");
  if (s.interval == 0) throw ConfigError("decay interval must be at least one epoch");
}

template <typename T>
Optimizer<T>::Optimizer(OptimizerConfig config) : config_(config) {
  validate(config_);
}

template <typename T>
void Optimizer<T>::step(std::span<Parameter<T>* const> params, double lr) {
  for (const Parameter<T>* p : params) {
    if (p->grad.shape() != p->value.shape()) {
      throw ShapeError("parameter '" + p->name + "' gradient [" + shape_string(p->grad.shape()) +
                       "] does not match value [" + shape_string(p->value.shape()) + "]");
    }
  }
  const bool needs_first = config_.kind != OptimizerKind::Sgd;
  const bool needs_second = config_.kind == OptimizerKind::Adam;
  if (steps_ == 0) {
    first_.clear();
    second_.clear();
    for (const Parameter<T>* p : params) {
      if (needs_first) first_.emplace_back(p->value.shape());
      if (needs_second) second_.emplace_back(p->value.shape());
    }
  } else if ((needs_first && first_.size() != params.size())) {
    throw ShapeError("optimizer state was built for a different parameter list");
  }
  for (std::size_t i = 0; needs_first && i < params.size(); ++i) {
    if (first_[i].shape() != params[i]->value.shape()) {
      throw ShapeError("optimizer state shape mismatch for parameter '" + params[i]->name + "'");
    }
  }
  ++steps_;

  switch (config_.kind) {
    case OptimizerKind::Sgd:
      for (Parameter<T>* p : params) {
        for (std::size_t j = 0; j < p->value.size(); ++j) {
          p->value[j] = static_cast<T>(p->value[j] - lr * p->grad[j]);
        }
      }
      break;
    case OptimizerKind::Momentum:
      for (std::size_t i = 0; i < params.size(); ++i) {
        Parameter<T>& p = *params[i];
        Tensor<T>& v = first_[i];
        for (std::size_t j = 0; j < p.value.size(); ++j) {
          v[j] = static_cast<T>(config_.momentum * v[j] + p.grad[j]);
          p.value[j] = static_cast<T>(p.value[j] - lr * v[j]);
        }
      }
      break;
    case OptimizerKind::Adam: {
      const double t = static_cast<double>(steps_);
      const double correction1 = 1.0 - std::pow(config_.beta1, t);
      const double correction2 = 1.0 - std::pow(config_.beta2, t);
      for (std::size_t i = 0; i < params.size(); ++i) {
        Parameter<T>& p = *params[i];
        Tensor<T>& m = first_[i];
        Tensor<T>& s = second_[i];
        for (std::size_t j = 0; j < p.value.size(); ++j) {
          const double g = p.grad[j];
          const double mj = config_.beta1 * m[j] + (1.0 - config_.beta1) * g;
          const double sj = config_.beta2 * s[j] + (1.0 - config_.beta2) * g * g;
          m[j] = static_cast<T>(mj);
          s[j] = static_cast<T>(sj);
          const double update = (mj / correction1) / (std::sqrt(sj / correction2) + config_.epsilon);
          p.value[j] = static_cast<T>(p.value[j] - lr * update);
        }
      }
      break;
    }
  }
}

double LrSchedule::rate_at(std::size_t epoch) const {
  const double e = static_cast<double>(decay == DecayKind::Step ? epoch / interval : epoch);
  return initial * std::pow(factor, e);
}

template double cross_entropy<float>(const Tensor<float>&, int);
template double cross_entropy<double>(const Tensor<double>&, int);
template Tensor<float> softmax_xent_grad<float>(const Tensor<float>&, int);
template Tensor<double> softmax_xent_grad<double>(const Tensor<double>&, int);
template Tensor<float> softmax_xent_grad_from_probs<float>(const Tensor<float>&, int);
template Tensor<double> softmax_xent_grad_from_probs<double>(const Tensor<double>&, int);
template class Optimizer<float>;
template class Optimizer<double>;

}  // namespace lggnet
