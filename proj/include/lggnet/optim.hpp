#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lggnet/layers.hpp"

namespace lggnet {

inline constexpr double kProbabilityFloor = 1e-12;

/// -ln(max(probs[true_class], 1e-12)). Throws LabelError for a bad index.
template <typename T>
double cross_entropy(const Tensor<T>& probs, int true_class);

/// Gradient of cross_entropy(softmax(logits)) w.r.t. the logits: p - onehot.
template <typename T>
Tensor<T> softmax_xent_grad(const Tensor<T>& logits, int true_class);

/// Same gradient when the softmax output is already available.
template <typename T>
Tensor<T> softmax_xent_grad_from_probs(const Tensor<T>& probs, int true_class);

enum class OptimizerKind { Sgd, Momentum, Adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Parameter update rule with its per-parameter state.
///
///   Sgd:      w -= lr * g
///   Momentum: v = momentum * v + g;  w -= lr * v
///   Adam:     m = b1 m + (1-b1) g;  s = b2 s + (1-b2) g^2;
///             w -= lr * (m / (1-b1^t)) / (sqrt(s / (1-b2^t)) + eps)
///
/// State is created lazily on the first step and must keep seeing the same
/// parameter list afterwards.
template <typename T>
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config = {});

  void step(std::span<Parameter<T>* const> params, double lr);

  std::size_t steps() const noexcept { return steps_; }
  const OptimizerConfig& config() const noexcept { return config_; }

 private:
  OptimizerConfig config_;
  std::size_t steps_ = 0;
  std::vector<Tensor<T>> first_;
  std::vector<Tensor<T>> second_;
};

enum class DecayKind { Step, Exponential };

struct LrSchedule {
  double initial = 1e-3;
  DecayKind decay = DecayKind::Step;
  double factor = 0.5;
  std::size_t interval = 10;

  /// Step: initial * factor^floor(epoch / interval).
  /// Exponential: initial * factor^epoch. Epochs count from 0.
  double rate_at(std::size_t epoch) const;
};

void validate(const OptimizerConfig& config);
void validate(const LrSchedule& schedule);

}  // namespace lggnet
