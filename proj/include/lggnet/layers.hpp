#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lggnet/rng.hpp"
#include "lggnet/tensor.hpp"

namespace lggnet {

enum class LayerMode { Training, Inference };

/// A learnable tensor and the gradient accumulated into it by backward().
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
};

// Hyperparameter records, one per layer kind. They fully describe a layer
// apart from its learnable values and are what checkpoints store.

struct Conv2DSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_size = 3;
  bool operator==(const Conv2DSpec&) const = default;
};

struct MaxPoolSpec {
  std::size_t pool_size = 2;
  std::size_t stride = 2;
  bool operator==(const MaxPoolSpec&) const = default;
};

struct LeakyReLUSpec {
  double alpha = 0.01;
  bool operator==(const LeakyReLUSpec&) const = default;
};

struct DropoutSpec {
  double rate = 0.25;
  bool operator==(const DropoutSpec&) const = default;
};

struct GaussianNoiseSpec {
  double stddev = 0.1;
  bool operator==(const GaussianNoiseSpec&) const = default;
};

struct FlattenSpec {
  bool operator==(const FlattenSpec&) const = default;
};

struct DenseSpec {
  std::size_t in_dim = 1;
  std::size_t out_dim = 1;
  bool operator==(const DenseSpec&) const = default;
};

struct SoftmaxSpec {
  bool operator==(const SoftmaxSpec&) const = default;
};

using LayerSpec = std::variant<Conv2DSpec, MaxPoolSpec, LeakyReLUSpec, DropoutSpec,
                               GaussianNoiseSpec, FlattenSpec, DenseSpec, SoftmaxSpec>;

/// Short machine name used in checkpoints ("conv2d", "maxpool", ...).
std::string_view layer_kind_name(const LayerSpec& spec);

/// Shape produced by a layer with this spec, or ShapeError if the input does
/// not fit. Pure function of the hyperparameters.
Shape layer_output_shape(const LayerSpec& spec, const Shape& input);

/// Validates hyperparameter ranges (rates, strides, sizes); throws ConfigError.
void validate_layer_spec(const LayerSpec& spec);

/// One layer of a sequential network.
///
/// forward() in Training mode caches whatever backward() needs; Inference
/// mode drops any cache. backward() consumes the cache, accumulates into the
/// parameter gradients and returns the gradient w.r.t. the layer input.
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerSpec spec() const = 0;
  virtual Tensor<T> forward(const Tensor<T>& input, LayerMode mode, Rng& rng) = 0;
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;

  virtual std::vector<Parameter<T>*> parameters() { return {}; }
  virtual void initialize(Rng& /*rng*/) {}

  Shape output_shape(const Shape& input) const { return layer_output_shape(spec(), input); }
  std::string_view kind_name() const { return layer_kind_name(spec()); }
  bool has_cache() const noexcept { return cached_; }

 protected:
  void require_cache(std::string_view who) const;

  bool cached_ = false;
};

/// Valid-padding, stride-1 convolution. Weights are [kh, kw, in_c, out_c].
template <typename T>
class Conv2D final : public Layer<T> {
 public:
  explicit Conv2D(Conv2DSpec spec);

  LayerSpec spec() const override { return spec_; }
  Tensor<T> forward(const Tensor<T>& input, LayerMode mode, Rng& rng) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Conv2D>(*this); }
  std::vector<Parameter<T>*> parameters() override { return {&weights_, &bias_}; }
  /// He-uniform weights, zero bias.
  void initialize(Rng& rng) override;

  Parameter<T>& weights() { return weights_; }
  Parameter<T>& bias() { return bias_; }

 private:
  Conv2DSpec spec_;
  Parameter<T> weights_;
  Parameter<T> bias_;
  Tensor<T> input_;
};

/// Max pooling over pool_size windows stepping by stride. Ties resolve to the
/// first maximum in row-major window order.
template <typename T>
class MaxPool2D final : public Layer<T> {
 public:
  explicit MaxPool2D(MaxPoolSpec spec);

  LayerSpec spec() const override { return spec_; }
  Tensor<T> forward(const Tensor<T>& input, LayerMode mode, Rng& rng) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<MaxPool2D>(*this); }

 private:
  MaxPoolSpec spec_;
  Shape input_shape_;
  Shape output_shape_;
  std::vector<std::size_t> argmax_;
};

template <typename T>
class LeakyReLU final : public Layer<T> {
 public:
  explicit LeakyReLU(LeakyReLUSpec spec = {});

  LayerSpec spec() const override { return spec_; }
  Tensor<T> forward(const Tensor<T>& input, LayerMode mode, Rng& rng) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<LeakyReLU>(*this); }

 private:
  LeakyReLUSpec spec_;
  Tensor<T> input_;
};

/// Inverted dropout: survivors are scaled by 1/(1-rate) at training time.
template <typename T>
class Dropout final : public Layer<T> {
 public:
  explicit Dropout(DropoutSpec spec);

  LayerSpec spec() const override { return spec_; }
  Tensor<T> forward(const Tensor<T>& input, LayerMode mode, Rng& rng) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dropout>(*this); }

 private:
  DropoutSpec spec_;
  std::vector<T> mask_;
  Shape shape_;
};

/// Adds N(0, stddev^2) noise in Training mode only.
template <typename T>
class GaussianNoise final : public Layer<T> {
 public:
  explicit GaussianNoise(GaussianNoiseSpec spec);

  LayerSpec spec() const override { return spec_; }
  Tensor<T> forward(const Tensor<T>& input, LayerMode mode, Rng& rng) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<GaussianNoise>(*this); }

 private:
  GaussianNoiseSpec spec_;
  Shape shape_;
};

template <typename T>
class Flatten final : public Layer<T> {
 public:
  Flatten() = default;

  LayerSpec spec() const override { return FlattenSpec{}; }
  Tensor<T> forward(const Tensor<T>& input, LayerMode mode, Rng& rng) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Flatten>(*this); }

 private:
  Shape input_shape_;
};

/// Fully connected: out = x W + b with W [in_dim, out_dim].
template <typename T>
class Dense final : public Layer<T> {
 public:
  explicit Dense(DenseSpec spec);

  LayerSpec spec() const override { return spec_; }
  Tensor<T> forward(const Tensor<T>& input, LayerMode mode, Rng& rng) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dense>(*this); }
  std::vector<Parameter<T>*> parameters() override { return {&weights_, &bias_}; }
  /// Glorot-uniform weights, zero bias.
  void initialize(Rng& rng) override;

  Parameter<T>& weights() { return weights_; }
  Parameter<T>& bias() { return bias_; }

 private:
  DenseSpec spec_;
  Parameter<T> weights_;
  Parameter<T> bias_;
  Tensor<T> input_;
};

template <typename T>
class Softmax final : public Layer<T> {
 public:
  Softmax() = default;

  LayerSpec spec() const override { return SoftmaxSpec{}; }
  Tensor<T> forward(const Tensor<T>& input, LayerMode mode, Rng& rng) override;
  /// Vector-Jacobian product: p * (g - <g, p>).
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Softmax>(*this); }

 private:
  Tensor<T> output_;
};

/// Max-shifted softmax over a rank-1 tensor with at least two entries.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec& spec);

}  // namespace lggnet
