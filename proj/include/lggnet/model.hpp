#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lggnet/layers.hpp"

namespace lggnet {

inline constexpr int kModelFormatVersion = 1;

/// One convolution block: two 3x3 conv + LeakyReLU pairs, then an optional
/// max pool (pool_size > 1, stride = pool_size) and optional dropout.
struct ConvBlock {
  std::size_t filters = 16;
  std::size_t pool_size = 2;
  bool dropout = true;
};

/// Parameters of the sequential classifier family. The defaults are the full
/// 256x256 stack; the reduced preset is the same construction on 32x32 inputs
/// for fast tests.
struct ArchitectureConfig {
  Shape input_shape{256, 256, 1};
  std::vector<ConvBlock> blocks{{16, 2, true}, {32, 2, true}, {64, 2, false}, {128, 5, false}};
  std::size_t kernel_size = 3;
  std::size_t hidden_units = 1024;
  std::size_t num_classes = 2;
  double leaky_alpha = 0.01;
  double block_dropout = 0.25;
  double dense_dropout = 0.5;
  double noise_stddev = 0.1;
};

ArchitectureConfig paper_architecture();
ArchitectureConfig reduced_architecture();

/// Expands an architecture into its layer list. Validates every shape and
/// throws ShapeError/ConfigError if the stack does not fit the input.
std::vector<LayerSpec> build_layer_specs(const ArchitectureConfig& config);

/// Ordered stack of layers with a fixed input shape.
template <typename T>
class Model {
 public:
  Model() = default;
  /// Builds the layers, checks that consecutive shapes agree and initializes
  /// weights from `seed`.
  Model(Shape input_shape, const std::vector<LayerSpec>& specs, std::uint64_t seed, std::string name = "model");

  Model(const Model& other);
  Model& operator=(const Model& other);
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  Tensor<T> forward(const Tensor<T>& input, LayerMode mode, Rng& rng);
  /// Inference-mode forward; no stochastic layer is active so no rng is needed.
  Tensor<T> predict(const Tensor<T>& input);

  /// Backpropagates a gradient w.r.t. the model output through every layer,
  /// accumulating parameter gradients. Returns the gradient w.r.t. the input.
  Tensor<T> backward(const Tensor<T>& grad_output);
  /// Same, starting from the gradient w.r.t. the trailing softmax input.
  Tensor<T> backward_from_logits(const Tensor<T>& grad_logits);

  std::vector<Parameter<T>*> parameters();
  std::vector<const Parameter<T>*> parameters() const;
  /// Stable "<index>_<kind>_<param>" names, parallel to parameters().
  std::vector<std::string> parameter_names() const;
  std::size_t parameter_count() const;
  void zero_grad();

  /// Snapshot / restore of the parameter values only.
  std::vector<Tensor<T>> weights() const;
  void set_weights(const std::vector<Tensor<T>>& values);

  const Shape& input_shape() const noexcept { return input_shape_; }
  Shape output_shape() const;
  /// Output shape after each layer.
  std::vector<Shape> layer_output_shapes() const;
  std::vector<LayerSpec> layer_specs() const;
  std::size_t layer_count() const noexcept { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_.at(i); }

  const std::string& name() const noexcept { return name_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  Tensor<T> backward_through(const Tensor<T>& grad, std::size_t end);

  Shape input_shape_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  std::uint64_t seed_ = 0;
  std::string name_;
};

template <typename T>
Model<T> build_model(const ArchitectureConfig& config, std::uint64_t seed, std::string name = "model");

/// The 256x256 classifier with the given regularization settings.
template <typename T>
Model<T> build_paper_model(const ArchitectureConfig& config = paper_architecture(), std::uint64_t seed = 0);

/// Text table with one row per architectural unit (conv rows absorb the
/// activation that follows them), then the parameter total.
template <typename T>
std::string summary(const Model<T>& model);

std::string summary(const Shape& input_shape, const std::vector<LayerSpec>& specs);

/// Learnable parameter count of a layer list; pure function of the specs.
std::size_t parameter_count(const std::vector<LayerSpec>& specs);

}  // namespace lggnet
