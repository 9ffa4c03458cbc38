#include "lggnet/layers.hpp"

#include <cmath>
#include <limits>

namespace lggnet {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_rank3(const Shape& in, std::string_view who) {
  if (in.size() != 3) {
    throw ShapeError(std::string(who) + ": expected an H x W x C input, got [" + shape_string(in) + "]");
  }
}

void require_same_shape(const Shape& expected, const Shape& got, std::string_view who) {
  if (expected != got) {
    throw ShapeError(std::string(who) + ": gradient shape [" + shape_string(got) +
                     "] does not match forward output [" + shape_string(expected) + "]");
  }
}

}  // namespace

std::string_view layer_kind_name(const LayerSpec& spec) {
  return std::visit(Overloaded{
                        [](const Conv2DSpec&) { return std::string_view("conv2d"); },
                        [](const MaxPoolSpec&) { return std::string_view("maxpool"); },
                        [](const LeakyReLUSpec&) { return std::string_view("leaky_relu"); },
                        [](const DropoutSpec&) { return std::string_view("dropout"); },
                        [](const GaussianNoiseSpec&) { return std::string_view("gaussian_noise"); },
                        [](const FlattenSpec&) { return std::string_view("flatten"); },
                        [](const DenseSpec&) { return std::string_view("dense"); },
                        [](const SoftmaxSpec&) { return std::string_view("softmax"); },
                    },
                    spec);
}

void validate_layer_spec(const LayerSpec& spec) {
  std::visit(Overloaded{
                 [](const Conv2DSpec& s) {
                   if (s.in_channels == 0 || s.out_channels == 0 || s.kernel_size == 0) {
                     throw ConfigError("conv2d: channels and kernel size must be positive");
                   }
                 },
                 [](const MaxPoolSpec& s) {
                   if (s.pool_size == 0 || s.stride == 0) {
                     throw ConfigError("maxpool: pool size and stride must be positive");
                   }
                 },
                 [](const LeakyReLUSpec& s) {
                   if (!(s.alpha >= 0.0) || !std::isfinite(s.alpha)) {
                     throw ConfigError("leaky_relu: alpha must be a finite non-negative slope");
                   }
                 },
                 [](const DropoutSpec& s) {
                   if (!(s.rate >= 0.0 && s.rate < 1.0)) {
                     throw ConfigError("dropout: rate must lie in [0, 1)");
                   }
                 },
                 [](const GaussianNoiseSpec& s) {
                   if (!(s.stddev >= 0.0) || !std::isfinite(s.stddev)) {
                     throw ConfigError("gaussian_noise: stddev must be non-negative");
                   }
                 },
                 [](const FlattenSpec&) {},
                 [](const DenseSpec& s) {
                   if (s.in_dim == 0 || s.out_dim == 0) throw ConfigError("dense: dimensions must be positive");
                 },
                 [](const SoftmaxSpec&) {},
             },
             spec);
}

Shape layer_output_shape(const LayerSpec& spec, const Shape& in) {
  return std::visit(
      Overloaded{
          [&](const Conv2DSpec& s) -> Shape {
            require_rank3(in, "conv2d");
            if (in[2] != s.in_channels) {
              throw ShapeError("conv2d: input has " + std::to_string(in[2]) + " channels, layer expects " +
                               std::to_string(s.in_channels));
            }
            if (in[0] < s.kernel_size || in[1] < s.kernel_size) {
              throw ShapeError("conv2d: input [" + shape_string(in) + "] smaller than kernel");
            }
            return {in[0] - s.kernel_size + 1, in[1] - s.kernel_size + 1, s.out_channels};
          },
          [&](const MaxPoolSpec& s) -> Shape {
            require_rank3(in, "maxpool");
            if (in[0] < s.pool_size || in[1] < s.pool_size) {
              throw ShapeError("maxpool: input [" + shape_string(in) + "] smaller than pool size " +
                               std::to_string(s.pool_size));
            }
            return {(in[0] - s.pool_size) / s.stride + 1, (in[1] - s.pool_size) / s.stride + 1, in[2]};
          },
          [&](const LeakyReLUSpec&) -> Shape { return in; },
          [&](const DropoutSpec&) -> Shape { return in; },
          [&](const GaussianNoiseSpec&) -> Shape { return in; },
          [&](const FlattenSpec&) -> Shape { return {shape_size(in)}; },
          [&](const DenseSpec& s) -> Shape {
            if (in.size() != 1 || in[0] != s.in_dim) {
              throw ShapeError("dense: input [" + shape_string(in) + "] does not match in_dim " +
                               std::to_string(s.in_dim));
            }
            return {s.out_dim};
          },
          [&](const SoftmaxSpec&) -> Shape {
            if (in.size() != 1 || in[0] < 2) {
              throw ShapeError("softmax: expected a vector of at least 2 logits, got [" + shape_string(in) + "]");
            }
            return in;
          },
      },
      spec);
}

template <typename T>
void Layer<T>::require_cache(std::string_view who) const {
  if (!cached_) {
    throw StateError(std::string(who) + ": backward called without a preceding Training-mode forward");
  }
}

// ---------------------------------------------------------------- Conv2D

template <typename T>
Conv2D<T>::Conv2D(Conv2DSpec spec) : spec_(spec) {
  validate_layer_spec(spec_);
  weights_ = {"weight", Tensor<T>({spec_.kernel_size, spec_.kernel_size, spec_.in_channels, spec_.out_channels}),
              Tensor<T>({spec_.kernel_size, spec_.kernel_size, spec_.in_channels, spec_.out_channels})};
  bias_ = {"bias", Tensor<T>({spec_.out_channels}), Tensor<T>({spec_.out_channels})};
}

template <typename T>
void Conv2D<T>::initialize(Rng& rng) {
  const double fan_in = static_cast<double>(spec_.kernel_size * spec_.kernel_size * spec_.in_channels);
  const double limit = std::sqrt(6.0 / fan_in);
  weights_.value = rand_uniform<T>(rng, weights_.value.shape(), -limit, limit);
  bias_.value.fill(T{0});
}

template <typename T>
Tensor<T> Conv2D<T>::forward(const Tensor<T>& input, LayerMode mode, Rng&) {
  const Shape out_shape = layer_output_shape(spec_, input.shape());
  const std::size_t k = spec_.kernel_size;
  const std::size_t cin = spec_.in_channels;
  const std::size_t cout = spec_.out_channels;
  const std::size_t oh = out_shape[0], ow = out_shape[1];

  Tensor<T> out(out_shape);
  const T* w = weights_.value.data();
  const T* b = bias_.value.data();
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      T* o = &out.at(y, x, 0);
      for (std::size_t oc = 0; oc < cout; ++oc) o[oc] = b[oc];
      for (std::size_t dy = 0; dy < k; ++dy) {
        for (std::size_t dx = 0; dx < k; ++dx) {
          const T* in = &input.at(y + dy, x + dx, 0);
          const T* wk = w + (dy * k + dx) * cin * cout;
          for (std::size_t c = 0; c < cin; ++c) {
            const T v = in[c];
            const T* wc = wk + c * cout;
            for (std::size_t oc = 0; oc < cout; ++oc) o[oc] += v * wc[oc];
          }
        }
      }
    }
  }

  if (mode == LayerMode::Training) {
    input_ = input;
    this->cached_ = true;
  } else {
    input_ = Tensor<T>();
    this->cached_ = false;
  }
  return out;
}

template <typename T>
Tensor<T> Conv2D<T>::backward(const Tensor<T>& grad_out) {
  this->require_cache("conv2d");
  const Shape out_shape = layer_output_shape(spec_, input_.shape());
  require_same_shape(out_shape, grad_out.shape(), "conv2d");

  const std::size_t k = spec_.kernel_size;
  const std::size_t cin = spec_.in_channels;
  const std::size_t cout = spec_.out_channels;
  const std::size_t oh = out_shape[0], ow = out_shape[1];

  Tensor<T> grad_in(input_.shape());
  const T* w = weights_.value.data();
  T* gw = weights_.grad.data();
  T* gb = bias_.grad.data();
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      const T* go = &grad_out.at(y, x, 0);
      for (std::size_t oc = 0; oc < cout; ++oc) gb[oc] += go[oc];
      for (std::size_t dy = 0; dy < k; ++dy) {
        for (std::size_t dx = 0; dx < k; ++dx) {
          const T* in = &input_.at(y + dy, x + dx, 0);
          T* gi = &grad_in.at(y + dy, x + dx, 0);
          const std::size_t offset = (dy * k + dx) * cin * cout;
          for (std::size_t c = 0; c < cin; ++c) {
            const T v = in[c];
            const T* wc = w + offset + c * cout;
            T* gwc = gw + offset + c * cout;
            T acc{0};
            for (std::size_t oc = 0; oc < cout; ++oc) {
              gwc[oc] += v * go[oc];
              acc += wc[oc] * go[oc];
            }
            gi[c] += acc;
          }
        }
      }
    }
  }
  input_ = Tensor<T>();
  this->cached_ = false;
  return grad_in;
}

// ---------------------------------------------------------------- MaxPool2D

template <typename T>
MaxPool2D<T>::MaxPool2D(MaxPoolSpec spec) : spec_(spec) {
  validate_layer_spec(spec_);
}

template <typename T>
Tensor<T> MaxPool2D<T>::forward(const Tensor<T>& input, LayerMode mode, Rng&) {
  const Shape out_shape = layer_output_shape(spec_, input.shape());
  const std::size_t p = spec_.pool_size, s = spec_.stride;
  const std::size_t channels = out_shape[2];
  const std::size_t width = input.extent(1);

  Tensor<T> out(out_shape);
  std::vector<std::size_t> argmax(out.size());
  for (std::size_t y = 0; y < out_shape[0]; ++y) {
    for (std::size_t x = 0; x < out_shape[1]; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        std::size_t best = ((y * s) * width + x * s) * channels + c;
        T best_value = input[best];
        for (std::size_t dy = 0; dy < p; ++dy) {
          for (std::size_t dx = 0; dx < p; ++dx) {
            const std::size_t idx = ((y * s + dy) * width + (x * s + dx)) * channels + c;
            if (input[idx] > best_value) {
              best_value = input[idx];
              best = idx;
            }
          }
        }
        const std::size_t o = (y * out_shape[1] + x) * channels + c;
        out[o] = best_value;
        argmax[o] = best;
      }
    }
  }

  if (mode == LayerMode::Training) {
    input_shape_ = input.shape();
    output_shape_ = out_shape;
    argmax_ = std::move(argmax);
    this->cached_ = true;
  } else {
    argmax_.clear();
    this->cached_ = false;
  }
  return out;
}

template <typename T>
Tensor<T> MaxPool2D<T>::backward(const Tensor<T>& grad_out) {
  this->require_cache("maxpool");
  require_same_shape(output_shape_, grad_out.shape(), "maxpool");
  Tensor<T> grad_in(input_shape_);
  for (std::size_t o = 0; o < grad_out.size(); ++o) grad_in[argmax_[o]] += grad_out[o];
  argmax_.clear();
  this->cached_ = false;
  return grad_in;
}

// ---------------------------------------------------------------- LeakyReLU

template <typename T>
LeakyReLU<T>::LeakyReLU(LeakyReLUSpec spec) : spec_(spec) {
  validate_layer_spec(spec_);
}

template <typename T>
Tensor<T> LeakyReLU<T>::forward(const Tensor<T>& input, LayerMode mode, Rng&) {
  const T alpha = static_cast<T>(spec_.alpha);
  Tensor<T> out = input;
  for (T& v : out.values()) {
    if (v < T{0}) v *= alpha;
  }
  if (mode == LayerMode::Training) {
    input_ = input;
    this->cached_ = true;
  } else {
    input_ = Tensor<T>();
    this->cached_ = false;
  }
  return out;
}

template <typename T>
Tensor<T> LeakyReLU<T>::backward(const Tensor<T>& grad_out) {
  this->require_cache("leaky_relu");
  require_same_shape(input_.shape(), grad_out.shape(), "leaky_relu");
  const T alpha = static_cast<T>(spec_.alpha);
  Tensor<T> grad_in = grad_out;
  // Slope at exactly zero is taken as alpha.
  for (std::size_t i = 0; i < grad_in.size(); ++i) {
    if (!(input_[i] > T{0})) grad_in[i] *= alpha;
  }
  input_ = Tensor<T>();
  this->cached_ = false;
  return grad_in;
}

// ---------------------------------------------------------------- Dropout

template <typename T>
Dropout<T>::Dropout(DropoutSpec spec) : spec_(spec) {
  validate_layer_spec(spec_);
}

template <typename T>
Tensor<T> Dropout<T>::forward(const Tensor<T>& input, LayerMode mode, Rng& rng) {
  if (mode == LayerMode::Inference) {
    mask_.clear();
    this->cached_ = false;
    return input;
  }
  const T keep_scale = static_cast<T>(1.0 / (1.0 - spec_.rate));
  mask_.assign(input.size(), T{1});
  Tensor<T> out = input;
  if (spec_.rate > 0.0) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      mask_[i] = rng.uniform() < spec_.rate ? T{0} : keep_scale;
      out[i] *= mask_[i];
    }
  }
  shape_ = input.shape();
  this->cached_ = true;
  return out;
}

template <typename T>
Tensor<T> Dropout<T>::backward(const Tensor<T>& grad_out) {
  this->require_cache("dropout");
  require_same_shape(shape_, grad_out.shape(), "dropout");
  Tensor<T> grad_in = grad_out;
  for (std::size_t i = 0; i < grad_in.size(); ++i) grad_in[i] *= mask_[i];
  mask_.clear();
  this->cached_ = false;
  return grad_in;
}

// ---------------------------------------------------------------- GaussianNoise

template <typename T>
GaussianNoise<T>::GaussianNoise(GaussianNoiseSpec spec) : spec_(spec) {
  validate_layer_spec(spec_);
}

template <typename T>
Tensor<T> GaussianNoise<T>::forward(const Tensor<T>& input, LayerMode mode, Rng& rng) {
  if (mode == LayerMode::Inference) {
    this->cached_ = false;
    return input;
  }
  Tensor<T> out = input;
  if (spec_.stddev > 0.0) {
    for (T& v : out.values()) v += static_cast<T>(spec_.stddev * rng.normal());
  }
  shape_ = input.shape();
  this->cached_ = true;
  return out;
}

template <typename T>
Tensor<T> GaussianNoise<T>::backward(const Tensor<T>& grad_out) {
  this->require_cache("gaussian_noise");
  require_same_shape(shape_, grad_out.shape(), "gaussian_noise");
  this->cached_ = false;
  return grad_out;
}

// ---------------------------------------------------------------- Flatten

template <typename T>
Tensor<T> Flatten<T>::forward(const Tensor<T>& input, LayerMode mode, Rng&) {
  if (mode == LayerMode::Training) {
    input_shape_ = input.shape();
    this->cached_ = true;
  } else {
    this->cached_ = false;
  }
  return reshape(input, {input.size()});
}

template <typename T>
Tensor<T> Flatten<T>::backward(const Tensor<T>& grad_out) {
  this->require_cache("flatten");
  require_same_shape(Shape{shape_size(input_shape_)}, grad_out.shape(), "flatten");
  this->cached_ = false;
  return reshape(grad_out, input_shape_);
}

// ---------------------------------------------------------------- Dense

template <typename T>
Dense<T>::Dense(DenseSpec spec) : spec_(spec) {
  validate_layer_spec(spec_);
  weights_ = {"weight", Tensor<T>({spec_.in_dim, spec_.out_dim}), Tensor<T>({spec_.in_dim, spec_.out_dim})};
  bias_ = {"bias", Tensor<T>({spec_.out_dim}), Tensor<T>({spec_.out_dim})};
}

template <typename T>
void Dense<T>::initialize(Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(spec_.in_dim + spec_.out_dim));
  weights_.value = rand_uniform<T>(rng, weights_.value.shape(), -limit, limit);
  bias_.value.fill(T{0});
}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& input, LayerMode mode, Rng&) {
  layer_output_shape(spec_, input.shape());
  const std::size_t n = spec_.in_dim, m = spec_.out_dim;
  Tensor<T> out = bias_.value;
  const T* w = weights_.value.data();
  for (std::size_t i = 0; i < n; ++i) {
    const T v = input[i];
    if (v == T{0}) continue;
    const T* row = w + i * m;
    for (std::size_t j = 0; j < m; ++j) out[j] += v * row[j];
  }
  if (mode == LayerMode::Training) {
    input_ = input;
    this->cached_ = true;
  } else {
    input_ = Tensor<T>();
    this->cached_ = false;
  }
  return out;
}

template <typename T>
Tensor<T> Dense<T>::backward(const Tensor<T>& grad_out) {
  this->require_cache("dense");
  require_same_shape(Shape{spec_.out_dim}, grad_out.shape(), "dense");
  const std::size_t n = spec_.in_dim, m = spec_.out_dim;
  Tensor<T> grad_in({n});
  const T* w = weights_.value.data();
  T* gw = weights_.grad.data();
  for (std::size_t i = 0; i < n; ++i) {
    const T v = input_[i];
    const T* row = w + i * m;
    T* grow = gw + i * m;
    T acc{0};
    for (std::size_t j = 0; j < m; ++j) {
      grow[j] += v * grad_out[j];
      acc += row[j] * grad_out[j];
    }
    grad_in[i] = acc;
  }
  for (std::size_t j = 0; j < m; ++j) bias_.grad[j] += grad_out[j];
  input_ = Tensor<T>();
  this->cached_ = false;
  return grad_in;
}

// ---------------------------------------------------------------- Softmax

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  layer_output_shape(SoftmaxSpec{}, logits.shape());
  const T peak = *std::max_element(logits.values().begin(), logits.values().end());
  Tensor<T> out(logits.shape());
  T total{0};
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (T& v : out.values()) v /= total;
  return out;
}

template <typename T>
Tensor<T> Softmax<T>::forward(const Tensor<T>& input, LayerMode mode, Rng&) {
  Tensor<T> out = softmax(input);
  if (mode == LayerMode::Training) {
    output_ = out;
    this->cached_ = true;
  } else {
    output_ = Tensor<T>();
    this->cached_ = false;
  }
  return out;
}

template <typename T>
Tensor<T> Softmax<T>::backward(const Tensor<T>& grad_out) {
  this->require_cache("softmax");
  require_same_shape(output_.shape(), grad_out.shape(), "softmax");
  T dot{0};
  for (std::size_t i = 0; i < output_.size(); ++i) dot += grad_out[i] * output_[i];
  Tensor<T> grad_in(output_.shape());
  for (std::size_t i = 0; i < output_.size(); ++i) grad_in[i] = output_[i] * (grad_out[i] - dot);
  output_ = Tensor<T>();
  this->cached_ = false;
  return grad_in;
}

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec& spec) {
  return std::visit(Overloaded{
                        [](const Conv2DSpec& s) -> std::unique_ptr<Layer<T>> { return std::make_unique<Conv2D<T>>(s); },
                        [](const MaxPoolSpec& s) -> std::unique_ptr<Layer<T>> { return std::make_unique<MaxPool2D<T>>(s); },
                        [](const LeakyReLUSpec& s) -> std::unique_ptr<Layer<T>> { return std::make_unique<LeakyReLU<T>>(s); },
                        [](const DropoutSpec& s) -> std::unique_ptr<Layer<T>> { return std::make_unique<Dropout<T>>(s); },
                        [](const GaussianNoiseSpec& s) -> std::unique_ptr<Layer<T>> {
                          return std::make_unique<GaussianNoise<T>>(s);
                        },
                        [](const FlattenSpec&) -> std::unique_ptr<Layer<T>> { return std::make_unique<Flatten<T>>(); },
                        [](const DenseSpec& s) -> std::unique_ptr<Layer<T>> { return std::make_unique<Dense<T>>(s); },
                        [](const SoftmaxSpec&) -> std::unique_ptr<Layer<T>> { return std::make_unique<Softmax<T>>(); },
                    },
                    spec);
}

#define LGGNET_INSTANTIATE_LAYERS(T)                                \
  template class Layer<T>;                                          \
  template class Conv2D<T>;                                         \
  template class MaxPool2D<T>;                                      \
  template class LeakyReLU<T>;                                      \
  template class Dropout<T>;                                        \
  template class GaussianNoise<T>;                                  \
  template class Flatten<T>;                                        \
  template class Dense<T>;                                          \
  template class Softmax<T>;                                        \
  template Tensor<T> softmax<T>(const Tensor<T>&);                  \
  template std::unique_ptr<Layer<T>> make_layer<T>(const LayerSpec&);

LGGNET_INSTANTIATE_LAYERS(float)
LGGNET_INSTANTIATE_LAYERS(double)

#undef LGGNET_INSTANTIATE_LAYERS

}  // namespace lggnet
