#include "lggnet/model.hpp"

#include <iomanip>
#include <sstream>

namespace lggnet {

ArchitectureConfig paper_architecture() { return ArchitectureConfig{}; }

ArchitectureConfig reduced_architecture() {
  ArchitectureConfig config;
  config.input_shape = {32, 32, 1};
  config.blocks = {{4, 2, true}, {8, 1, true}, {8, 1, false}, {16, 2, false}};
  config.hidden_units = 32;
  return config;
}

std::vector<LayerSpec> build_layer_specs(const ArchitectureConfig& config) {
  if (config.input_shape.size() != 3) throw ShapeError("architecture input must be H x W x C");
  check_shape(config.input_shape);
  if (config.blocks.empty()) throw ConfigError("architecture needs at least one conv block");
  if (config.num_classes < 2) throw ConfigError("architecture needs at least two classes");

  std::vector<LayerSpec> specs;
  std::size_t channels = config.input_shape[2];
  for (const ConvBlock& block : config.blocks) {
    for (int i = 0; i < 2; ++i) {
      specs.emplace_back(Conv2DSpec{channels, block.filters, config.kernel_size});
      specs.emplace_back(LeakyReLUSpec{config.leaky_alpha});
      channels = block.filters;
    }
    if (block.pool_size > 1) specs.emplace_back(MaxPoolSpec{block.pool_size, block.pool_size});
    if (block.dropout) specs.emplace_back(DropoutSpec{config.block_dropout});
  }
  specs.emplace_back(GaussianNoiseSpec{config.noise_stddev});
  specs.emplace_back(FlattenSpec{});

  // Walk the shapes to size the first dense layer from the flatten length.
  Shape shape = config.input_shape;
  for (const LayerSpec& spec : specs) {
    validate_layer_spec(spec);
    shape = layer_output_shape(spec, shape);
  }
  specs.emplace_back(DenseSpec{shape[0], config.hidden_units});
  specs.emplace_back(DropoutSpec{config.dense_dropout});
  specs.emplace_back(DenseSpec{config.hidden_units, config.num_classes});
  specs.emplace_back(SoftmaxSpec{});
  for (std::size_t i = specs.size() - 4; i < specs.size(); ++i) validate_layer_spec(specs[i]);
  return specs;
}

std::size_t parameter_count(const std::vector<LayerSpec>& specs) {
  std::size_t total = 0;
  for (const LayerSpec& spec : specs) {
    if (const auto* conv = std::get_if<Conv2DSpec>(&spec)) {
      total += conv->kernel_size * conv->kernel_size * conv->in_channels * conv->out_channels + conv->out_channels;
    } else if (const auto* dense = std::get_if<DenseSpec>(&spec)) {
      total += dense->in_dim * dense->out_dim + dense->out_dim;
    }
  }
  return total;
}

// ---------------------------------------------------------------- Model

template <typename T>
Model<T>::Model(Shape input_shape, const std::vector<LayerSpec>& specs, std::uint64_t seed, std::string name)
    : input_shape_(std::move(input_shape)), seed_(seed), name_(std::move(name)) {
  check_shape(input_shape_);
  Shape shape = input_shape_;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    validate_layer_spec(specs[i]);
    try {
      shape = layer_output_shape(specs[i], shape);
    } catch (const ShapeError& e) {
      throw ShapeError("layer " + std::to_string(i) + " (" + std::string(layer_kind_name(specs[i])) +
                       "): " + e.what());
    }
    layers_.push_back(make_layer<T>(specs[i]));
  }
  Rng rng(seed);
  for (auto& layer : layers_) layer->initialize(rng);
}

template <typename T>
Model<T>::Model(const Model& other) : input_shape_(other.input_shape_), seed_(other.seed_), name_(other.name_) {
  layers_.reserve(other.layers_.size());
  for (const auto& layer : other.layers_) layers_.push_back(layer->clone());
}

template <typename T>
Model<T>& Model<T>::operator=(const Model& other) {
  if (this != &other) {
    Model copy(other);
    *this = std::move(copy);
  }
  return *this;
}

template <typename T>
Tensor<T> Model<T>::forward(const Tensor<T>& input, LayerMode mode, Rng& rng) {
  if (input.shape() != input_shape_) {
    throw ShapeError("model expects input [" + shape_string(input_shape_) + "], got [" +
                     shape_string(input.shape()) + "]");
  }
  Tensor<T> activation = input;
  for (auto& layer : layers_) activation = layer->forward(activation, mode, rng);
  return activation;
}

template <typename T>
Tensor<T> Model<T>::predict(const Tensor<T>& input) {
  Rng unused(0);
  return forward(input, LayerMode::Inference, unused);
}

template <typename T>
Tensor<T> Model<T>::backward_through(const Tensor<T>& grad, std::size_t end) {
  Tensor<T> g = grad;
  for (std::size_t i = end; i-- > 0;) g = layers_[i]->backward(g);
  return g;
}

template <typename T>
Tensor<T> Model<T>::backward(const Tensor<T>& grad_output) {
  return backward_through(grad_output, layers_.size());
}

template <typename T>
Tensor<T> Model<T>::backward_from_logits(const Tensor<T>& grad_logits) {
  if (layers_.empty() || !std::holds_alternative<SoftmaxSpec>(layers_.back()->spec())) {
    throw StateError("backward_from_logits requires a trailing softmax layer");
  }
  if (!layers_.back()->has_cache()) {
    throw StateError("softmax: backward called without a preceding Training-mode forward");
  }
  return backward_through(grad_logits, layers_.size() - 1);
}

template <typename T>
std::vector<Parameter<T>*> Model<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& layer : layers_) {
    for (Parameter<T>* p : layer->parameters()) out.push_back(p);
  }
  return out;
}

template <typename T>
std::vector<const Parameter<T>*> Model<T>::parameters() const {
  std::vector<const Parameter<T>*> out;
  for (const auto& layer : layers_) {
    for (Parameter<T>* p : layer->parameters()) out.push_back(p);
  }
  return out;
}

template <typename T>
std::vector<std::string> Model<T>::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (Parameter<T>* p : layers_[i]->parameters()) {
      std::ostringstream name;
      name << std::setw(2) << std::setfill('0') << i << '_' << layers_[i]->kind_name() << '_' << p->name;
      names.push_back(name.str());
    }
  }
  return names;
}

template <typename T>
std::size_t Model<T>::parameter_count() const {
  std::size_t total = 0;
  for (const Parameter<T>* p : parameters()) total += p->value.size();
  return total;
}

template <typename T>
void Model<T>::zero_grad() {
  for (Parameter<T>* p : parameters()) p->grad.fill(T{0});
}

template <typename T>
std::vector<Tensor<T>> Model<T>::weights() const {
  std::vector<Tensor<T>> out;
  for (const Parameter<T>* p : parameters()) out.push_back(p->value);
  return out;
}

template <typename T>
void Model<T>::set_weights(const std::vector<Tensor<T>>& values) {
  auto params = parameters();
  if (values.size() != params.size()) throw ShapeError("weight snapshot has the wrong number of tensors");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (values[i].shape() != params[i]->value.shape()) {
      throw ShapeError("weight snapshot tensor " + std::to_string(i) + " has shape [" +
                       shape_string(values[i].shape()) + "], expected [" +
                       shape_string(params[i]->value.shape()) + "]");
    }
    params[i]->value = values[i];
  }
}

template <typename T>
std::vector<Shape> Model<T>::layer_output_shapes() const {
  std::vector<Shape> shapes;
  Shape shape = input_shape_;
  for (const auto& layer : layers_) {
    shape = layer->output_shape(shape);
    shapes.push_back(shape);
  }
  return shapes;
}

template <typename T>
Shape Model<T>::output_shape() const {
  auto shapes = layer_output_shapes();
  return shapes.empty() ? input_shape_ : shapes.back();
}

template <typename T>
std::vector<LayerSpec> Model<T>::layer_specs() const {
  std::vector<LayerSpec> specs;
  for (const auto& layer : layers_) specs.push_back(layer->spec());
  return specs;
}

template <typename T>
Model<T> build_model(const ArchitectureConfig& config, std::uint64_t seed, std::string name) {
  return Model<T>(config.input_shape, build_layer_specs(config), seed, std::move(name));
}

template <typename T>
Model<T> build_paper_model(const ArchitectureConfig& config, std::uint64_t seed) {
  return build_model<T>(config, seed, "paper");
}

// ---------------------------------------------------------------- summary

namespace {

struct SummaryRow {
  std::string layer, kernels = "-", kernel_size = "-", stride = "-", feature_map, activation = "-";
};

std::string feature_map_string(const Shape& shape) {
  // Single-channel images print as "H x W", matching the input row convention.
  if (shape.size() == 3 && shape[2] == 1) return shape_string({shape[0], shape[1]});
  return shape_string(shape);
}

}  // namespace

std::string summary(const Shape& input_shape, const std::vector<LayerSpec>& specs) {
  std::vector<SummaryRow> rows;
  rows.push_back({"InputLayer", "-", "-", "-", feature_map_string(input_shape), "-"});

  Shape shape = input_shape;
  for (const LayerSpec& spec : specs) {
    shape = layer_output_shape(spec, shape);
    const std::string fm = shape_string(shape);
    if (const auto* conv = std::get_if<Conv2DSpec>(&spec)) {
      const std::string k = std::to_string(conv->kernel_size);
      rows.push_back({"Convolution", std::to_string(conv->out_channels), k + " x " + k, "1", fm, "-"});
    } else if (const auto* pool = std::get_if<MaxPoolSpec>(&spec)) {
      const std::string p = std::to_string(pool->pool_size);
      rows.push_back({"MaxPooling", "-", p + " x " + p, std::to_string(pool->stride), fm, "-"});
    } else if (std::holds_alternative<LeakyReLUSpec>(spec)) {
      const bool absorb = rows.size() > 1 && rows.back().activation == "-" &&
                          (rows.back().layer == "Convolution" || rows.back().layer == "FullConnect");
      if (absorb) {
        rows.back().activation = "LeakyReLU";
      } else {
        rows.push_back({"LeakyReLU", "-", "-", "-", fm, "-"});
      }
    } else if (std::holds_alternative<DropoutSpec>(spec)) {
      rows.push_back({"Dropout", "-", "-", "-", fm, "-"});
    } else if (std::holds_alternative<GaussianNoiseSpec>(spec)) {
      rows.push_back({"GaussianNoise", "-", "-", "-", fm, "-"});
    } else if (std::holds_alternative<FlattenSpec>(spec)) {
      rows.push_back({"Flatten", "-", "-", "-", fm, "-"});
    } else if (std::holds_alternative<DenseSpec>(spec)) {
      rows.push_back({"FullConnect", "-", "-", "-", fm, "-"});
    } else if (std::holds_alternative<SoftmaxSpec>(spec)) {
      rows.push_back({"Softmax", "-", "-", "-", fm, "-"});
    }
  }

  const SummaryRow header{"Layer", "Kernels", "Kernel Size", "Stride", "Feature Map Size", "Activation"};
  std::size_t widths[6] = {header.layer.size(),       header.kernels.size(),     header.kernel_size.size(),
                           header.stride.size(),      header.feature_map.size(), header.activation.size()};
  auto fields = [](const SummaryRow& r) {
    return std::array<const std::string*, 6>{&r.layer,  &r.kernels,     &r.kernel_size,
                                             &r.stride, &r.feature_map, &r.activation};
  };
  for (const auto& row : rows) {
    auto f = fields(row);
    for (std::size_t i = 0; i < 6; ++i) widths[i] = std::max(widths[i], f[i]->size());
  }

  std::ostringstream out;
  auto emit = [&](const SummaryRow& row) {
    auto f = fields(row);
    std::string line;
    for (std::size_t i = 0; i < 6; ++i) {
      line += *f[i];
      if (i + 1 < 6) line += std::string(widths[i] - f[i]->size() + 2, ' ');
    }
    out << line << '\n';
  };
  emit(header);
  // Empty models stop after the header.
  if (!specs.empty()) {
    for (const auto& row : rows) emit(row);
    out << "Total parameters: " << parameter_count(specs) << '\n';
  }
  return out.str();
}

template <typename T>
std::string summary(const Model<T>& model) {
  return summary(model.input_shape(), model.layer_specs());
}

template class Model<float>;
template class Model<double>;
template Model<float> build_model<float>(const ArchitectureConfig&, std::uint64_t, std::string);
template Model<double> build_model<double>(const ArchitectureConfig&, std::uint64_t, std::string);
template Model<float> build_paper_model<float>(const ArchitectureConfig&, std::uint64_t);
template Model<double> build_paper_model<double>(const ArchitectureConfig&, std::uint64_t);
template std::string summary<float>(const Model<float>&);
template std::string summary<double>(const Model<double>&);

}  // namespace lggnet
