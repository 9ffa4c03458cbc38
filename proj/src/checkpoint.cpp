#include "lggnet/checkpoint.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "lggnet/ptf.hpp"

namespace lggnet {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

[[noreturn]] void corrupt(const std::string& why) {
  throw CheckpointError(CheckpointError::Kind::Corrupt, "corrupt checkpoint: " + why);
}

}  // namespace

json layer_spec_to_json(const LayerSpec& spec) {
  json j;
  j["kind"] = std::string(layer_kind_name(spec));
  if (const auto* s = std::get_if<Conv2DSpec>(&spec)) {
    j["in_channels"] = s->in_channels;
    j["out_channels"] = s->out_channels;
    j["kernel_size"] = s->kernel_size;
    j["stride"] = 1;
  } else if (const auto* s = std::get_if<MaxPoolSpec>(&spec)) {
    j["pool_size"] = s->pool_size;
    j["stride"] = s->stride;
  } else if (const auto* s = std::get_if<LeakyReLUSpec>(&spec)) {
    j["alpha"] = s->alpha;
  } else if (const auto* s = std::get_if<DropoutSpec>(&spec)) {
    j["rate"] = s->rate;
  } else if (const auto* s = std::get_if<GaussianNoiseSpec>(&spec)) {
    j["stddev"] = s->stddev;
  } else if (const auto* s = std::get_if<DenseSpec>(&spec)) {
    j["in_dim"] = s->in_dim;
    j["out_dim"] = s->out_dim;
  }
  return j;
}

LayerSpec layer_spec_from_json(const json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "conv2d") {
      if (j.contains("stride") && j.at("stride").get<std::size_t>() != 1) corrupt("conv2d stride must be 1");
      return Conv2DSpec{j.at("in_channels").get<std::size_t>(), j.at("out_channels").get<std::size_t>(),
                        j.at("kernel_size").get<std::size_t>()};
    }
    if (kind == "maxpool") return MaxPoolSpec{j.at("pool_size").get<std::size_t>(), j.at("stride").get<std::size_t>()};
    if (kind == "leaky_relu") return LeakyReLUSpec{j.at("alpha").get<double>()};
    if (kind == "dropout") return DropoutSpec{j.at("rate").get<double>()};
    if (kind == "gaussian_noise") return GaussianNoiseSpec{j.at("stddev").get<double>()};
    if (kind == "flatten") return FlattenSpec{};
    if (kind == "dense") return DenseSpec{j.at("in_dim").get<std::size_t>(), j.at("out_dim").get<std::size_t>()};
    if (kind == "softmax") return SoftmaxSpec{};
    corrupt("unknown layer kind '" + kind + "'");
  } catch (const json::exception& e) {
    corrupt(std::string("bad layer entry: ") + e.what());
  }
}

template <typename T>
void save_checkpoint(const Model<T>& model, const fs::path& dir, const json& extra) {
  fs::create_directories(dir / "weights");

  const auto params = model.parameters();
  const auto names = model.parameter_names();
  json layers = json::array();
  std::size_t next_param = 0;
  const auto specs = model.layer_specs();
  for (const LayerSpec& spec : specs) {
    json entry = layer_spec_to_json(spec);
    json files = json::object();
    const std::size_t owned = std::holds_alternative<Conv2DSpec>(spec) || std::holds_alternative<DenseSpec>(spec) ? 2 : 0;
    for (std::size_t i = 0; i < owned; ++i, ++next_param) {
      const std::string rel = "weights/" + names[next_param] + ".ptf";
      save_ptf(dir / rel, params[next_param]->value);
      files[params[next_param]->name] = rel;
    }
    if (owned > 0) entry["params"] = files;
    layers.push_back(std::move(entry));
  }

  json manifest;
  manifest["format_version"] = kModelFormatVersion;
  manifest["name"] = model.name();
  manifest["dtype"] = std::is_same_v<T, float> ? "f32" : "f64";
  manifest["input_shape"] = model.input_shape();
  manifest["rng_seed"] = model.seed();
  manifest["created_at"] = utc_timestamp();
  manifest["parameter_count"] = model.parameter_count();
  manifest["layers"] = std::move(layers);
  manifest["extra"] = extra;

  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

template <typename T>
Model<T> load_checkpoint(const fs::path& dir, json* manifest_out) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::is_regular_file(manifest_path)) {
    throw CheckpointError(CheckpointError::Kind::NotFound, "no checkpoint manifest at " + manifest_path.string());
  }
  json manifest;
  {
    std::ifstream in(manifest_path);
    try {
      manifest = json::parse(in);
    } catch (const json::exception& e) {
      corrupt(std::string("manifest is not valid JSON: ") + e.what());
    }
  }
  if (!manifest.is_object() || !manifest.contains("format_version")) corrupt("manifest lacks format_version");
  if (!manifest["format_version"].is_number_integer() ||
      manifest["format_version"].get<int>() != kModelFormatVersion) {
    throw CheckpointError(CheckpointError::Kind::VersionMismatch,
                          "checkpoint format_version " + manifest["format_version"].dump() +
                              " is not supported (expected " + std::to_string(kModelFormatVersion) + ")");
  }

  Shape input_shape;
  std::vector<LayerSpec> specs;
  std::vector<json> layer_entries;
  std::uint64_t seed = 0;
  std::string name;
  try {
    input_shape = manifest.at("input_shape").get<Shape>();
    seed = manifest.value("rng_seed", std::uint64_t{0});
    name = manifest.value("name", std::string("model"));
    for (const json& entry : manifest.at("layers")) {
      specs.push_back(layer_spec_from_json(entry));
      layer_entries.push_back(entry);
    }
  } catch (const json::exception& e) {
    corrupt(std::string("bad manifest field: ") + e.what());
  }

  Model<T> model;
  try {
    model = Model<T>(input_shape, specs, seed, name);
  } catch (const ShapeError& e) {
    corrupt(std::string("inconsistent architecture: ") + e.what());
  } catch (const ConfigError& e) {
    corrupt(std::string("invalid layer hyperparameters: ") + e.what());
  }

  std::size_t layer_index = 0;
  for (std::size_t i = 0; i < model.layer_count(); ++i, ++layer_index) {
    for (Parameter<T>* p : model.layer(i).parameters()) {
      const json& entry = layer_entries[layer_index];
      if (!entry.contains("params") || !entry["params"].contains(p->name)) {
        corrupt("layer " + std::to_string(i) + " does not list its '" + p->name + "' file");
      }
      const std::string rel = entry["params"][p->name];
      const fs::path file = dir / rel;
      Tensor<T> value = load_ptf<T>(file);
      if (value.shape() != p->value.shape()) {
        throw CheckpointError(CheckpointError::Kind::ShapeMismatch,
                              file.string() + " has shape [" + shape_string(value.shape()) + "] but layer " +
                                  std::to_string(i) + " (" + std::string(model.layer(i).kind_name()) +
                                  ") declares [" + shape_string(p->value.shape()) + "]");
      }
      p->value = std::move(value);
    }
  }
  if (manifest_out != nullptr) *manifest_out = std::move(manifest);
  return model;
}

template void save_checkpoint<float>(const Model<float>&, const fs::path&, const json&);
template void save_checkpoint<double>(const Model<double>&, const fs::path&, const json&);
template Model<float> load_checkpoint<float>(const fs::path&, json*);
template Model<double> load_checkpoint<double>(const fs::path&, json*);

}  // namespace lggnet
