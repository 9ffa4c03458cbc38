#include "lggnet/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace lggnet {
namespace fs = std::filesystem;
namespace {

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

void check_fraction(double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("test fraction must lie strictly between 0 and 1");
}

Sample random_variant(const Sample& sample, Rng& rng, const AugmentConfig& config) {
  std::vector<int> kinds;
  if (config.flip_horizontal) kinds.push_back(0);
  if (config.flip_vertical) kinds.push_back(1);
  if (config.rotate) kinds.push_back(2);
  if (config.translate) kinds.push_back(3);
  Sample out = sample;
  if (kinds.empty()) return out;
  switch (kinds[rng.below(kinds.size())]) {
    case 0: out.image = flip_horizontal(sample.image); break;
    case 1: out.image = flip_vertical(sample.image); break;
    case 2:
      out.image = rotate(sample.image, rng.uniform(-config.max_rotation_degrees, config.max_rotation_degrees));
      break;
    default: {
      const auto span = static_cast<std::uint64_t>(2 * config.max_shift + 1);
      const long dy = static_cast<long>(rng.below(span)) - config.max_shift;
      const long dx = static_cast<long>(rng.below(span)) - config.max_shift;
      out.image = translate(sample.image, dy, dx);
    }
  }
  return out;
}

}  // namespace

LoadResult load_directory(const fs::path& root, const ClassMap& classes, const ImageFormat& format) {
  if (!fs::is_directory(root)) throw DataError("data root " + root.string() + " is not a directory");
  if (classes.labels.empty()) throw DataError("no class directories configured");

  const std::set<std::string> excluded(classes.excluded.begin(), classes.excluded.end());
  for (const auto& [name, label] : classes.labels) {
    if (!fs::is_directory(root / name)) throw DataError("class directory " + (root / name).string() + " is missing");
  }

  std::vector<std::pair<fs::path, int>> files;
  std::vector<std::string> skipped;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (excluded.count(name) > 0) continue;
    const auto it = classes.labels.find(name);
    if (it == classes.labels.end()) {
      throw DataError("unknown class directory '" + name + "' (map it to a label or exclude it)");
    }
    for (const auto& file : fs::directory_iterator(entry.path())) {
      if (!file.is_regular_file()) continue;
      if (file.path().filename().string().starts_with(".")) continue;
      if (!has_image_extension(file.path())) {
        skipped.push_back(file.path().string());
        continue;
      }
      files.emplace_back(file.path(), it->second);
    }
  }
  std::sort(files.begin(), files.end());

  LoadResult result;
  for (const auto& [path, label] : files) {
    try {
      result.samples.push_back({preprocess(decode_image(path), format.height, format.width, format.channels), label,
                                path.string()});
    } catch (const DataError&) {
      skipped.push_back(path.string());
    }
  }
  std::sort(skipped.begin(), skipped.end());
  result.skipped = std::move(skipped);
  if (result.samples.empty()) throw DataError("no readable images under " + root.string());
  return result;
}

SplitIndices split_indices(std::span<const int> labels, double test_fraction, Rng& rng) {
  check_fraction(test_fraction);
  if (labels.size() < 2) throw DataError("split needs at least two samples");

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  SplitIndices out;
  for (auto& [label, members] : by_class) {
    if (members.size() < 2) {
      throw DataError("class " + std::to_string(label) + " has fewer than two samples; cannot split");
    }
    rng.shuffle(std::span(members));
    const auto n = static_cast<long>(members.size());
    const long n_test = std::clamp(std::lround(static_cast<double>(n) * test_fraction), 1L, n - 1);
    out.test.insert(out.test.end(), members.begin(), members.begin() + n_test);
    out.train.insert(out.train.end(), members.begin() + n_test, members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

DatasetSplit split(const std::vector<Sample>& samples, double test_fraction, Rng& rng) {
  std::vector<int> labels;
  labels.reserve(samples.size());
  for (const Sample& s : samples) labels.push_back(s.label);
  const SplitIndices idx = split_indices(labels, test_fraction, rng);

  DatasetSplit out;
  out.seed = rng.seed();
  out.test_fraction = test_fraction;
  for (std::size_t i : idx.train) out.train.push_back(samples[i]);
  for (std::size_t i : idx.test) out.test.push_back(samples[i]);
  return out;
}

std::vector<std::size_t> FoldPlan::complement(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (f != i) out.insert(out.end(), folds[f].begin(), folds[f].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

FoldPlan deal(const std::vector<std::size_t>& order, std::size_t k) {
  FoldPlan plan;
  plan.k = k;
  plan.folds.resize(k);
  for (std::size_t i = 0; i < order.size(); ++i) plan.folds[i % k].push_back(order[i]);
  for (auto& fold : plan.folds) std::sort(fold.begin(), fold.end());
  return plan;
}

void check_k(std::size_t n, std::size_t k) {
  if (k < 2) throw ConfigError("k-fold needs k >= 2");
  if (n < k) {
    throw DataError("cannot build " + std::to_string(k) + " folds from " + std::to_string(n) + " samples");
  }
}

}  // namespace

FoldPlan kfold(std::span<const std::size_t> indices, std::size_t k, Rng& rng) {
  check_k(indices.size(), k);
  std::vector<std::size_t> order(indices.begin(), indices.end());
  rng.shuffle(std::span(order));
  return deal(order, k);
}

FoldPlan stratified_kfold(std::span<const std::size_t> indices, std::span<const int> labels, std::size_t k, Rng& rng) {
  if (indices.size() != labels.size()) throw ShapeError("stratified_kfold: indices and labels differ in length");
  check_k(indices.size(), k);
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < indices.size(); ++i) by_class[labels[i]].push_back(indices[i]);
  std::vector<std::size_t> order;
  for (auto& [label, members] : by_class) {
    rng.shuffle(std::span(members));
    order.insert(order.end(), members.begin(), members.end());
  }
  return deal(order, k);
}

std::vector<Sample> augment(const Sample& sample, Rng& rng, const AugmentConfig& config) {
  std::vector<Sample> out{sample};
  auto variant = [&](Tensor<float> image) {
    Sample s = sample;
    s.image = std::move(image);
    out.push_back(std::move(s));
  };
  if (config.flip_horizontal) variant(flip_horizontal(sample.image));
  if (config.flip_vertical) variant(flip_vertical(sample.image));
  if (config.rotate) {
    variant(rotate(sample.image, rng.uniform(-config.max_rotation_degrees, config.max_rotation_degrees)));
  }
  if (config.translate) {
    const auto span = static_cast<std::uint64_t>(2 * config.max_shift + 1);
    const long dy = static_cast<long>(rng.below(span)) - config.max_shift;
    const long dx = static_cast<long>(rng.below(span)) - config.max_shift;
    variant(translate(sample.image, dy, dx));
  }
  return out;
}

std::vector<Sample> augment_dataset(std::span<const Sample> samples, Rng& rng, const AugmentConfig& config) {
  std::vector<Sample> out;
  for (const Sample& s : samples) {
    auto variants = augment(s, rng, config);
    std::move(variants.begin(), variants.end(), std::back_inserter(out));
  }
  if (!config.balance || samples.empty()) return out;

  std::map<int, std::vector<std::size_t>> originals;
  for (std::size_t i = 0; i < samples.size(); ++i) originals[samples[i].label].push_back(i);
  std::map<int, std::size_t> counts;
  for (const Sample& s : out) ++counts[s.label];
  if (counts.size() < 2) return out;

  const std::size_t target = std::max_element(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
                               return a.second < b.second;
                             })->second;
  for (auto& [label, count] : counts) {
    std::vector<std::size_t>& pool = originals[label];
    rng.shuffle(std::span(pool));
    for (std::size_t i = 0; count + 1 < target; ++i, ++count) {
      out.push_back(random_variant(samples[pool[i % pool.size()]], rng, config));
    }
  }
  return out;
}

std::vector<Sample> make_blob_dataset(std::size_t positives, std::size_t negatives, std::size_t size, Rng& rng) {
  if (size < 4) throw ConfigError("synthetic images must be at least 4 pixels wide");
  std::vector<Sample> out;
  const double extent = static_cast<double>(size);
  auto background = [&]() {
    Tensor<float> image({size, size, 1});
    for (float& v : image.values()) v = static_cast<float>(0.05 + 0.1 * rng.uniform());
    return image;
  };
  char name[64];
  for (std::size_t i = 0; i < positives; ++i) {
    Tensor<float> image = background();
    const double cy = rng.uniform(0.3 * extent, 0.7 * extent);
    const double cx = rng.uniform(0.3 * extent, 0.7 * extent);
    const double sigma = rng.uniform(extent / 12.0, extent / 7.0);
    const double amplitude = rng.uniform(0.6, 0.85);
    for (std::size_t y = 0; y < size; ++y) {
      for (std::size_t x = 0; x < size; ++x) {
        const double r2 = (static_cast<double>(y) - cy) * (static_cast<double>(y) - cy) +
                          (static_cast<double>(x) - cx) * (static_cast<double>(x) - cx);
        const double v = image.at(y, x, 0) + amplitude * std::exp(-r2 / (2.0 * sigma * sigma));
        image.at(y, x, 0) = static_cast<float>(std::min(v, 1.0));
      }
    }
    std::snprintf(name, sizeof name, "yes/blob_%04zu.png", i);
    out.push_back({std::move(image), 1, name});
  }
  for (std::size_t i = 0; i < negatives; ++i) {
    std::snprintf(name, sizeof name, "no/blank_%04zu.png", i);
    out.push_back({background(), 0, name});
  }
  return out;
}

void write_dataset(const fs::path& root, std::span<const Sample> samples) {
  fs::create_directories(root / "yes");
  fs::create_directories(root / "no");
  char name[64];
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    RawImage raw;
    raw.height = s.image.extent(0);
    raw.width = s.image.extent(1);
    raw.channels = s.image.extent(2);
    raw.pixels.resize(s.image.size());
    for (std::size_t j = 0; j < s.image.size(); ++j) {
      raw.pixels[j] = static_cast<std::uint8_t>(std::lround(std::clamp(s.image[j], 0.0f, 1.0f) * 255.0f));
    }
    std::snprintf(name, sizeof name, "%s/img_%05zu.png", s.label == 1 ? "yes" : "no", i);
    write_image(root / name, raw);
  }
}

void write_manifest_csv(const fs::path& file, std::span<const ManifestRow> rows) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error("cannot write " + file.string());
  out << "path,label,split,fold\n";
  for (const ManifestRow& row : rows) {
    out << row.path << ',' << row.label << ',' << row.split << ',';
    if (row.fold >= 0) out << row.fold;
    out << '\n';
  }
}

}  // namespace lggnet
