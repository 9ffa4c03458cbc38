#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lggnet/image.hpp"
#include "lggnet/rng.hpp"

namespace lggnet {

/// A preprocessed image with its label (0 = not codeleted / "no",
/// 1 = codeleted / "yes").
struct Sample {
  Tensor<float> image;
  int label = 0;
  std::string path;
};

/// Maps class directory names to labels; `excluded` names directories that are
/// skipped entirely.
struct ClassMap {
  std::map<std::string, int> labels{{"no", 0}, {"yes", 1}};
  std::vector<std::string> excluded;
};

struct ImageFormat {
  std::size_t height = 256;
  std::size_t width = 256;
  std::size_t channels = 1;
};

struct LoadResult {
  std::vector<Sample> samples;  // sorted by path
  std::vector<std::string> skipped;  // files that failed to decode
};

/// Loads <root>/<class>/<image>. Every subdirectory of root must be either a
/// mapped class or excluded; unreadable files are skipped and listed.
/// Throws DataError for a missing root, a missing or unknown class directory,
/// or when no image could be read.
LoadResult load_directory(const std::filesystem::path& root, const ClassMap& classes, const ImageFormat& format = {});

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified split: each class independently sends round(n_c * fraction)
/// (clamped to [1, n_c - 1]) of its shuffled members to test. Both lists are
/// returned in ascending index order.
SplitIndices split_indices(std::span<const int> labels, double test_fraction, Rng& rng);

struct DatasetSplit {
  std::vector<Sample> train;
  std::vector<Sample> test;
  std::uint64_t seed = 0;
  double test_fraction = 0.0;
};

DatasetSplit split(const std::vector<Sample>& samples, double test_fraction, Rng& rng);

/// k disjoint folds whose union is the input index set.
struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::vector<std::size_t>> folds;

  /// Indices outside fold i.
  std::vector<std::size_t> complement(std::size_t i) const;
};

/// Shuffles the indices and deals them round-robin into k folds.
FoldPlan kfold(std::span<const std::size_t> indices, std::size_t k, Rng& rng);

/// Shuffles each class separately, lays the classes end to end and deals
/// round-robin, so fold sizes and per-fold class counts each differ by at most
/// one. labels[i] is the label of indices[i].
FoldPlan stratified_kfold(std::span<const std::size_t> indices, std::span<const int> labels, std::size_t k, Rng& rng);

struct AugmentConfig {
  bool flip_horizontal = false;
  bool flip_vertical = false;
  bool rotate = false;
  double max_rotation_degrees = 15.0;
  bool translate = false;
  long max_shift = 10;
  /// Oversample the minority class with augmented copies until class counts
  /// differ by at most one.
  bool balance = false;

  bool any_transform() const { return flip_horizontal || flip_vertical || rotate || translate; }
};

/// The sample followed by one variant per enabled transform.
std::vector<Sample> augment(const Sample& sample, Rng& rng, const AugmentConfig& config);

/// augment() over a set, then class balancing when configured.
std::vector<Sample> augment_dataset(std::span<const Sample> samples, Rng& rng, const AugmentConfig& config);

/// Synthetic stand-in data: label 1 images carry a bright Gaussian blob on a
/// dim noisy background, label 0 images are background only.
std::vector<Sample> make_blob_dataset(std::size_t positives, std::size_t negatives, std::size_t size, Rng& rng);

/// Writes a dataset as <root>/yes/*.png and <root>/no/*.png.
void write_dataset(const std::filesystem::path& root, std::span<const Sample> samples);

/// Writes the optional dataset manifest CSV: path,label,split,fold.
struct ManifestRow {
  std::string path;
  int label = 0;
  std::string split;
  long fold = -1;
};
void write_manifest_csv(const std::filesystem::path& file, std::span<const ManifestRow> rows);

}  // namespace lggnet
