#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

#include <json.hpp>

namespace lggnet {

/// 2x2 counts with label 1 as the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  /// Same counts with the roles of the two classes exchanged.
  ConfusionMatrix swapped() const noexcept { return {tn, fn, fp, tp}; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// A ratio in [0, 1]. `degenerate` marks a zero denominator, in which case
/// value is 0.
struct Rate {
  double value = 0.0;
  bool degenerate = false;
};

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth);

Rate precision(const ConfusionMatrix& cm);
Rate recall(const ConfusionMatrix& cm);
/// 2pr / (p + r); 0 when p + r = 0.
double f1(double precision, double recall);
double accuracy(const ConfusionMatrix& cm);

struct ClassMetrics {
  Rate precision;
  Rate recall;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct AveragedMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricReport {
  ConfusionMatrix matrix;
  std::array<ClassMetrics, 2> classes;  // indexed by label
  double accuracy = 0.0;
  AveragedMetrics macro;
  AveragedMetrics weighted;
  std::size_t total = 0;
};

MetricReport report(std::span<const int> predicted, std::span<const int> truth);
MetricReport report(const ConfusionMatrix& cm);

nlohmann::json to_json(const MetricReport& r);

/// Console table laid out like a precision/recall/F1 results table.
/// `class_names` label the rows for label 0 and label 1.
std::string format_report(const MetricReport& r,
                          const std::array<std::string, 2>& class_names = {"not deleted", "deleted"});

}  // namespace lggnet
