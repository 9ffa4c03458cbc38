#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace lggnet::testing {

// Straight recount of a binary classification outcome, kept free of any
// library code so it can check it.
struct OracleClass {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;
};

struct OracleReport {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::array<OracleClass, 2> classes;
  double accuracy = 0;
  double macro_f1 = 0;
  double weighted_f1 = 0;
};

inline OracleReport oracle_report(const std::vector<int>& pred, const std::vector<int>& truth) {
  OracleReport r;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == 1 && truth[i] == 1) ++r.tp;
    if (pred[i] == 1 && truth[i] == 0) ++r.fp;
    if (pred[i] == 0 && truth[i] == 1) ++r.fn;
    if (pred[i] == 0 && truth[i] == 0) ++r.tn;
  }
  for (int label = 0; label < 2; ++label) {
    std::size_t hit = 0, predicted = 0, actual = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      predicted += pred[i] == label;
      actual += truth[i] == label;
      hit += pred[i] == label && truth[i] == label;
    }
    OracleClass& c = r.classes[static_cast<std::size_t>(label)];
    c.precision = predicted ? static_cast<double>(hit) / static_cast<double>(predicted) : 0.0;
    c.recall = actual ? static_cast<double>(hit) / static_cast<double>(actual) : 0.0;
    c.f1 = c.precision + c.recall > 0 ? 2 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
    c.support = actual;
  }
  const double n = static_cast<double>(pred.size());
  r.accuracy = static_cast<double>(r.tp + r.tn) / n;
  r.macro_f1 = (r.classes[0].f1 + r.classes[1].f1) / 2;
  r.weighted_f1 = (r.classes[0].f1 * static_cast<double>(r.classes[0].support) +
                   r.classes[1].f1 * static_cast<double>(r.classes[1].support)) /
                  n;
  return r;
}

}  // namespace lggnet::testing
