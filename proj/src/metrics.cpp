#include "lggnet/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "lggnet/error.hpp"

namespace lggnet {
namespace {

Rate ratio(std::size_t num, std::size_t den) {
  if (den == 0) return {0.0, true};
  return {static_cast<double>(num) / static_cast<double>(den), false};
}

ClassMetrics class_metrics(const ConfusionMatrix& cm) {
  ClassMetrics m;
  m.precision = precision(cm);
  m.recall = recall(cm);
  m.f1 = f1(m.precision.value, m.recall.value);
  m.support = cm.tp + cm.fn;
  return m;
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw LabelError("confusion: " + std::to_string(predicted.size()) + " predictions for " +
                     std::to_string(truth.size()) + " labels");
  }
  if (predicted.empty()) throw LabelError("confusion: no labels");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const int p = predicted[i], t = truth[i];
    if ((p != 0 && p != 1) || (t != 0 && t != 1)) {
      throw LabelError("confusion: label outside {0, 1} at position " + std::to_string(i));
    }
    if (p == 1 && t == 1) ++cm.tp;
    else if (p == 1) ++cm.fp;
    else if (t == 1) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

Rate precision(const ConfusionMatrix& cm) { return ratio(cm.tp, cm.tp + cm.fp); }

Rate recall(const ConfusionMatrix& cm) { return ratio(cm.tp, cm.tp + cm.fn); }

double f1(double p, double r) {
  if (p + r == 0.0) return 0.0;
  return 2.0 * (r * p) / (r + p);
}

double accuracy(const ConfusionMatrix& cm) { return ratio(cm.tp + cm.tn, cm.total()).value; }

MetricReport report(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw LabelError("report: no samples");
  MetricReport r;
  r.matrix = cm;
  r.total = cm.total();
  r.classes[1] = class_metrics(cm);
  r.classes[0] = class_metrics(cm.swapped());
  r.accuracy = accuracy(cm);

  r.macro.precision = (r.classes[0].precision.value + r.classes[1].precision.value) / 2.0;
  r.macro.recall = (r.classes[0].recall.value + r.classes[1].recall.value) / 2.0;
  r.macro.f1 = (r.classes[0].f1 + r.classes[1].f1) / 2.0;

  const double n = static_cast<double>(r.total);
  for (const ClassMetrics& c : r.classes) {
    const double w = static_cast<double>(c.support) / n;
    r.weighted.precision += w * c.precision.value;
    r.weighted.recall += w * c.recall.value;
    r.weighted.f1 += w * c.f1;
  }
  return r;
}

MetricReport report(std::span<const int> predicted, std::span<const int> truth) {
  return report(confusion(predicted, truth));
}

nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json j;
  j["confusion_matrix"] = {{"tp", r.matrix.tp}, {"fp", r.matrix.fp}, {"fn", r.matrix.fn}, {"tn", r.matrix.tn}};
  nlohmann::json classes = nlohmann::json::array();
  for (std::size_t label = 0; label < 2; ++label) {
    const ClassMetrics& c = r.classes[label];
    classes.push_back({{"label", label},
                       {"precision", c.precision.value},
                       {"precision_degenerate", c.precision.degenerate},
                       {"recall", c.recall.value},
                       {"recall_degenerate", c.recall.degenerate},
                       {"f1", c.f1},
                       {"support", c.support}});
  }
  j["classes"] = classes;
  j["accuracy"] = r.accuracy;
  j["macro_avg"] = {{"precision", r.macro.precision}, {"recall", r.macro.recall}, {"f1", r.macro.f1}};
  j["weighted_avg"] = {{"precision", r.weighted.precision}, {"recall", r.weighted.recall}, {"f1", r.weighted.f1}};
  j["total"] = r.total;
  return j;
}

std::string format_report(const MetricReport& r, const std::array<std::string, 2>& class_names) {
  std::size_t name_width = 12;
  for (const auto& n : class_names) name_width = std::max(name_width, n.size());

  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %9s  %9s  %9s  %7s\n", static_cast<int>(name_width), "type", "precision",
                "recall", "f1-score", "images");
  out << line;
  // Positive class first.
  for (int label : {1, 0}) {
    const ClassMetrics& c = r.classes[static_cast<std::size_t>(label)];
    std::snprintf(line, sizeof line, "%-*s  %9.4f%s %9.4f%s %9.4f  %7zu\n", static_cast<int>(name_width),
                  class_names[static_cast<std::size_t>(label)].c_str(), c.precision.value,
                  c.precision.degenerate ? "*" : " ", c.recall.value, c.recall.degenerate ? "*" : " ", c.f1,
                  c.support);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-*s  %9.4f  %9.4f  %9.4f  %7zu\n", static_cast<int>(name_width), "macro avg",
                r.macro.precision, r.macro.recall, r.macro.f1, r.total);
  out << line;
  std::snprintf(line, sizeof line, "%-*s  %9.4f  %9.4f  %9.4f  %7zu\n", static_cast<int>(name_width),
                "avg / total", r.weighted.precision, r.weighted.recall, r.weighted.f1, r.total);
  out << line;
  std::snprintf(line, sizeof line, "accuracy %.4f   (tp=%zu fp=%zu fn=%zu tn=%zu)\n", r.accuracy, r.matrix.tp,
                r.matrix.fp, r.matrix.fn, r.matrix.tn);
  out << line;
  if (r.classes[0].precision.degenerate || r.classes[1].precision.degenerate || r.classes[0].recall.degenerate ||
      r.classes[1].recall.degenerate) {
    out << "* zero denominator, reported as 0\n";
  }
  return out.str();
}

}  // namespace lggnet
