#include <gtest/gtest.h>

#include "lggnet/error.hpp"
#include "lggnet/metrics.hpp"
#include "lggnet/rng.hpp"
#include "metric_oracle.hpp"

namespace lggnet {
namespace {

ConfusionMatrix cm_of(std::vector<int> pred, std::vector<int> truth) { return confusion(pred, truth); }

TEST(ConfusionTest, CountsEachCell) {
  const auto cm = cm_of({1, 1, 0, 0, 1}, {1, 0, 1, 0, 1});
  EXPECT_EQ(cm, (ConfusionMatrix{2, 1, 1, 1}));
  EXPECT_EQ(cm.total(), 5u);
}

TEST(ConfusionTest, InvalidInput) {
  EXPECT_THROW(cm_of({1, 0}, {1}), LabelError);
  EXPECT_THROW(cm_of({}, {}), LabelError);
  EXPECT_THROW(cm_of({2}, {1}), LabelError);
  EXPECT_THROW(cm_of({0}, {-1}), LabelError);
}

TEST(RateTest, PrecisionAndRecall) {
  const ConfusionMatrix cm{8, 2, 1, 9};
  EXPECT_DOUBLE_EQ(precision(cm).value, 0.8);
  EXPECT_NEAR(recall(cm).value, 0.888889, 1e-6);
  EXPECT_FALSE(precision(cm).degenerate);
  EXPECT_DOUBLE_EQ(accuracy(cm), 17.0 / 20.0);
}

TEST(RateTest, ZeroDenominatorsAreFlagged) {
  const ConfusionMatrix no_positive_predictions{0, 0, 3, 5};
  EXPECT_EQ(precision(no_positive_predictions).value, 0.0);
  EXPECT_TRUE(precision(no_positive_predictions).degenerate);
  const ConfusionMatrix no_positive_truth{0, 2, 0, 5};
  EXPECT_EQ(recall(no_positive_truth).value, 0.0);
  EXPECT_TRUE(recall(no_positive_truth).degenerate);
}

TEST(F1Test, KnownValues) {
  EXPECT_NEAR(f1(0.8, 0.888889), 0.842105, 1e-6);
  EXPECT_NEAR(f1(1.0, 0.9644), 0.98188, 1e-5);
  EXPECT_EQ(f1(0.0, 0.0), 0.0);
  EXPECT_EQ(f1(1.0, 1.0), 1.0);
}

TEST(F1Test, BoundedByPrecisionAndRecall) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform(), r = rng.uniform();
    const double f = f1(p, r);
    EXPECT_LE(f, std::max(p, r) + 1e-15);
    EXPECT_GE(f, std::min(p, r) - 1e-15);
    EXPECT_LE(f, (p + r) / 2 + 1e-15);
    EXPECT_DOUBLE_EQ(f, f1(r, p));
  }
}

TEST(ReportTest, PerfectPrediction) {
  const std::vector<int> y = {0, 1, 1, 0, 1};
  const auto r = report(y, y);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.macro.f1, 1.0);
  EXPECT_EQ(r.weighted.f1, 1.0);
  EXPECT_EQ(r.classes[0].support, 2u);
  EXPECT_EQ(r.classes[1].support, 3u);
}

TEST(ReportTest, ConstantPredictorHasDegenerateClass) {
  const std::vector<int> pred(10, 1), truth = {1, 1, 1, 1, 1, 1, 0, 0, 0, 0};
  const auto r = report(pred, truth);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.6);
  EXPECT_TRUE(r.classes[0].precision.degenerate);
  EXPECT_EQ(r.classes[0].f1, 0.0);
  EXPECT_DOUBLE_EQ(r.classes[1].precision.value, 0.6);
  EXPECT_EQ(r.classes[1].recall.value, 1.0);
  EXPECT_DOUBLE_EQ(r.classes[1].f1, 0.75);
  EXPECT_DOUBLE_EQ(r.macro.f1, 0.375);
  EXPECT_DOUBLE_EQ(r.weighted.f1, 0.45);
}

TEST(ReportTest, SwappingLabelsSwapsClassRows) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(50);
    std::vector<int> pred(n), truth(n), pred_s(n), truth_s(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = static_cast<int>(rng.below(2));
      truth[i] = static_cast<int>(rng.below(2));
      pred_s[i] = 1 - pred[i];
      truth_s[i] = 1 - truth[i];
    }
    const auto a = report(pred, truth), b = report(pred_s, truth_s);
    EXPECT_EQ(b.matrix, a.matrix.swapped());
    EXPECT_EQ(a.accuracy, b.accuracy);
    EXPECT_DOUBLE_EQ(a.macro.f1, b.macro.f1);
    EXPECT_DOUBLE_EQ(a.weighted.f1, b.weighted.f1);
    EXPECT_EQ(a.classes[0].f1, b.classes[1].f1);
    EXPECT_EQ(a.classes[1].precision.value, b.classes[0].precision.value);
  }
}

TEST(ReportTest, MatchesBruteForceRecount) {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(1000);
    const double bias = rng.uniform();
    std::vector<int> pred(n), truth(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = rng.uniform() < bias;
      pred[i] = rng.uniform() < 0.8 ? truth[i] : 1 - truth[i];
    }
    const auto want = testing::oracle_report(pred, truth);
    const auto got = report(pred, truth);
    EXPECT_EQ(got.matrix, (ConfusionMatrix{want.tp, want.fp, want.fn, want.tn}));
    EXPECT_NEAR(got.accuracy, want.accuracy, 1e-12);
    for (std::size_t c = 0; c < 2; ++c) {
      EXPECT_NEAR(got.classes[c].precision.value, want.classes[c].precision, 1e-12);
      EXPECT_NEAR(got.classes[c].recall.value, want.classes[c].recall, 1e-12);
      EXPECT_NEAR(got.classes[c].f1, want.classes[c].f1, 1e-12);
      EXPECT_EQ(got.classes[c].support, want.classes[c].support);
    }
    EXPECT_NEAR(got.macro.f1, want.macro_f1, 1e-12);
    EXPECT_NEAR(got.weighted.f1, want.weighted_f1, 1e-12);
    for (double v : {got.accuracy, got.macro.f1, got.weighted.f1, got.macro.precision, got.weighted.recall}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(ReportTest, JsonCarriesEveryField) {
  const auto j = to_json(report(std::vector<int>{1, 0, 1}, std::vector<int>{1, 1, 0}));
  EXPECT_EQ(j["confusion_matrix"]["tp"], 1);
  EXPECT_EQ(j["classes"].size(), 2u);
  EXPECT_TRUE(j.contains("macro_avg"));
  EXPECT_TRUE(j.contains("weighted_avg"));
  EXPECT_EQ(j["total"], 3);
}

TEST(ReportTest, TableMarksDegenerateValues) {
  const std::vector<int> pred(4, 1), truth = {1, 1, 0, 0};
  const std::string table = format_report(report(pred, truth));
  EXPECT_NE(table.find("not deleted"), std::string::npos);
  EXPECT_NE(table.find("deleted"), std::string::npos);
  EXPECT_NE(table.find('*'), std::string::npos);
  EXPECT_NE(table.find("macro avg"), std::string::npos);
  EXPECT_NE(table.find("avg / total"), std::string::npos);
}

}  // namespace
}  // namespace lggnet
