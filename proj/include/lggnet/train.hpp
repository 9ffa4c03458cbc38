#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lggnet/data.hpp"
#include "lggnet/metrics.hpp"
#include "lggnet/model.hpp"
#include "lggnet/optim.hpp"

namespace lggnet {

enum class Monitor { ValLoss, ValAccuracy };

struct EarlyStopConfig {
  bool enabled = true;
  double min_delta = 0.001;
  std::size_t patience = 8;
  Monitor monitor = Monitor::ValLoss;
};

/// "No improvement of more than min_delta for `patience` epochs".
///
/// For loss, epoch e improves when best - value > min_delta (mirrored for
/// accuracy). The first observation always improves. Epochs are 1-based.
class EarlyStopping {
 public:
  explicit EarlyStopping(EarlyStopConfig config);

  /// Records the next epoch's monitored value; returns true if it improved.
  bool observe(double value);

  bool should_stop() const noexcept;
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  double best_value() const noexcept { return best_; }
  std::size_t epochs_seen() const noexcept { return epochs_; }

 private:
  EarlyStopConfig config_;
  double best_;
  std::size_t best_epoch_ = 0;
  std::size_t epochs_ = 0;
  std::size_t since_best_ = 0;
};

struct TrainConfig {
  std::size_t batch_size = 16;
  std::size_t max_epochs = 100;
  EarlyStopConfig early_stop;
  std::size_t k = 3;
  std::uint64_t seed = 42;
  OptimizerConfig optimizer;
  LrSchedule schedule;
  AugmentConfig augment;
  /// Worker threads for fold-level parallelism in cross_validate.
  std::size_t threads = 1;
  bool retrain_full = false;
};

void validate(const TrainConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double learning_rate = 0.0;
  double seconds = 0.0;
};

enum class StopReason { MaxEpochs, EarlyStopping };

std::string_view to_string(StopReason reason);

struct FitResult {
  std::vector<EpochRecord> history;
  StopReason stop_reason = StopReason::MaxEpochs;
  std::size_t best_epoch = 0;
};

struct FitHooks {
  /// Called after validation each epoch, before the early-stopping decision;
  /// may rewrite the record (used to script monitored sequences in tests).
  std::function<void(EpochRecord&)> on_epoch_end;
};

/// Mini-batch training with per-epoch validation and early stopping. Leaves
/// the model holding the weights of the best monitored epoch. Throws
/// DivergedError on a non-finite training loss.
template <typename T>
FitResult fit(Model<T>& model, std::span<const Sample> train, std::span<const Sample> val, const TrainConfig& config,
              const FitHooks& hooks = {});

struct Evaluation {
  MetricReport report;
  double mean_loss = 0.0;
  std::vector<int> predictions;
};

/// Argmax of the Inference-mode output; ties go to class 0.
template <typename T>
int predicted_class(const Tensor<T>& probs);

template <typename T>
Evaluation evaluate_detailed(Model<T>& model, std::span<const Sample> samples);

template <typename T>
MetricReport evaluate(Model<T>& model, std::span<const Sample> samples);

struct Prediction {
  int label = 0;
  std::vector<double> probabilities;
};

/// Decodes, preprocesses to the model input shape and classifies one image.
template <typename T>
Prediction predict(Model<T>& model, const std::filesystem::path& image_path);

struct FoldSummary {
  std::size_t fold = 0;
  std::size_t train_size = 0;
  std::size_t val_size = 0;
  std::size_t best_epoch = 0;
  StopReason stop_reason = StopReason::MaxEpochs;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double val_f1 = 0.0;  // support-weighted
  std::vector<EpochRecord> history;
};

/// Highest val_f1; ties go to lower val_loss, then lower fold index.
std::size_t select_best_fold(std::span<const FoldSummary> folds);

template <typename T>
struct CvResult {
  std::vector<FoldSummary> folds;
  std::size_t selected = 0;
  Model<T> model;  // the selected fold's trained model
};

/// Trains k freshly initialized models, fold i validating on fold i of a
/// stratified fold plan over `samples`, and keeps the best one.
template <typename T>
CvResult<T> cross_validate(std::span<const Sample> samples, const ArchitectureConfig& architecture,
                           const TrainConfig& config);

/// Seed used for the model built for fold `fold` (or the full-retrain model
/// when fold == k).
std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold);

}  // namespace lggnet
