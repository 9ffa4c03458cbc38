#include "lggnet/train.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace lggnet {

// ---------------------------------------------------------------- EarlyStopping

EarlyStopping::EarlyStopping(EarlyStopConfig config)
    : config_(config),
      best_(config.monitor == Monitor::ValLoss ? std::numeric_limits<double>::infinity()
                                               : -std::numeric_limits<double>::infinity()) {
  if (config_.patience == 0) throw ConfigError("early stopping patience must be at least 1");
  if (!(config_.min_delta >= 0.0)) throw ConfigError("early stopping min_delta must be non-negative");
}

bool EarlyStopping::observe(double value) {
  ++epochs_;
  const bool first = best_epoch_ == 0;
  const double gain = config_.monitor == Monitor::ValLoss ? best_ - value : value - best_;
  if (first || gain > config_.min_delta) {
    best_ = value;
    best_epoch_ = epochs_;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

bool EarlyStopping::should_stop() const noexcept { return config_.enabled && since_best_ >= config_.patience; }

// ---------------------------------------------------------------- config

void validate(const TrainConfig& c) {
  if (c.batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (c.max_epochs == 0) throw ConfigError("max_epochs must be at least 1");
  if (c.early_stop.patience == 0) throw ConfigError("early stopping patience must be at least 1");
  if (!(c.early_stop.min_delta >= 0.0)) throw ConfigError("early stopping min_delta must be non-negative");
  if (c.k < 2) throw ConfigError("k must be at least 2");
  if (c.threads == 0) throw ConfigError("threads must be at least 1");
  if (c.augment.max_shift < 0) throw ConfigError("augment max_shift must be non-negative");
  if (!(c.augment.max_rotation_degrees >= 0.0)) throw ConfigError("augment max rotation must be non-negative");
  validate(c.optimizer);
  validate(c.schedule);
}

std::string_view to_string(StopReason reason) {
  return reason == StopReason::MaxEpochs ? "max_epochs" : "early_stopping";
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) { return Rng::mix_seed(seed, 0x1000 + fold); }

// ---------------------------------------------------------------- fit

namespace {

template <typename T>
std::vector<Tensor<T>> images_of(std::span<const Sample> samples) {
  std::vector<Tensor<T>> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(tensor_cast<T>(s.image));
  return out;
}

struct Pass {
  double loss = 0.0;
  double accuracy = 0.0;
};

template <typename T>
Pass inference_pass(Model<T>& model, const std::vector<Tensor<T>>& images, std::span<const Sample> samples,
                    std::vector<int>* predictions = nullptr) {
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Tensor<T> probs = model.predict(images[i]);
    loss += cross_entropy(probs, samples[i].label);
    const int predicted = predicted_class(probs);
    if (predicted == samples[i].label) ++correct;
    if (predictions != nullptr) predictions->push_back(predicted);
  }
  const double n = static_cast<double>(images.size());
  return {loss / n, static_cast<double>(correct) / n};
}

}  // namespace

template <typename T>
int predicted_class(const Tensor<T>& probs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return static_cast<int>(best);
}

template <typename T>
FitResult fit(Model<T>& model, std::span<const Sample> train, std::span<const Sample> val, const TrainConfig& config,
              const FitHooks& hooks) {
  validate(config);
  if (train.empty()) throw DataError("fit: empty training set");
  if (val.empty()) throw DataError("fit: empty validation set");

  const std::vector<Tensor<T>> train_images = images_of<T>(train);
  const std::vector<Tensor<T>> val_images = images_of<T>(val);

  Rng rng(config.seed);
  Optimizer<T> optimizer(config.optimizer);
  EarlyStopping stopper(config.early_stop);
  std::vector<Tensor<T>> best_weights = model.weights();
  std::vector<Parameter<T>*> params = model.parameters();

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  FitResult result;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const double lr = config.schedule.rate_at(epoch - 1);
    rng.shuffle(std::span(order));

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(start + config.batch_size, order.size());
      model.zero_grad();
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        const Tensor<T> probs = model.forward(train_images[i], LayerMode::Training, rng);
        const double loss = cross_entropy(probs, train[i].label);
        if (!std::isfinite(loss)) {
          throw DivergedError(epoch, "training diverged at epoch " + std::to_string(epoch) + " (non-finite loss)");
        }
        loss_sum += loss;
        if (predicted_class(probs) == train[i].label) ++correct;
        model.backward_from_logits(softmax_xent_grad_from_probs(probs, train[i].label));
      }
      const T scale = T{1} / static_cast<T>(end - start);
      for (Parameter<T>* p : params) {
        for (T& g : p->grad.values()) g *= scale;
      }
      optimizer.step(params, lr);
    }

    const Pass validation = inference_pass(model, val_images, val);
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(train.size());
    record.train_accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
    record.val_loss = validation.loss;
    record.val_accuracy = validation.accuracy;
    record.learning_rate = lr;
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (!std::isfinite(record.val_loss)) {
      throw DivergedError(epoch, "validation loss became non-finite at epoch " + std::to_string(epoch));
    }
    if (hooks.on_epoch_end) hooks.on_epoch_end(record);
    result.history.push_back(record);

    const double monitored = config.early_stop.monitor == Monitor::ValLoss ? record.val_loss : record.val_accuracy;
    if (stopper.observe(monitored)) best_weights = model.weights();
    if (stopper.should_stop()) {
      result.stop_reason = StopReason::EarlyStopping;
      break;
    }
  }
  result.best_epoch = stopper.best_epoch();
  model.set_weights(best_weights);
  return result;
}

// ---------------------------------------------------------------- evaluate / predict

template <typename T>
Evaluation evaluate_detailed(Model<T>& model, std::span<const Sample> samples) {
  if (samples.empty()) throw DataError("evaluate: empty sample set");
  Evaluation out;
  const Pass pass = inference_pass(model, images_of<T>(samples), samples, &out.predictions);
  std::vector<int> truth;
  truth.reserve(samples.size());
  for (const Sample& s : samples) truth.push_back(s.label);
  out.report = report(out.predictions, truth);
  out.mean_loss = pass.loss;
  return out;
}

template <typename T>
MetricReport evaluate(Model<T>& model, std::span<const Sample> samples) {
  return evaluate_detailed(model, samples).report;
}

template <typename T>
Prediction predict(Model<T>& model, const std::filesystem::path& image_path) {
  const Shape& in = model.input_shape();
  const Tensor<float> image = preprocess(decode_image(image_path), in.at(0), in.at(1), in.at(2));
  const Tensor<T> probs = model.predict(tensor_cast<T>(image));
  Prediction out;
  out.label = predicted_class(probs);
  for (T p : probs.values()) out.probabilities.push_back(static_cast<double>(p));
  return out;
}

// ---------------------------------------------------------------- cross-validation

std::size_t select_best_fold(std::span<const FoldSummary> folds) {
  if (folds.empty()) throw StateError("select_best_fold: no folds");
  std::size_t best = 0;
  for (std::size_t i = 1; i < folds.size(); ++i) {
    const FoldSummary& a = folds[i];
    const FoldSummary& b = folds[best];
    if (a.val_f1 > b.val_f1 || (a.val_f1 == b.val_f1 && a.val_loss < b.val_loss) ||
        (a.val_f1 == b.val_f1 && a.val_loss == b.val_loss && a.fold < b.fold)) {
      best = i;
    }
  }
  return best;
}

template <typename T>
CvResult<T> cross_validate(std::span<const Sample> samples, const ArchitectureConfig& architecture,
                           const TrainConfig& config) {
  validate(config);
  std::vector<std::size_t> indices(samples.size());
  std::vector<int> labels(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    indices[i] = i;
    labels[i] = samples[i].label;
  }
  Rng plan_rng(Rng::mix_seed(config.seed, 0xf01d));
  const FoldPlan plan = stratified_kfold(indices, labels, config.k, plan_rng);

  std::vector<FoldSummary> summaries(config.k);
  std::vector<std::optional<Model<T>>> models(config.k);
  std::vector<std::exception_ptr> errors(config.k);

  auto run_fold = [&](std::size_t fold) {
    try {
      std::vector<Sample> train;
      for (std::size_t i : plan.complement(fold)) train.push_back(samples[i]);
      std::vector<Sample> val;
      for (std::size_t i : plan.folds[fold]) val.push_back(samples[i]);
      if (config.augment.any_transform() || config.augment.balance) {
        Rng augment_rng(Rng::mix_seed(config.seed, 0x2000 + fold));
        train = augment_dataset(train, augment_rng, config.augment);
      }

      Model<T> model = build_model<T>(architecture, fold_seed(config.seed, fold), "fold-" + std::to_string(fold));
      TrainConfig fold_config = config;
      fold_config.seed = Rng::mix_seed(config.seed, 0x3000 + fold);
      FitResult fitted;
      try {
        fitted = fit(model, train, val, fold_config);
      } catch (const DivergedError& e) {
        throw DivergedError(e.epoch(), "fold " + std::to_string(fold) + ": " + e.what());
      }
      const Evaluation eval = evaluate_detailed(model, val);

      FoldSummary& s = summaries[fold];
      s.fold = fold;
      s.train_size = train.size();
      s.val_size = val.size();
      s.best_epoch = fitted.best_epoch;
      s.stop_reason = fitted.stop_reason;
      s.val_loss = eval.mean_loss;
      s.val_accuracy = eval.report.accuracy;
      s.val_f1 = eval.report.weighted.f1;
      s.history = std::move(fitted.history);
      models[fold] = std::move(model);
    } catch (...) {
      errors[fold] = std::current_exception();
    }
  };

  const std::size_t workers = std::min(config.threads, config.k);
  if (workers <= 1) {
    for (std::size_t fold = 0; fold < config.k; ++fold) run_fold(fold);
  } else {
    std::mutex next_mutex;
    std::size_t next = 0;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t fold;
          {
            std::lock_guard lock(next_mutex);
            if (next >= config.k) return;
            fold = next++;
          }
          run_fold(fold);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }

  CvResult<T> result;
  result.folds = std::move(summaries);
  result.selected = select_best_fold(result.folds);
  result.model = std::move(*models[result.selected]);

  if (config.retrain_full) {
    std::vector<Sample> train(samples.begin(), samples.end());
    if (config.augment.any_transform() || config.augment.balance) {
      Rng augment_rng(Rng::mix_seed(config.seed, 0x2000 + config.k));
      train = augment_dataset(train, augment_rng, config.augment);
    }
    Model<T> model = build_model<T>(architecture, fold_seed(config.seed, config.k), "full");
    TrainConfig full = config;
    full.seed = Rng::mix_seed(config.seed, 0x3000 + config.k);
    full.max_epochs = std::max<std::size_t>(1, result.folds[result.selected].best_epoch);
    full.early_stop.enabled = false;
    fit(model, train, samples, full);
    result.model = std::move(model);
  }
  return result;
}

#define LGGNET_INSTANTIATE_TRAIN(T)                                                                          \
  template int predicted_class<T>(const Tensor<T>&);                                                         \
  template FitResult fit<T>(Model<T>&, std::span<const Sample>, std::span<const Sample>, const TrainConfig&, \
                            const FitHooks&);                                                                \
  template Evaluation evaluate_detailed<T>(Model<T>&, std::span<const Sample>);                              \
  template MetricReport evaluate<T>(Model<T>&, std::span<const Sample>);                                     \
  template Prediction predict<T>(Model<T>&, const std::filesystem::path&);                                   \
  template CvResult<T> cross_validate<T>(std::span<const Sample>, const ArchitectureConfig&, const TrainConfig&);

LGGNET_INSTANTIATE_TRAIN(float)
LGGNET_INSTANTIATE_TRAIN(double)

#undef LGGNET_INSTANTIATE_TRAIN

}  // namespace lggnet
