#include "summaug/curriculum.hpp"

#include <stdexcept>
#include <utility>

namespace summaug {

void validate(const CurriculumSchedule& schedule) {
  if (schedule.stage1_epochs < 0) {
    throw std::invalid_argument("stage1_epochs must be >= 0");
  }
  if (schedule.stage2_epochs < 1) {
    throw std::invalid_argument("stage2_epochs must be >= 1");
  }
}

namespace {

void require_matching_val(const Dataset& train, const Dataset& val) {
  if (val.num_classes != train.num_classes) {
    throw std::invalid_argument("train and validation label spaces differ");
  }
}

// Train `epochs` epochs on `data`, keeping the checkpoint with the highest
// validation accuracy (ties keep the earlier epoch). Stamps `stage` on the
// metrics and appends them to `result.history`.
void run_with_selection(Model model, const Dataset& data, const Dataset& val,
                        TrainConfig config, int epochs, int stage,
                        TrainedResult& result) {
  config.epochs = epochs;
  Model best = model;
  double best_val = -1.0;
  int best_epoch = 0;
  auto observer = [&](const Model& snapshot, const EpochMetric& metric) {
    if (metric.val_accuracy > best_val) {
      best_val = metric.val_accuracy;
      best_epoch = metric.epoch;
      best = snapshot;
    }
  };
  auto [final_model, metrics] =
      train_epochs(std::move(model), data, &val, config, observer);
  (void)final_model;  // selection decides which checkpoint survives
  for (EpochMetric& metric : metrics) {
    metric.stage = stage;
    result.history.push_back(metric);
  }
  result.model = std::move(best);
  result.best_val_accuracy = best_val;
  result.best_epoch = best_epoch;
}

}  // namespace

TrainedResult baseline_finetune(const Dataset& train, const Dataset& val,
                                const TrainConfig& config) {
  validate(config);
  if (config.epochs < 1) {
    throw std::invalid_argument("training requires at least one epoch");
  }
  require_matching_val(train, val);
  Vocab vocab = fit_vocab(train, config.max_features);
  Model model =
      init_model(vocab, train.num_classes, config.hidden_dim, config.seed);
  TrainedResult result;
  run_with_selection(std::move(model), train, val, config, config.epochs,
                     /*stage=*/0, result);
  return result;
}

TrainedResult mixed_finetune(const Dataset& train, const Dataset& pseudo,
                             const Dataset& val, const TrainConfig& config) {
  validate(config);
  if (config.epochs < 1) {
    throw std::invalid_argument("training requires at least one epoch");
  }
  if (pseudo.num_classes != train.num_classes) {
    throw std::invalid_argument("mixed fine-tuning requires identity label map");
  }
  require_matching_val(train, val);

  // Original examples first, pseudo appended; the per-epoch training shuffle
  // interleaves them. Features come from the original data alone so the
  // model's input space does not depend on the augmentation.
  Dataset combined;
  combined.num_classes = train.num_classes;
  combined.role = Role::train;
  combined.examples = train.examples;
  combined.examples.insert(combined.examples.end(), pseudo.examples.begin(),
                           pseudo.examples.end());

  Vocab vocab = fit_vocab(train, config.max_features);
  Model model =
      init_model(vocab, train.num_classes, config.hidden_dim, config.seed);
  TrainedResult result;
  run_with_selection(std::move(model), combined, val, config, config.epochs,
                     /*stage=*/0, result);
  return result;
}

TrainedResult curriculum_finetune(const Dataset& train,
                                  const Dataset& pseudo_coarse,
                                  const Dataset& val,
                                  const CurriculumSchedule& schedule,
                                  const TrainConfig& config,
                                  const StageHooks* hooks) {
  validate(schedule);
  validate(config);
  require_matching_val(train, val);
  const LabelMap& map = schedule.label_map;
  if (map.num_fine() != train.num_classes) {
    throw std::invalid_argument(
        "schedule label map covers " + std::to_string(map.num_fine()) +
        " labels but the training data has " +
        std::to_string(train.num_classes) + " classes");
  }
  for (const Example& example : pseudo_coarse.examples) {
    if (example.label < 0 || example.label >= map.num_coarse) {
      throw std::invalid_argument("stage-1 label " +
                                  std::to_string(example.label) +
                                  " out of coarse range [0, " +
                                  std::to_string(map.num_coarse) + ")");
    }
  }

  Vocab vocab = fit_vocab(train, config.max_features);
  Model model = init_model(vocab, map.num_coarse, config.hidden_dim,
                           config.seed);

  std::vector<EpochMetric> stage1_history;
  if (schedule.stage1_epochs > 0) {
    TrainConfig stage1 = config;
    stage1.epochs = schedule.stage1_epochs;
    // Fixed epoch count, no validation selection: the final state carries
    // into stage 2.
    auto [trained, metrics] =
        train_epochs(std::move(model), pseudo_coarse, nullptr, stage1);
    model = std::move(trained);
    for (EpochMetric& metric : metrics) {
      metric.stage = 1;
      stage1_history.push_back(metric);
    }
  }
  if (hooks && hooks->stage1_end) hooks->stage1_end(model);

  // Collapsed label spaces get a freshly seeded head; a matching space keeps
  // the stage-1 head. The encoder is untouched either way.
  if (map.num_coarse != train.num_classes) {
    model = reset_head(model, train.num_classes, config.seed);
  }
  if (hooks && hooks->stage2_start) hooks->stage2_start(model);

  TrainedResult result;
  run_with_selection(std::move(model), train, val, config,
                     schedule.stage2_epochs, /*stage=*/2, result);
  result.history.insert(result.history.begin(), stage1_history.begin(),
                        stage1_history.end());
  return result;
}

}  // namespace summaug
