#pragma once

#include <functional>
#include <vector>

#include "summaug/classifier.hpp"
#include "summaug/corpus.hpp"
#include "summaug/labelmap.hpp"

namespace summaug {

struct CurriculumSchedule {
  int stage1_epochs = 0;  // fixed epochs on pseudo data, no selection
  int stage2_epochs = 1;  // epochs on original data, validation-selected
  LabelMap label_map;     // label space of the stage-1 pseudo data
};

void validate(const CurriculumSchedule& schedule);

struct TrainedResult {
  Model model;                // checkpoint with the best validation accuracy
  double best_val_accuracy = 0.0;
  int best_epoch = 0;         // 1-based, within the selected stage
  std::vector<EpochMetric> history;
};

// Test-visibility hooks around the curriculum stage transition.
struct StageHooks {
  std::function<void(const Model&)> stage1_end;
  std::function<void(const Model&)> stage2_start;
};

// Plain fine-tuning on the original data, keeping the epoch checkpoint with
// the highest validation accuracy (ties to the earliest epoch).
TrainedResult baseline_finetune(const Dataset& train, const Dataset& val,
                                const TrainConfig& config);

// One training run over original + pseudo concatenated. The pseudo labels
// must live in the original label space (identity map).
TrainedResult mixed_finetune(const Dataset& train, const Dataset& pseudo,
                             const Dataset& val, const TrainConfig& config);

// Stage 1 trains a fresh model on the coarse pseudo data for a fixed number
// of epochs; if the label spaces differ the head is discarded and re-seeded
// (encoder kept bit-exact); stage 2 trains on the original data with
// validation selection.
TrainedResult curriculum_finetune(const Dataset& train,
                                  const Dataset& pseudo_coarse,
                                  const Dataset& val,
                                  const CurriculumSchedule& schedule,
                                  const TrainConfig& config,
                                  const StageHooks* hooks = nullptr);

}  // namespace summaug
