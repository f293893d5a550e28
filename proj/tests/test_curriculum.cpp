#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"
#include "summaug/classifier.hpp"
#include "summaug/corpus.hpp"
#include "summaug/curriculum.hpp"
#include "summaug/labelmap.hpp"
#include "test_util.hpp"

using namespace summaug;

namespace {

// Four topics with unmistakable marker words plus shared filler so the task
// is easy but not instant.
Dataset four_class_toy(int per_class, const std::string& id_prefix) {
  const std::vector<std::string> markers = {
      "soccer goalkeeper league", "election senate ballot",
      "galaxy telescope orbit", "recipe oven butter"};
  const std::vector<std::string> fillers = {
      "the report was published this week",
      "readers had strong opinions about it",
      "the long version appears on page two",
      "nobody expected quite this much attention"};
  Dataset dataset;
  dataset.num_classes = 4;
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < per_class; ++i) {
      Example example;
      example.id = id_prefix + std::to_string(c) + "x" + std::to_string(i);
      example.text = markers[static_cast<size_t>(c)] + " " +
                     fillers[static_cast<size_t>((c + i) % fillers.size())];
      example.label = c;
      dataset.examples.push_back(example);
    }
  }
  return dataset;
}

// Pseudo copies of `source` with labels pushed through `map`.
Dataset coarsened_copy(const Dataset& source, const LabelMap& map) {
  Dataset pseudo;
  pseudo.num_classes = map.num_coarse;
  pseudo.role = Role::pseudo;
  for (const Example& ex : source.examples) {
    Example copy = ex;
    copy.id = ex.id + "-pseudo";
    copy.label = apply_label_map(map, ex.label);
    copy.label_original = ex.label;
    copy.origin_id = ex.id;
    pseudo.examples.push_back(copy);
  }
  return pseudo;
}

TrainConfig toy_config() {
  TrainConfig config;
  config.learning_rate = 0.5;
  config.batch_size = 8;
  config.epochs = 8;
  config.seed = 5;
  config.hidden_dim = 16;
  config.max_features = 200;
  return config;
}

// Selection invariants every strategy must satisfy: best accuracy is the
// stage-2 maximum, the epoch is the earliest one achieving it, and the
// returned model reproduces the accuracy.
void check_selection(const TrainedResult& result, const Dataset& val,
                     int stage) {
  double best = -1.0;
  int earliest = 0;
  for (const EpochMetric& metric : result.history) {
    if (metric.stage != stage) continue;
    CHECK(metric.has_val);
    if (metric.val_accuracy > best) {
      best = metric.val_accuracy;
      earliest = metric.epoch;
    }
  }
  CHECK(result.best_val_accuracy == best);
  CHECK(result.best_epoch == earliest);
  CHECK(evaluate(result.model, val) == result.best_val_accuracy);
}

bool histories_match(const std::vector<EpochMetric>& a,
                     const std::vector<EpochMetric>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].epoch != b[i].epoch) return false;
    if (!testutil::bits_equal(a[i].train_loss, b[i].train_loss)) return false;
    if (!testutil::bits_equal(a[i].val_accuracy, b[i].val_accuracy)) {
      return false;
    }
    if (a[i].has_val != b[i].has_val) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("curriculum") {
  TEST_CASE("schedule validation") {
    CurriculumSchedule schedule;
    schedule.stage1_epochs = -1;
    CHECK(testutil::capture_error([&]() { validate(schedule); }) ==
          "stage1_epochs must be >= 0");
    schedule = CurriculumSchedule{};
    schedule.stage2_epochs = 0;
    CHECK(testutil::capture_error([&]() { validate(schedule); }) ==
          "stage2_epochs must be >= 1");
    schedule = CurriculumSchedule{};
    schedule.stage2_epochs = 3;
    CHECK(testutil::capture_error([&]() { validate(schedule); }).empty());
  }

  TEST_CASE("baseline keeps the earliest best checkpoint") {
    const Dataset train = four_class_toy(10, "t");
    const Dataset val = four_class_toy(3, "v");
    const TrainConfig config = toy_config();

    const TrainedResult result = baseline_finetune(train, val, config);
    REQUIRE(result.history.size() == static_cast<size_t>(config.epochs));
    for (const EpochMetric& metric : result.history) {
      CHECK(metric.stage == 0);
    }
    CHECK(result.best_epoch >= 1);
    CHECK(result.best_epoch <= config.epochs);
    check_selection(result, val, /*stage=*/0);
    CHECK(result.best_val_accuracy > 0.5);  // far better than 4-way chance

    // The toy problem plateaus at its peak; a later epoch with the same
    // accuracy must not displace the first one.
    int plateau = 0;
    for (const EpochMetric& metric : result.history) {
      if (metric.val_accuracy == result.best_val_accuracy) ++plateau;
    }
    CHECK(plateau > 1);
  }

  TEST_CASE("single-epoch run selects epoch 1") {
    const Dataset train = four_class_toy(6, "t");
    const Dataset val = four_class_toy(2, "v");
    TrainConfig config = toy_config();
    config.epochs = 1;
    const TrainedResult result = baseline_finetune(train, val, config);
    CHECK(result.best_epoch == 1);
    CHECK(result.history.size() == 1);
  }

  TEST_CASE("selection strategies need at least one epoch") {
    const Dataset train = four_class_toy(3, "t");
    const Dataset val = four_class_toy(1, "v");
    Dataset pseudo;
    pseudo.num_classes = 4;
    TrainConfig config = toy_config();
    config.epochs = 0;
    CHECK(testutil::capture_error(
              [&]() { baseline_finetune(train, val, config); }) ==
          "training requires at least one epoch");
    CHECK(testutil::capture_error(
              [&]() { mixed_finetune(train, pseudo, val, config); }) ==
          "training requires at least one epoch");
  }

  TEST_CASE("mismatched validation labels are rejected") {
    const Dataset train = four_class_toy(3, "t");
    Dataset val = four_class_toy(1, "v");
    val.num_classes = 5;
    const TrainConfig config = toy_config();
    CHECK(testutil::capture_error(
              [&]() { baseline_finetune(train, val, config); }) ==
          "train and validation label spaces differ");
  }

  TEST_CASE("mixed fine-tuning insists on an identity label space") {
    const Dataset train = four_class_toy(3, "t");
    const Dataset val = four_class_toy(1, "v");
    const Dataset pseudo =
        coarsened_copy(train, make_label_map({0, 0, 1, 1}));
    CHECK(testutil::capture_error(
              [&]() { mixed_finetune(train, pseudo, val, toy_config()); }) ==
          "mixed fine-tuning requires identity label map");
  }

  TEST_CASE("mixed with no pseudo examples is exactly the baseline") {
    const Dataset train = four_class_toy(8, "t");
    const Dataset val = four_class_toy(2, "v");
    Dataset empty_pseudo;
    empty_pseudo.num_classes = 4;
    empty_pseudo.role = Role::pseudo;
    const TrainConfig config = toy_config();

    const TrainedResult base = baseline_finetune(train, val, config);
    const TrainedResult mixed = mixed_finetune(train, empty_pseudo, val, config);
    CHECK(testutil::models_bit_equal(base.model, mixed.model));
    CHECK(base.best_val_accuracy == mixed.best_val_accuracy);
    CHECK(base.best_epoch == mixed.best_epoch);
    CHECK(histories_match(base.history, mixed.history));
  }

  TEST_CASE("mixed trains on the union but fits features on originals") {
    const Dataset train = four_class_toy(8, "t");
    const Dataset val = four_class_toy(2, "v");
    Dataset pseudo = coarsened_copy(train, identity_map(4));
    for (Example& ex : pseudo.examples) {
      ex.text += " pseudomarkerword";
    }
    const TrainConfig config = toy_config();

    const TrainedResult result = mixed_finetune(train, pseudo, val, config);
    REQUIRE(result.history.size() == static_cast<size_t>(config.epochs));
    check_selection(result, val, /*stage=*/0);
    // Vocabulary must come from the original training text alone.
    CHECK(result.model.vocab.index.count("pseudomarkerword") == 0);

    // Doubling the corpus changes the optimization stream.
    const TrainedResult base = baseline_finetune(train, val, config);
    CHECK_FALSE(testutil::bits_equal(result.history[0].train_loss,
                                     base.history[0].train_loss));
  }

  TEST_CASE("curriculum with no stage 1 and identity map is the baseline") {
    const Dataset train = four_class_toy(8, "t");
    const Dataset val = four_class_toy(2, "v");
    const TrainConfig config = toy_config();

    CurriculumSchedule schedule;
    schedule.stage1_epochs = 0;
    schedule.stage2_epochs = config.epochs;
    schedule.label_map = identity_map(4);
    Dataset empty_pseudo;
    empty_pseudo.num_classes = 4;

    const TrainedResult base = baseline_finetune(train, val, config);
    const TrainedResult curriculum =
        curriculum_finetune(train, empty_pseudo, val, schedule, config);
    CHECK(testutil::models_bit_equal(base.model, curriculum.model));
    CHECK(base.best_val_accuracy == curriculum.best_val_accuracy);
    CHECK(base.best_epoch == curriculum.best_epoch);
    CHECK(histories_match(base.history, curriculum.history));
    for (const EpochMetric& metric : curriculum.history) {
      CHECK(metric.stage == 2);  // tagging differs even when the math matches
    }
  }

  TEST_CASE("collapsed label spaces discard the head and keep the encoder") {
    const Dataset train = four_class_toy(8, "t");
    const Dataset val = four_class_toy(2, "v");
    const TrainConfig config = toy_config();
    const LabelMap map = make_label_map({0, 0, 1, 1});
    const Dataset pseudo = coarsened_copy(train, map);

    CurriculumSchedule schedule;
    schedule.stage1_epochs = 2;
    schedule.stage2_epochs = config.epochs;
    schedule.label_map = map;

    Model at_stage1_end;
    Model at_stage2_start;
    StageHooks hooks;
    hooks.stage1_end = [&](const Model& m) { at_stage1_end = m; };
    hooks.stage2_start = [&](const Model& m) { at_stage2_start = m; };

    const TrainedResult result =
        curriculum_finetune(train, pseudo, val, schedule, config, &hooks);

    // Stage 1 trained a two-way head.
    CHECK(at_stage1_end.num_classes == 2);
    CHECK(at_stage1_end.w_head.cols == 2);
    // The handover reshapes the head to four classes...
    CHECK(at_stage2_start.num_classes == 4);
    CHECK(at_stage2_start.w_head.cols == 4);
    CHECK(at_stage2_start.b_head == std::vector<double>(4, 0.0));
    // ...with the encoder carried over bit for bit...
    CHECK(testutil::bits_equal(at_stage2_start.w_hidden,
                               at_stage1_end.w_hidden));
    CHECK(testutil::bits_equal(at_stage2_start.b_hidden,
                               at_stage1_end.b_hidden));
    // ...and the new head drawn exactly as a seeded head reset would.
    const Model expected = reset_head(at_stage1_end, 4, config.seed);
    CHECK(testutil::bits_equal(at_stage2_start.w_head, expected.w_head));

    // Stage 1 history first (no validation), then stage 2 with selection.
    REQUIRE(result.history.size() ==
            static_cast<size_t>(schedule.stage1_epochs + config.epochs));
    for (int i = 0; i < schedule.stage1_epochs; ++i) {
      CHECK(result.history[static_cast<size_t>(i)].stage == 1);
      CHECK(result.history[static_cast<size_t>(i)].epoch == i + 1);
      CHECK_FALSE(result.history[static_cast<size_t>(i)].has_val);
    }
    for (size_t i = static_cast<size_t>(schedule.stage1_epochs);
         i < result.history.size(); ++i) {
      CHECK(result.history[i].stage == 2);
      CHECK(result.history[i].has_val);
    }
    check_selection(result, val, /*stage=*/2);
  }

  TEST_CASE("matching label spaces keep the stage-1 head") {
    const Dataset train = four_class_toy(8, "t");
    const Dataset val = four_class_toy(2, "v");
    const TrainConfig config = toy_config();
    const Dataset pseudo = coarsened_copy(train, identity_map(4));

    CurriculumSchedule schedule;
    schedule.stage1_epochs = 1;
    schedule.stage2_epochs = 4;
    schedule.label_map = identity_map(4);

    Model at_stage1_end;
    Model at_stage2_start;
    StageHooks hooks;
    hooks.stage1_end = [&](const Model& m) { at_stage1_end = m; };
    hooks.stage2_start = [&](const Model& m) { at_stage2_start = m; };

    curriculum_finetune(train, pseudo, val, schedule, config, &hooks);
    CHECK(testutil::models_bit_equal(at_stage1_end, at_stage2_start));
  }

  TEST_CASE("stage 1 actually moves the model") {
    const Dataset train = four_class_toy(8, "t");
    const Dataset val = four_class_toy(2, "v");
    const TrainConfig config = toy_config();
    const Dataset pseudo = coarsened_copy(train, identity_map(4));

    CurriculumSchedule with_stage1;
    with_stage1.stage1_epochs = 2;
    with_stage1.stage2_epochs = config.epochs;
    with_stage1.label_map = identity_map(4);
    CurriculumSchedule without_stage1 = with_stage1;
    without_stage1.stage1_epochs = 0;

    const TrainedResult warm =
        curriculum_finetune(train, pseudo, val, with_stage1, config);
    const TrainedResult cold =
        curriculum_finetune(train, pseudo, val, without_stage1, config);
    CHECK_FALSE(testutil::models_bit_equal(warm.model, cold.model));
  }

  TEST_CASE("curriculum rejects a label map of the wrong size") {
    const Dataset train = four_class_toy(2, "t");
    const Dataset val = four_class_toy(1, "v");
    Dataset pseudo;
    pseudo.num_classes = 2;
    CurriculumSchedule schedule;
    schedule.label_map = make_label_map({0, 1});
    CHECK(testutil::capture_error([&]() {
            curriculum_finetune(train, pseudo, val, schedule, toy_config());
          }) ==
          "schedule label map covers 2 labels but the training data has 4 "
          "classes");
  }

  TEST_CASE("curriculum rejects stage-1 labels outside the coarse range") {
    const Dataset train = four_class_toy(2, "t");
    const Dataset val = four_class_toy(1, "v");
    const LabelMap map = make_label_map({0, 0, 1, 1});
    Dataset pseudo = coarsened_copy(train, map);
    pseudo.examples[3].label = 5;
    CurriculumSchedule schedule;
    schedule.label_map = map;
    CHECK(testutil::capture_error([&]() {
            curriculum_finetune(train, pseudo, val, schedule, toy_config());
          }) == "stage-1 label 5 out of coarse range [0, 2)");
  }
}
