#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "summaug/aeda.hpp"
#include "summaug/classifier.hpp"
#include "summaug/corpus.hpp"
#include "summaug/curriculum.hpp"
#include "summaug/summarize.hpp"

namespace summaug {

enum class Method {
  baseline,
  aeda_mixed,
  aeda_curriculum,
  summaug_mixed,
  summaug_curriculum,
};

inline constexpr std::array<Method, 5> kAllMethods = {
    Method::baseline,         Method::aeda_mixed,
    Method::aeda_curriculum,  Method::summaug_mixed,
    Method::summaug_curriculum,
};

std::string method_name(Method method);
Method method_from_string(const std::string& name);

// train_size uses this sentinel for "use every training example".
inline constexpr int kFullTrainSize = -1;

std::string train_size_name(int train_size);

struct ExperimentSpec {
  std::string train_path;
  std::string test_path;
  int num_classes = 0;  // 0 = infer from the training data
  double val_fraction = 0.1;
  bool stratified = true;  // stratify the split and the subsamples by label
  std::vector<int> train_sizes;  // kFullTrainSize entries mean "all"
  std::vector<Method> methods;
  std::vector<int> seeds = {1, 2, 3, 4, 5};
  TrainConfig train;
  CurriculumSchedule schedule;  // label_map applies to summaug_curriculum
  SummarizerConfig summarizer;
  AedaConfig aeda;
  int workers = 1;
  std::string canonical_json;  // sorted-key dump of the parsed document
};

// Strict parse: unknown keys are errors at every level.
ExperimentSpec parse_experiment_spec(const std::string& json_text);
ExperimentSpec load_experiment_spec(const std::string& path);

// 16-hex-digit name for a spec, used as the run directory name.
std::string spec_hash(const ExperimentSpec& spec);

struct RunResult {
  Method method = Method::baseline;
  int train_size = kFullTrainSize;
  int seed = 0;
  double test_accuracy = 0.0;
  double best_val_accuracy = 0.0;
  int best_epoch = 0;
  double wall_time_s = 0.0;
  std::string subsample_hash;  // equal across methods of one (size, seed)
  bool failed = false;
  std::string fail_reason;
};

struct CellStats {
  Method method = Method::baseline;
  int train_size = kFullTrainSize;
  double mean = 0.0;
  double stdev = 0.0;
  int n_runs = 0;    // runs that finished and entered the aggregate
  int n_failed = 0;  // diverged runs, recorded but excluded
};

struct ExperimentReport {
  std::vector<Method> methods;    // row order
  std::vector<int> train_sizes;   // column order
  std::vector<RunResult> runs;    // canonical (method, size, seed) order
  std::vector<CellStats> cells;   // same order as rows × columns
  std::string spec_hash;
  std::string timestamp;          // only field allowed to differ across runs
  std::string stdev_kind = "sample (n-1)";
  bool paired_subsamples = true;
};

// Arithmetic mean and sample (n-1) standard deviation; one value gives
// stdev 0. Empty input is an error.
std::pair<double, double> aggregate(const std::vector<double>& accuracies);

ExperimentReport run_experiment(const ExperimentSpec& spec);

// format: "csv" or "markdown" (alias "md").
std::string render_report(const ExperimentReport& report,
                          const std::string& format);

std::string runs_to_jsonl(const std::vector<RunResult>& runs);

// Writes report.csv, report.md, runs.jsonl, and report.json under
// out_dir/<spec hash>/ and returns that directory.
std::string write_report_files(const ExperimentReport& report,
                               const std::string& out_dir);

// Rebuilds a report from a run directory written by write_report_files.
ExperimentReport load_report_dir(const std::string& dir);

}  // namespace summaug
