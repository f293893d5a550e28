#include "summaug/cli.hpp"

#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "summaug/aeda.hpp"
#include "summaug/classifier.hpp"
#include "summaug/corpus.hpp"
#include "summaug/curriculum.hpp"
#include "summaug/experiment.hpp"
#include "summaug/labelmap.hpp"
#include "summaug/summarize.hpp"
#include "summaug/util.hpp"

namespace summaug {
namespace {

using nlohmann::json;

// Flag-level problems found after CLI11 parsing (missing companion flags,
// malformed values); reported as usage errors with exit code 1.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

void print_stats(const std::string& data_path) {
  Dataset dataset = load_jsonl(data_path);
  CorpusStats stats = corpus_stats(dataset);
  json obj;
  obj["count"] = stats.count;
  obj["avg_tokens"] = stats.avg_tokens;
  json histogram = json::object();
  for (const auto& [label, count] : stats.class_histogram) {
    histogram[std::to_string(label)] = count;
  }
  obj["class_histogram"] = histogram;
  std::cout << obj.dump(2) << "\n";
}

void run_split(const std::string& data_path, double val_fraction,
               uint64_t seed, const std::string& out_dir) {
  Dataset dataset = load_jsonl(data_path);
  auto [train, val] = split_train_val(dataset, val_fraction, seed);
  save_jsonl(train, out_dir + "/train.jsonl");
  save_jsonl(val, out_dir + "/val.jsonl");
}

struct AugmentOptions {
  std::string data_path;
  std::string method;
  std::string out_path;
  std::string label_map_json;
  std::string summarizer = "textrank";
  std::string endpoint;
  int budget = 60;
  double alpha = 1.0 / 3.0;
  int copies = 1;
  std::string sidecar_path;
  uint64_t seed = 0;
};

LabelMap parse_label_map_flag(const std::string& text, int num_classes) {
  if (text.empty()) return identity_map(num_classes);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("--label-map is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) {
    throw UsageError("--label-map must be a JSON array of integers");
  }
  std::vector<int> assignments;
  for (const json& entry : doc) {
    if (!entry.is_number_integer()) {
      throw UsageError("--label-map must be a JSON array of integers");
    }
    assignments.push_back(entry.get<int>());
  }
  return make_label_map(assignments);
}

void run_augment(const AugmentOptions& options) {
  Dataset dataset = load_jsonl(options.data_path);
  if (options.method == "summaug") {
    SummarizerConfig config;
    config.kind = summarizer_kind_from_string(options.summarizer);
    config.budget_tokens = options.budget;
    config.endpoint = options.endpoint;
    LabelMap map =
        parse_label_map_flag(options.label_map_json, dataset.num_classes);
    if (map.num_fine() != dataset.num_classes) {
      throw std::runtime_error(
          "label map covers " + std::to_string(map.num_fine()) +
          " labels but the data has " + std::to_string(dataset.num_classes) +
          " classes");
    }
    save_jsonl(build_pseudo_dataset(dataset, config, map), options.out_path);
  } else {
    AedaConfig config;
    config.alpha = options.alpha;
    config.copies = options.copies;
    std::vector<AugmentationRecord> records;
    Dataset pseudo =
        build_aeda_dataset(dataset, config, options.seed,
                           options.sidecar_path.empty() ? nullptr : &records);
    save_jsonl(pseudo, options.out_path);
    if (!options.sidecar_path.empty()) {
      atomic_write_file(options.sidecar_path, records_to_jsonl(records));
    }
  }
}

struct TrainOptions {
  std::string train_path;
  std::string val_path;
  std::string strategy;
  std::string pseudo_path;
  std::string schedule_text;
  std::string config_path;
  std::string out_path;
};

TrainConfig load_train_config(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) {
    throw std::runtime_error(path + ": training config must be a JSON object");
  }
  TrainConfig config;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    try {
      if (key == "learning_rate") {
        config.learning_rate = it->get<double>();
      } else if (key == "batch_size") {
        config.batch_size = it->get<int>();
      } else if (key == "epochs") {
        config.epochs = it->get<int>();
      } else if (key == "seed") {
        config.seed = it->get<uint64_t>();
      } else if (key == "l2") {
        config.l2 = it->get<double>();
      } else if (key == "hidden_dim") {
        config.hidden_dim = it->get<int>();
      } else if (key == "max_features") {
        config.max_features = it->get<int>();
      } else {
        throw std::runtime_error(path + ": unknown key \"" + key + "\"");
      }
    } catch (const json::type_error&) {
      throw std::runtime_error(path + ": \"" + key + "\" has the wrong type");
    }
  }
  return config;
}

std::pair<int, int> parse_schedule_flag(const std::string& text) {
  const size_t slash = text.find('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 == text.size() ||
      text.find('/', slash + 1) != std::string::npos) {
    throw UsageError("--schedule must look like x/y (e.g. 2/2)");
  }
  try {
    size_t used = 0;
    const int stage1 = std::stoi(text.substr(0, slash), &used);
    if (used != slash) throw std::invalid_argument(text);
    const std::string tail = text.substr(slash + 1);
    const int stage2 = std::stoi(tail, &used);
    if (used != tail.size()) throw std::invalid_argument(text);
    return {stage1, stage2};
  } catch (const std::exception&) {
    throw UsageError("--schedule must look like x/y (e.g. 2/2)");
  }
}

// Monotone even-bucket assignment, used only to size the coarse label space
// when training from an already-coarsened pseudo file.
LabelMap bucket_map(int num_fine, int num_coarse) {
  std::vector<int> assignments(static_cast<size_t>(num_fine));
  for (int i = 0; i < num_fine; ++i) {
    assignments[static_cast<size_t>(i)] =
        static_cast<int>(static_cast<long long>(i) * num_coarse / num_fine);
  }
  return make_label_map(assignments);
}

// A pseudo corpus whose labels all match their source labels is identity-
// mapped, but a small file can still miss the top classes and infer too few.
// Lift those to the original class count; coarsened corpora (any label
// differing from its label_original) keep their own count.
void lift_identity_pseudo(Dataset& pseudo, int num_classes) {
  if (pseudo.num_classes >= num_classes) return;
  for (const Example& example : pseudo.examples) {
    if (example.is_augmented() && example.label != example.label_original) {
      return;
    }
  }
  pseudo.num_classes = num_classes;
}

void run_train(const TrainOptions& options) {
  TrainConfig config = load_train_config(options.config_path);
  Dataset train = load_jsonl(options.train_path);
  Dataset val = load_jsonl(options.val_path, Role::val, train.num_classes);

  TrainedResult result;
  if (options.strategy == "baseline") {
    if (!options.pseudo_path.empty()) {
      throw UsageError("--pseudo is only valid with mixed or curriculum");
    }
    result = baseline_finetune(train, val, config);
  } else {
    if (options.pseudo_path.empty()) {
      throw UsageError("strategy " + options.strategy + " requires --pseudo");
    }
    Dataset pseudo = load_jsonl(options.pseudo_path, Role::pseudo);
    if (options.strategy == "mixed") {
      lift_identity_pseudo(pseudo, train.num_classes);
      result = mixed_finetune(train, pseudo, val, config);
    } else {
      if (options.schedule_text.empty()) {
        throw UsageError("strategy curriculum requires --schedule x/y");
      }
      CurriculumSchedule schedule;
      std::tie(schedule.stage1_epochs, schedule.stage2_epochs) =
          parse_schedule_flag(options.schedule_text);
      if (pseudo.num_classes > train.num_classes) {
        throw std::runtime_error(
            "pseudo data has " + std::to_string(pseudo.num_classes) +
            " classes but the training data has only " +
            std::to_string(train.num_classes));
      }
      schedule.label_map =
          pseudo.num_classes == train.num_classes
              ? identity_map(train.num_classes)
              : bucket_map(train.num_classes, pseudo.num_classes);
      result = curriculum_finetune(train, pseudo, val, schedule, config);
    }
  }
  save_model(result.model, options.out_path);
  json summary;
  summary["best_epoch"] = result.best_epoch;
  summary["best_val_accuracy"] = result.best_val_accuracy;
  std::cout << summary.dump() << "\n";
}

void run_experiment_command(const std::string& spec_path,
                            const std::string& out_dir) {
  ExperimentSpec spec = load_experiment_spec(spec_path);
  ExperimentReport report = run_experiment(spec);
  std::cout << write_report_files(report, out_dir) << "\n";
}

void run_report(const std::string& runs_dir, const std::string& format) {
  std::cout << render_report(load_report_dir(runs_dir), format);
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{
      "summaug: summarization-based data augmentation and curriculum "
      "training for text classification"};
  app.require_subcommand(1);

  auto* stats_cmd = app.add_subcommand("stats", "Print corpus statistics as JSON");
  std::string stats_data;
  stats_cmd->add_option("--data", stats_data, "JSONL corpus")->required();

  auto* split_cmd =
      app.add_subcommand("split", "Stratified train/validation split");
  std::string split_data;
  std::string split_out;
  double split_fraction = 0.1;
  uint64_t split_seed = 0;
  split_cmd->add_option("--data", split_data, "JSONL corpus")->required();
  split_cmd->add_option("--val-fraction", split_fraction,
                        "Fraction of each class moved to validation")
      ->required();
  split_cmd->add_option("--seed", split_seed, "Split seed")->required();
  split_cmd->add_option("--out", split_out,
                        "Directory for train.jsonl and val.jsonl")
      ->required();

  auto* augment_cmd = app.add_subcommand("augment", "Write a pseudo corpus");
  AugmentOptions augment_options;
  augment_cmd->add_option("--data", augment_options.data_path, "JSONL corpus")
      ->required();
  augment_cmd
      ->add_option("--method", augment_options.method, "Augmentation method")
      ->required()
      ->check(CLI::IsMember({"summaug", "aeda"}));
  augment_cmd->add_option("--out", augment_options.out_path, "Output JSONL")
      ->required();
  augment_cmd->add_option("--label-map", augment_options.label_map_json,
                          "JSON array mapping fine to coarse labels (summaug)");
  augment_cmd
      ->add_option("--summarizer", augment_options.summarizer,
                   "Summarizer backend (summaug)")
      ->check(CLI::IsMember({"textrank", "lead", "remote"}));
  augment_cmd->add_option("--endpoint", augment_options.endpoint,
                          "Remote summarizer URL (summaug)");
  augment_cmd->add_option("--budget", augment_options.budget,
                          "Summary token budget (summaug)");
  augment_cmd->add_option("--alpha", augment_options.alpha,
                          "Insertion rate (aeda)");
  augment_cmd->add_option("--copies", augment_options.copies,
                          "Augmented copies per example (aeda)");
  augment_cmd->add_option("--sidecar", augment_options.sidecar_path,
                          "Insertion-record JSONL (aeda)");
  augment_cmd->add_option("--seed", augment_options.seed, "Augmentation seed")
      ->required();

  auto* train_cmd = app.add_subcommand("train", "Train a classifier");
  TrainOptions train_options;
  train_cmd->add_option("--train", train_options.train_path, "Training JSONL")
      ->required();
  train_cmd->add_option("--val", train_options.val_path, "Validation JSONL")
      ->required();
  train_cmd
      ->add_option("--strategy", train_options.strategy, "Training strategy")
      ->required()
      ->check(CLI::IsMember({"baseline", "mixed", "curriculum"}));
  train_cmd->add_option("--pseudo", train_options.pseudo_path,
                        "Pseudo JSONL (mixed, curriculum)");
  train_cmd->add_option("--schedule", train_options.schedule_text,
                        "Stage epochs x/y (curriculum)");
  train_cmd
      ->add_option("--config", train_options.config_path,
                   "Training config JSON")
      ->required();
  train_cmd->add_option("--out", train_options.out_path, "Model output path")
      ->required();

  auto* experiment_cmd =
      app.add_subcommand("experiment", "Run a full method-grid experiment");
  std::string experiment_spec_path;
  std::string experiment_out = "out";
  experiment_cmd
      ->add_option("--spec", experiment_spec_path, "Experiment spec JSON")
      ->required();
  experiment_cmd->add_option("--out", experiment_out, "Report root directory")
      ->required();

  auto* report_cmd =
      app.add_subcommand("report", "Render a stored run directory");
  std::string report_runs;
  std::string report_format;
  report_cmd->add_option("--runs", report_runs, "Run directory")->required();
  report_cmd->add_option("--format", report_format, "Output format")
      ->required()
      ->check(CLI::IsMember({"csv", "md", "markdown"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (stats_cmd->parsed()) {
      print_stats(stats_data);
    } else if (split_cmd->parsed()) {
      run_split(split_data, split_fraction, split_seed, split_out);
    } else if (augment_cmd->parsed()) {
      run_augment(augment_options);
    } else if (train_cmd->parsed()) {
      run_train(train_options);
    } else if (experiment_cmd->parsed()) {
      run_experiment_command(experiment_spec_path, experiment_out);
    } else {
      run_report(report_runs, report_format);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace summaug
