#include "summaug/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "summaug/labelmap.hpp"
#include "summaug/util.hpp"

namespace summaug {

using nlohmann::json;

std::string method_name(Method method) {
  switch (method) {
    case Method::baseline: return "baseline";
    case Method::aeda_mixed: return "aeda_mixed";
    case Method::aeda_curriculum: return "aeda_curriculum";
    case Method::summaug_mixed: return "summaug_mixed";
    case Method::summaug_curriculum: return "summaug_curriculum";
  }
  throw std::logic_error("unhandled method");
}

Method method_from_string(const std::string& name) {
  for (Method method : kAllMethods) {
    if (method_name(method) == name) return method;
  }
  throw std::invalid_argument("unknown method \"" + name + "\"");
}

std::string train_size_name(int train_size) {
  return train_size == kFullTrainSize ? "all" : std::to_string(train_size);
}

namespace {

[[noreturn]] void spec_error(const std::string& message) {
  throw std::runtime_error("experiment spec: " + message);
}

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* key) {
          return it.key() == key;
        }) == allowed.end()) {
      spec_error("unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

const json* find_key(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

std::string get_string(const json& obj, const char* key,
                       const std::string& where) {
  const json* value = find_key(obj, key);
  if (!value) spec_error(where + " requires \"" + key + "\"");
  if (!value->is_string()) spec_error("\"" + std::string(key) + "\" in " + where + " must be a string");
  return value->get<std::string>();
}

int get_int(const json& obj, const char* key, const std::string& where,
            int fallback) {
  const json* value = find_key(obj, key);
  if (!value) return fallback;
  if (!value->is_number_integer()) {
    spec_error("\"" + std::string(key) + "\" in " + where + " must be an integer");
  }
  return value->get<int>();
}

double get_double(const json& obj, const char* key, const std::string& where,
                  double fallback) {
  const json* value = find_key(obj, key);
  if (!value) return fallback;
  if (!value->is_number()) {
    spec_error("\"" + std::string(key) + "\" in " + where + " must be a number");
  }
  return value->get<double>();
}

TrainConfig parse_train_config(const json& obj) {
  TrainConfig config;
  reject_unknown_keys(obj, "\"train\"",
                      {"learning_rate", "batch_size", "epochs", "l2",
                       "hidden_dim", "max_features"});
  config.learning_rate = get_double(obj, "learning_rate", "\"train\"", config.learning_rate);
  config.batch_size = get_int(obj, "batch_size", "\"train\"", config.batch_size);
  config.epochs = get_int(obj, "epochs", "\"train\"", config.epochs);
  config.l2 = get_double(obj, "l2", "\"train\"", config.l2);
  config.hidden_dim = get_int(obj, "hidden_dim", "\"train\"", config.hidden_dim);
  config.max_features = get_int(obj, "max_features", "\"train\"", config.max_features);
  return config;
}

CurriculumSchedule parse_schedule(const json& obj, int default_stage2) {
  CurriculumSchedule schedule;
  reject_unknown_keys(obj, "\"schedule\"",
                      {"stage1_epochs", "stage2_epochs", "label_map"});
  schedule.stage1_epochs = get_int(obj, "stage1_epochs", "\"schedule\"", 1);
  schedule.stage2_epochs = get_int(obj, "stage2_epochs", "\"schedule\"", default_stage2);
  if (const json* map = find_key(obj, "label_map")) {
    if (!map->is_array()) spec_error("\"label_map\" must be an array");
    std::vector<int> assignments;
    for (const json& entry : *map) {
      if (!entry.is_number_integer()) spec_error("\"label_map\" entries must be integers");
      assignments.push_back(entry.get<int>());
    }
    schedule.label_map = make_label_map(assignments);
  }
  return schedule;
}

SummarizerConfig parse_summarizer(const json& obj) {
  SummarizerConfig config;
  reject_unknown_keys(obj, "\"summarizer\"",
                      {"kind", "budget_tokens", "damping", "tolerance",
                       "max_iterations", "endpoint", "timeout_s",
                       "max_in_flight", "retry_initial_delay_ms"});
  if (const json* kind = find_key(obj, "kind")) {
    if (!kind->is_string()) spec_error("\"kind\" in \"summarizer\" must be a string");
    config.kind = summarizer_kind_from_string(kind->get<std::string>());
  }
  config.budget_tokens = get_int(obj, "budget_tokens", "\"summarizer\"", config.budget_tokens);
  config.damping = get_double(obj, "damping", "\"summarizer\"", config.damping);
  config.tolerance = get_double(obj, "tolerance", "\"summarizer\"", config.tolerance);
  config.max_iterations = get_int(obj, "max_iterations", "\"summarizer\"", config.max_iterations);
  if (find_key(obj, "endpoint")) {
    config.endpoint = get_string(obj, "endpoint", "\"summarizer\"");
  }
  config.timeout_s = get_double(obj, "timeout_s", "\"summarizer\"", config.timeout_s);
  config.max_in_flight = get_int(obj, "max_in_flight", "\"summarizer\"", config.max_in_flight);
  config.retry_initial_delay_ms = get_int(obj, "retry_initial_delay_ms", "\"summarizer\"",
                                          config.retry_initial_delay_ms);
  return config;
}

AedaConfig parse_aeda(const json& obj) {
  AedaConfig config;
  reject_unknown_keys(obj, "\"aeda\"", {"alpha", "punctuation", "copies"});
  config.alpha = get_double(obj, "alpha", "\"aeda\"", config.alpha);
  config.copies = get_int(obj, "copies", "\"aeda\"", config.copies);
  if (const json* marks = find_key(obj, "punctuation")) {
    if (!marks->is_array()) spec_error("\"punctuation\" must be an array");
    config.punctuation.clear();
    for (const json& mark : *marks) {
      if (!mark.is_string()) spec_error("\"punctuation\" entries must be strings");
      config.punctuation.push_back(mark.get<std::string>());
    }
  }
  return config;
}

}  // namespace

ExperimentSpec parse_experiment_spec(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    spec_error(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) spec_error("top level must be an object");
  reject_unknown_keys(doc, "the spec",
                      {"train_path", "test_path", "num_classes", "val_fraction",
                       "stratified", "train_sizes", "methods", "seeds", "train",
                       "schedule", "summarizer", "aeda", "workers"});

  ExperimentSpec spec;
  spec.train_path = get_string(doc, "train_path", "the spec");
  spec.test_path = get_string(doc, "test_path", "the spec");
  spec.num_classes = get_int(doc, "num_classes", "the spec", 0);
  if (spec.num_classes != 0 && spec.num_classes < 2) {
    spec_error("num_classes must be at least 2");
  }
  spec.val_fraction = get_double(doc, "val_fraction", "the spec", spec.val_fraction);
  if (!(spec.val_fraction > 0.0 && spec.val_fraction < 1.0)) {
    spec_error("val_fraction must be in (0, 1)");
  }
  if (const json* stratified = find_key(doc, "stratified")) {
    if (!stratified->is_boolean()) spec_error("\"stratified\" must be a boolean");
    spec.stratified = stratified->get<bool>();
  }

  const json* sizes = find_key(doc, "train_sizes");
  if (!sizes || !sizes->is_array() || sizes->empty()) {
    spec_error("\"train_sizes\" must be a non-empty array");
  }
  for (const json& entry : *sizes) {
    int size = 0;
    if (entry.is_string() && entry.get<std::string>() == "all") {
      size = kFullTrainSize;
    } else if (entry.is_number_integer() && entry.get<int>() > 0) {
      size = entry.get<int>();
    } else {
      spec_error("\"train_sizes\" entries must be positive integers or \"all\"");
    }
    if (std::find(spec.train_sizes.begin(), spec.train_sizes.end(), size) !=
        spec.train_sizes.end()) {
      spec_error("duplicate train size " + train_size_name(size));
    }
    spec.train_sizes.push_back(size);
  }

  if (const json* methods = find_key(doc, "methods")) {
    if (!methods->is_array() || methods->empty()) {
      spec_error("\"methods\" must be a non-empty array");
    }
    for (const json& entry : *methods) {
      if (!entry.is_string()) spec_error("\"methods\" entries must be strings");
      Method method = method_from_string(entry.get<std::string>());
      if (std::find(spec.methods.begin(), spec.methods.end(), method) !=
          spec.methods.end()) {
        spec_error("duplicate method \"" + method_name(method) + "\"");
      }
      spec.methods.push_back(method);
    }
  } else {
    spec.methods.assign(kAllMethods.begin(), kAllMethods.end());
  }

  if (const json* seeds = find_key(doc, "seeds")) {
    if (!seeds->is_array() || seeds->empty()) {
      spec_error("\"seeds\" must be a non-empty array");
    }
    spec.seeds.clear();
    for (const json& entry : *seeds) {
      if (!entry.is_number_integer()) spec_error("\"seeds\" entries must be integers");
      int seed = entry.get<int>();
      if (std::find(spec.seeds.begin(), spec.seeds.end(), seed) !=
          spec.seeds.end()) {
        spec_error("duplicate seed " + std::to_string(seed));
      }
      spec.seeds.push_back(seed);
    }
  }

  if (const json* train = find_key(doc, "train")) {
    if (!train->is_object()) spec_error("\"train\" must be an object");
    spec.train = parse_train_config(*train);
  }
  validate(spec.train);

  spec.schedule.stage1_epochs = 1;
  spec.schedule.stage2_epochs = spec.train.epochs;
  if (const json* schedule = find_key(doc, "schedule")) {
    if (!schedule->is_object()) spec_error("\"schedule\" must be an object");
    spec.schedule = parse_schedule(*schedule, spec.train.epochs);
  }
  validate(spec.schedule);

  if (const json* summarizer = find_key(doc, "summarizer")) {
    if (!summarizer->is_object()) spec_error("\"summarizer\" must be an object");
    spec.summarizer = parse_summarizer(*summarizer);
  }
  validate(spec.summarizer);

  if (const json* aeda = find_key(doc, "aeda")) {
    if (!aeda->is_object()) spec_error("\"aeda\" must be an object");
    spec.aeda = parse_aeda(*aeda);
  }
  validate(spec.aeda);

  spec.workers = get_int(doc, "workers", "the spec", 1);
  if (spec.workers < 1) spec_error("workers must be at least 1");

  spec.canonical_json = doc.dump();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  return parse_experiment_spec(read_file(path));
}

std::string spec_hash(const ExperimentSpec& spec) {
  return to_hex64(fnv1a64(spec.canonical_json));
}

std::pair<double, double> aggregate(const std::vector<double>& accuracies) {
  if (accuracies.empty()) {
    throw std::invalid_argument("cannot aggregate an empty run list");
  }
  double sum = 0.0;
  for (double a : accuracies) sum += a;
  const double mean = sum / static_cast<double>(accuracies.size());
  if (accuracies.size() == 1) return {mean, 0.0};
  double squares = 0.0;
  for (double a : accuracies) squares += (a - mean) * (a - mean);
  const double stdev =
      std::sqrt(squares / static_cast<double>(accuracies.size() - 1));
  return {mean, stdev};
}

namespace {

std::string hash_example_ids(const Dataset& dataset) {
  std::string joined;
  for (const Example& example : dataset.examples) {
    joined += example.id;
    joined += '\n';
  }
  return to_hex64(fnv1a64(joined));
}

// Re-labels summary pseudo examples through `map` using the fine-grained
// label each example carried from its source document.
Dataset coarsen_pseudo(const Dataset& pseudo, const LabelMap& map) {
  Dataset coarse = pseudo;
  coarse.num_classes = map.num_coarse;
  for (Example& example : coarse.examples) {
    example.label = apply_label_map(map, example.label_original);
  }
  return coarse;
}

bool wants(const std::vector<Method>& methods, Method method) {
  return std::find(methods.begin(), methods.end(), method) != methods.end();
}

// Aggregates report.runs into one CellStats per (method, train_size), in
// row-major order. Failed runs count toward n_failed only.
void fill_cells(ExperimentReport& report) {
  report.cells.clear();
  for (Method method : report.methods) {
    for (int train_size : report.train_sizes) {
      CellStats cell;
      cell.method = method;
      cell.train_size = train_size;
      std::vector<double> accuracies;
      for (const RunResult& run : report.runs) {
        if (run.method != method || run.train_size != train_size) continue;
        if (run.failed) {
          ++cell.n_failed;
        } else {
          accuracies.push_back(run.test_accuracy);
        }
      }
      cell.n_runs = static_cast<int>(accuracies.size());
      if (!accuracies.empty()) {
        std::tie(cell.mean, cell.stdev) = aggregate(accuracies);
      } else {
        cell.mean = std::numeric_limits<double>::quiet_NaN();
        cell.stdev = std::numeric_limits<double>::quiet_NaN();
      }
      report.cells.push_back(cell);
    }
  }
}

struct GroupInputs {
  const ExperimentSpec& spec;
  const Dataset& full_train;
  const Dataset& test;
  LabelMap summaug_map;
  bool needs_aeda = false;
  bool needs_summaries = false;
  bool needs_coarse = false;
};

RunResult run_method(Method method, const Dataset& train, const Dataset& val,
                     const Dataset& test, const Dataset& aeda_pseudo,
                     const Dataset& summ_identity, const Dataset& summ_coarse,
                     const GroupInputs& inputs, const TrainConfig& config) {
  const ExperimentSpec& spec = inputs.spec;
  RunResult result;
  result.method = method;
  const auto started = std::chrono::steady_clock::now();
  try {
    TrainedResult trained;
    switch (method) {
      case Method::baseline:
        trained = baseline_finetune(train, val, config);
        break;
      case Method::aeda_mixed:
        trained = mixed_finetune(train, aeda_pseudo, val, config);
        break;
      case Method::aeda_curriculum: {
        // AEDA keeps every label, so its curriculum always runs stage 1 in
        // the original label space.
        CurriculumSchedule schedule = spec.schedule;
        schedule.label_map = identity_map(train.num_classes);
        trained = curriculum_finetune(train, aeda_pseudo, val, schedule, config);
        break;
      }
      case Method::summaug_mixed:
        trained = mixed_finetune(train, summ_identity, val, config);
        break;
      case Method::summaug_curriculum: {
        CurriculumSchedule schedule = spec.schedule;
        schedule.label_map = inputs.summaug_map;
        trained = curriculum_finetune(train, summ_coarse, val, schedule, config);
        break;
      }
    }
    result.test_accuracy = evaluate(trained.model, inputs.test);
    result.best_val_accuracy = trained.best_val_accuracy;
    result.best_epoch = trained.best_epoch;
  } catch (const DivergenceError& e) {
    result.failed = true;
    result.fail_reason = e.what();
  }
  const std::chrono::duration<double> elapsed =
      std::chrono::steady_clock::now() - started;
  result.wall_time_s = elapsed.count();
  return result;
}

// One (train_size, seed) cell group: split, subsample, build the shared
// augmentations once, then run every requested method on them.
std::vector<RunResult> run_group(const GroupInputs& inputs, int train_size,
                                 int seed) {
  const ExperimentSpec& spec = inputs.spec;
  const uint64_t run_seed = static_cast<uint64_t>(seed);

  auto [train_side, val] = split_train_val(inputs.full_train,
                                           spec.val_fraction, run_seed,
                                           spec.stratified);
  Dataset train = train_side;
  if (train_size != kFullTrainSize) {
    train = subsample(train_side, static_cast<size_t>(train_size), run_seed,
                      spec.stratified);
  }
  const std::string sub_hash = hash_example_ids(train);

  Dataset aeda_pseudo;
  if (inputs.needs_aeda) {
    aeda_pseudo = build_aeda_dataset(train, spec.aeda, run_seed);
  }
  Dataset summ_identity;
  Dataset summ_coarse;
  if (inputs.needs_summaries) {
    summ_identity = build_pseudo_dataset(train, spec.summarizer,
                                         identity_map(train.num_classes));
    if (inputs.needs_coarse) {
      summ_coarse = coarsen_pseudo(summ_identity, inputs.summaug_map);
    }
  }

  TrainConfig config = spec.train;
  config.seed = run_seed;

  std::vector<RunResult> results;
  results.reserve(spec.methods.size());
  for (Method method : spec.methods) {
    RunResult result = run_method(method, train, val, inputs.test, aeda_pseudo,
                                  summ_identity, summ_coarse, inputs, config);
    result.train_size = train_size;
    result.seed = seed;
    result.subsample_hash = sub_hash;
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  Dataset full_train = load_jsonl(spec.train_path, Role::train, spec.num_classes);
  Dataset test = load_jsonl(spec.test_path, Role::test, full_train.num_classes);

  GroupInputs inputs{spec, full_train, test};
  inputs.needs_aeda = wants(spec.methods, Method::aeda_mixed) ||
                      wants(spec.methods, Method::aeda_curriculum);
  inputs.needs_summaries = wants(spec.methods, Method::summaug_mixed) ||
                           wants(spec.methods, Method::summaug_curriculum);
  inputs.needs_coarse = wants(spec.methods, Method::summaug_curriculum);
  inputs.summaug_map = spec.schedule.label_map.assignments.empty()
                           ? identity_map(full_train.num_classes)
                           : spec.schedule.label_map;
  if (inputs.summaug_map.num_fine() != full_train.num_classes) {
    throw std::runtime_error(
        "schedule label map covers " +
        std::to_string(inputs.summaug_map.num_fine()) +
        " labels but the training data has " +
        std::to_string(full_train.num_classes) + " classes");
  }

  // Group = one (train_size, seed) pair; groups are independent jobs and the
  // result slots are preassigned, so worker scheduling cannot reorder output.
  const size_t n_sizes = spec.train_sizes.size();
  const size_t n_seeds = spec.seeds.size();
  const size_t n_groups = n_sizes * n_seeds;
  std::vector<std::vector<RunResult>> group_results(n_groups);

  std::atomic<size_t> next_group{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    for (size_t g = next_group.fetch_add(1); g < n_groups;
         g = next_group.fetch_add(1)) {
      try {
        const int train_size = spec.train_sizes[g / n_seeds];
        const int seed = spec.seeds[g % n_seeds];
        group_results[g] = run_group(inputs, train_size, seed);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const size_t n_workers =
      std::min(static_cast<size_t>(spec.workers), std::max<size_t>(n_groups, 1));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (std::thread& thread : pool) thread.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  ExperimentReport report;
  report.methods = spec.methods;
  report.train_sizes = spec.train_sizes;
  report.spec_hash = spec_hash(spec);
  report.timestamp = utc_timestamp();

  // Canonical run order: method-major, then size, then seed.
  for (size_t m = 0; m < spec.methods.size(); ++m) {
    for (size_t s = 0; s < n_sizes; ++s) {
      for (size_t k = 0; k < n_seeds; ++k) {
        report.runs.push_back(group_results[s * n_seeds + k][m]);
      }
    }
  }

  fill_cells(report);
  return report;
}

namespace {

std::string format_fixed(double value, int decimals) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, value);
  return buffer;
}

// Table cell like "95.45 (0.17)": mean and stdev as percentages.
std::string format_cell(const CellStats& cell) {
  if (cell.n_runs == 0) return "-";
  std::string text = format_fixed(cell.mean * 100.0, 2) + " (" +
                     format_fixed(cell.stdev * 100.0, 2) + ")";
  if (cell.n_failed > 0) {
    text += " [" + std::to_string(cell.n_failed) + " failed]";
  }
  return text;
}

const CellStats& cell_at(const ExperimentReport& report, size_t method_index,
                         size_t size_index) {
  return report.cells[method_index * report.train_sizes.size() + size_index];
}

std::string render_csv(const ExperimentReport& report) {
  std::string out = "method,train_size,mean,stdev,n_runs,n_failed\n";
  for (const CellStats& cell : report.cells) {
    out += method_name(cell.method);
    out += ',';
    out += train_size_name(cell.train_size);
    out += ',';
    out += format_fixed(cell.mean, 6);
    out += ',';
    out += format_fixed(cell.stdev, 6);
    out += ',';
    out += std::to_string(cell.n_runs);
    out += ',';
    out += std::to_string(cell.n_failed);
    out += '\n';
  }
  return out;
}

std::string render_markdown(const ExperimentReport& report) {
  const size_t n_sizes = report.train_sizes.size();
  // Best mean per column decides the bold cells; ties are all bolded.
  std::vector<double> best(n_sizes, -1.0);
  for (size_t s = 0; s < n_sizes; ++s) {
    for (size_t m = 0; m < report.methods.size(); ++m) {
      const CellStats& cell = cell_at(report, m, s);
      if (cell.n_runs > 0 && cell.mean > best[s]) best[s] = cell.mean;
    }
  }

  std::string out = "| Method |";
  for (int size : report.train_sizes) {
    out += ' ';
    out += train_size_name(size);
    out += " |";
  }
  out += "\n| --- |";
  for (size_t s = 0; s < n_sizes; ++s) out += " --- |";
  out += '\n';
  for (size_t m = 0; m < report.methods.size(); ++m) {
    out += "| " + method_name(report.methods[m]) + " |";
    for (size_t s = 0; s < n_sizes; ++s) {
      const CellStats& cell = cell_at(report, m, s);
      std::string text = format_cell(cell);
      if (cell.n_runs > 0 && cell.mean == best[s]) text = "**" + text + "**";
      out += ' ' + text + " |";
    }
    out += '\n';
  }
  out += "\nAccuracy in percent: mean (" + report.stdev_kind +
         " stdev) over per-seed runs";
  if (report.paired_subsamples) {
    out += "; subsamples are paired across methods within each seed";
  }
  out += ". Spec " + report.spec_hash + ".\n";
  return out;
}

json run_to_json(const RunResult& run) {
  json obj;
  obj["method"] = method_name(run.method);
  if (run.train_size == kFullTrainSize) {
    obj["train_size"] = "all";
  } else {
    obj["train_size"] = run.train_size;
  }
  obj["seed"] = run.seed;
  obj["test_accuracy"] = run.test_accuracy;
  obj["best_val_accuracy"] = run.best_val_accuracy;
  obj["best_epoch"] = run.best_epoch;
  obj["wall_time_s"] = run.wall_time_s;
  obj["subsample_hash"] = run.subsample_hash;
  obj["failed"] = run.failed;
  if (run.failed) obj["fail_reason"] = run.fail_reason;
  return obj;
}

RunResult run_from_json(const json& obj) {
  RunResult run;
  run.method = method_from_string(obj.at("method").get<std::string>());
  const json& size = obj.at("train_size");
  run.train_size = size.is_string() ? kFullTrainSize : size.get<int>();
  run.seed = obj.at("seed").get<int>();
  run.test_accuracy = obj.at("test_accuracy").get<double>();
  run.best_val_accuracy = obj.at("best_val_accuracy").get<double>();
  run.best_epoch = obj.at("best_epoch").get<int>();
  run.wall_time_s = obj.at("wall_time_s").get<double>();
  run.subsample_hash = obj.at("subsample_hash").get<std::string>();
  run.failed = obj.at("failed").get<bool>();
  if (run.failed) run.fail_reason = obj.value("fail_reason", "");
  return run;
}

}  // namespace

std::string render_report(const ExperimentReport& report,
                          const std::string& format) {
  if (format == "csv") return render_csv(report);
  if (format == "markdown" || format == "md") return render_markdown(report);
  throw std::invalid_argument("unknown report format: " + format);
}

std::string runs_to_jsonl(const std::vector<RunResult>& runs) {
  std::string out;
  for (const RunResult& run : runs) {
    out += run_to_json(run).dump();
    out += '\n';
  }
  return out;
}

std::string write_report_files(const ExperimentReport& report,
                               const std::string& out_dir) {
  const std::string dir = out_dir + "/" + report.spec_hash;
  atomic_write_file(dir + "/report.csv", render_report(report, "csv"));
  atomic_write_file(dir + "/report.md", render_report(report, "markdown"));
  atomic_write_file(dir + "/runs.jsonl", runs_to_jsonl(report.runs));

  json meta;
  meta["spec_hash"] = report.spec_hash;
  meta["timestamp"] = report.timestamp;
  meta["stdev_kind"] = report.stdev_kind;
  meta["paired_subsamples"] = report.paired_subsamples;
  json cells = json::array();
  for (const CellStats& cell : report.cells) {
    json entry;
    entry["method"] = method_name(cell.method);
    entry["train_size"] = cell.train_size == kFullTrainSize
                              ? json("all")
                              : json(cell.train_size);
    entry["mean"] = cell.mean;
    entry["stdev"] = cell.stdev;
    entry["n_runs"] = cell.n_runs;
    entry["n_failed"] = cell.n_failed;
    cells.push_back(entry);
  }
  meta["cells"] = cells;
  atomic_write_file(dir + "/report.json", meta.dump(2) + "\n");
  return dir;
}

ExperimentReport load_report_dir(const std::string& dir) {
  const std::string runs_path = dir + "/runs.jsonl";
  std::ifstream in(runs_path);
  if (!in) throw std::runtime_error("cannot open " + runs_path);

  ExperimentReport report;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim_view(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
      report.runs.push_back(run_from_json(obj));
    } catch (const std::exception& e) {
      throw std::runtime_error(runs_path + ": line " +
                               std::to_string(line_number) + ": " + e.what());
    }
    const RunResult& run = report.runs.back();
    if (std::find(report.methods.begin(), report.methods.end(), run.method) ==
        report.methods.end()) {
      report.methods.push_back(run.method);
    }
    if (std::find(report.train_sizes.begin(), report.train_sizes.end(),
                  run.train_size) == report.train_sizes.end()) {
      report.train_sizes.push_back(run.train_size);
    }
  }
  if (report.runs.empty()) {
    throw std::runtime_error(runs_path + " contains no runs");
  }

  std::ifstream meta_in(dir + "/report.json");
  if (meta_in) {
    json meta = json::parse(meta_in, nullptr, true);
    report.spec_hash = meta.value("spec_hash", "");
    report.timestamp = meta.value("timestamp", "");
    report.stdev_kind = meta.value("stdev_kind", report.stdev_kind);
    report.paired_subsamples =
        meta.value("paired_subsamples", report.paired_subsamples);
  }

  fill_cells(report);
  return report;
}

}  // namespace summaug
