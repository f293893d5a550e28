#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace summaug {

enum class Role { train, val, test, pseudo };

std::string role_name(Role role);

struct Example {
  std::string id;
  std::string text;
  int label = 0;
  // Augmentation provenance; empty `method` means the example is original.
  std::string origin_id;
  std::string method;
  int label_original = -1;

  bool is_augmented() const { return !method.empty(); }
};

struct Dataset {
  std::vector<Example> examples;
  int num_classes = 0;
  Role role = Role::train;

  size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
};

struct CorpusStats {
  size_t count = 0;
  double avg_tokens = 0.0;
  std::map<int, size_t> class_histogram;
};

// Lowercases, splits on Unicode whitespace, and peels . , ; : ! ? off word
// edges into standalone tokens. Pure; empty input gives an empty sequence.
std::vector<std::string> tokenize(const std::string& text);

// One JSON object per line: {"id", "text", "label"} plus optional
// {"origin_id", "method", "label_original"} on augmented corpora.
// num_classes_override = 0 infers max label + 1.
Dataset load_jsonl(const std::string& path, Role role = Role::train,
                   int num_classes_override = 0);

std::string dataset_to_jsonl(const Dataset& dataset);
void save_jsonl(const Dataset& dataset, const std::string& path);

// Stratified split: per class, ceil(val_fraction * class_count) examples go
// to validation, chosen by a seeded shuffle. Both outputs keep input order.
// stratified=false draws the validation set from the whole corpus instead.
std::pair<Dataset, Dataset> split_train_val(const Dataset& dataset,
                                            double val_fraction, uint64_t seed,
                                            bool stratified = true);

// Seeded sample without replacement, stratified proportionally by label with
// largest-remainder rounding (or uniformly when stratified=false). Output
// keeps input order.
Dataset subsample(const Dataset& dataset, size_t n, uint64_t seed,
                  bool stratified = true);

CorpusStats corpus_stats(const Dataset& dataset);

std::map<int, size_t> class_counts(const Dataset& dataset);

}  // namespace summaug
