#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "summaug/corpus.hpp"

namespace summaug {

struct AedaConfig {
  double alpha = 1.0 / 3.0;
  std::vector<std::string> punctuation = {".", ";", "?", ":", "!", ","};
  int copies = 1;
};

void validate(const AedaConfig& config);

// Exact record of one augmentation so the insertion can be undone:
// insert_positions[i] is the gap (0..n over the original n-word sequence)
// where marks[i] was placed.
struct AugmentationRecord {
  std::string origin_id;
  std::string text;
  std::vector<int> insert_positions;
  std::vector<std::string> marks;
};

// Inserts k random punctuation marks as standalone tokens, k uniform in
// [1, max(1, floor(alpha*n))] over n whitespace-delimited words; gap
// positions are distinct. Deterministic given (text, config, seed).
AugmentationRecord aeda_augment(const std::string& text,
                                const AedaConfig& config, uint64_t seed,
                                const std::string& origin_id = "");

// copies x |dataset| augmented examples, labels unchanged, input order
// preserved. Per-example seeds derive from (seed, id, copy index) so the
// result is independent of iteration order. When `records` is non-null it
// receives one AugmentationRecord per output example (sidecar audit data).
Dataset build_aeda_dataset(const Dataset& dataset, const AedaConfig& config,
                           uint64_t seed,
                           std::vector<AugmentationRecord>* records = nullptr);

std::string records_to_jsonl(const std::vector<AugmentationRecord>& records);

}  // namespace summaug
