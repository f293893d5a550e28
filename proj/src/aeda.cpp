#include "summaug/aeda.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "summaug/util.hpp"

namespace summaug {

namespace {

std::vector<std::string> whitespace_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

}  // namespace

void validate(const AedaConfig& config) {
  if (!(config.alpha > 0.0 && config.alpha <= 1.0)) {
    throw std::invalid_argument("aeda alpha must be in (0, 1]");
  }
  if (config.punctuation.empty()) {
    throw std::invalid_argument("aeda punctuation set must be non-empty");
  }
  for (const std::string& mark : config.punctuation) {
    if (mark.size() != 1) {
      throw std::invalid_argument("aeda punctuation marks must be single characters");
    }
  }
  if (config.copies < 1) {
    throw std::invalid_argument("aeda copies must be >= 1");
  }
}

AugmentationRecord aeda_augment(const std::string& text,
                                const AedaConfig& config, uint64_t seed,
                                const std::string& origin_id) {
  validate(config);
  const std::vector<std::string> words = whitespace_words(text);
  if (words.empty()) {
    throw std::runtime_error("aeda needs at least one word");
  }
  const size_t n = words.size();
  const uint64_t k_max = std::max<uint64_t>(
      1, static_cast<uint64_t>(std::floor(config.alpha * static_cast<double>(n))));

  Rng rng(combine_seed(seed, fnv1a64(text)));
  const size_t k = static_cast<size_t>(1 + rng_below(rng, k_max));

  // k distinct gaps out of 0..n via a partial shuffle.
  std::vector<int> gaps(n + 1);
  std::iota(gaps.begin(), gaps.end(), 0);
  for (size_t i = 0; i < k; ++i) {
    const size_t j = i + static_cast<size_t>(rng_below(rng, gaps.size() - i));
    std::swap(gaps[i], gaps[j]);
  }
  gaps.resize(k);
  std::sort(gaps.begin(), gaps.end());

  AugmentationRecord record;
  record.origin_id = origin_id;
  record.insert_positions = gaps;
  record.marks.reserve(k);
  for (size_t i = 0; i < k; ++i) {
    record.marks.push_back(
        config.punctuation[rng_below(rng, config.punctuation.size())]);
  }

  std::string out;
  size_t next_mark = 0;
  for (size_t pos = 0; pos <= n; ++pos) {
    while (next_mark < k &&
           record.insert_positions[next_mark] == static_cast<int>(pos)) {
      if (!out.empty()) out += ' ';
      out += record.marks[next_mark];
      ++next_mark;
    }
    if (pos < n) {
      if (!out.empty()) out += ' ';
      out += words[pos];
    }
  }
  record.text = std::move(out);
  return record;
}

Dataset build_aeda_dataset(const Dataset& dataset, const AedaConfig& config,
                           uint64_t seed,
                           std::vector<AugmentationRecord>* records) {
  validate(config);
  Dataset out;
  out.num_classes = dataset.num_classes;
  out.role = Role::pseudo;
  out.examples.reserve(dataset.size() * static_cast<size_t>(config.copies));
  if (records) {
    records->clear();
    records->reserve(out.examples.capacity());
  }
  for (const Example& source : dataset.examples) {
    for (int copy = 0; copy < config.copies; ++copy) {
      const uint64_t example_seed = combine_seed(
          combine_seed(seed, fnv1a64(source.id)), static_cast<uint64_t>(copy));
      AugmentationRecord record;
      try {
        record = aeda_augment(source.text, config, example_seed, source.id);
      } catch (const std::exception& e) {
        throw std::runtime_error("aeda failed for id \"" + source.id +
                                 "\": " + e.what());
      }
      Example pseudo;
      pseudo.id = source.id + "-aeda" + std::to_string(copy);
      pseudo.text = record.text;
      pseudo.label = source.label;  // AEDA never coarsens
      pseudo.origin_id = source.id;
      pseudo.method = "aeda";
      pseudo.label_original = source.label;
      out.examples.push_back(std::move(pseudo));
      if (records) records->push_back(std::move(record));
    }
  }
  return out;
}

std::string records_to_jsonl(const std::vector<AugmentationRecord>& records) {
  std::string out;
  for (const AugmentationRecord& r : records) {
    nlohmann::json obj;
    obj["origin_id"] = r.origin_id;
    obj["text"] = r.text;
    obj["insert_positions"] = r.insert_positions;
    obj["marks"] = r.marks;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

}  // namespace summaug
