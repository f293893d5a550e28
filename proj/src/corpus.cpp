#include "summaug/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"
#include "summaug/util.hpp"

namespace summaug {

namespace {

using nlohmann::json;

// Decodes one UTF-8 code point starting at `i`; advances `i` past it.
// Malformed bytes are passed through as single-byte code points.
uint32_t utf8_next(const std::string& s, size_t& i) {
  const unsigned char c0 = static_cast<unsigned char>(s[i]);
  if (c0 < 0x80) {
    ++i;
    return c0;
  }
  int extra = 0;
  uint32_t cp = 0;
  if ((c0 & 0xE0) == 0xC0) {
    extra = 1;
    cp = c0 & 0x1F;
  } else if ((c0 & 0xF0) == 0xE0) {
    extra = 2;
    cp = c0 & 0x0F;
  } else if ((c0 & 0xF8) == 0xF0) {
    extra = 3;
    cp = c0 & 0x07;
  } else {
    ++i;
    return c0;
  }
  if (i + static_cast<size_t>(extra) >= s.size()) {
    ++i;
    return c0;
  }
  for (int k = 1; k <= extra; ++k) {
    const unsigned char ck = static_cast<unsigned char>(s[i + k]);
    if ((ck & 0xC0) != 0x80) {
      ++i;
      return c0;
    }
    cp = (cp << 6) | (ck & 0x3F);
  }
  i += 1 + static_cast<size_t>(extra);
  return cp;
}

bool is_unicode_space(uint32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
    case 0x20: case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_edge_punct(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?':
      return true;
    default:
      return false;
  }
}

std::string ascii_lower(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

// Emits a whitespace-delimited word as tokens, peeling edge punctuation.
void emit_word(const std::string& word, std::vector<std::string>& out) {
  size_t b = 0;
  size_t e = word.size();
  std::vector<char> leading;
  while (b < e && is_edge_punct(word[b])) {
    leading.push_back(word[b]);
    ++b;
  }
  std::vector<char> trailing;
  while (e > b && is_edge_punct(word[e - 1])) {
    trailing.push_back(word[e - 1]);
    --e;
  }
  for (char c : leading) out.emplace_back(1, c);
  if (e > b) out.push_back(ascii_lower(word.substr(b, e - b)));
  for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) {
    out.emplace_back(1, *it);
  }
}

[[noreturn]] void line_error(const std::string& path, size_t line_no,
                             const std::string& what) {
  throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": " +
                           what);
}

}  // namespace

std::string role_name(Role role) {
  switch (role) {
    case Role::train: return "train";
    case Role::val: return "val";
    case Role::test: return "test";
    case Role::pseudo: return "pseudo";
  }
  return "train";
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string word;
  size_t i = 0;
  while (i < text.size()) {
    const size_t start = i;
    const uint32_t cp = utf8_next(text, i);
    if (is_unicode_space(cp)) {
      if (!word.empty()) {
        emit_word(word, tokens);
        word.clear();
      }
    } else {
      word.append(text, start, i - start);
    }
  }
  if (!word.empty()) emit_word(word, tokens);
  return tokens;
}

Dataset load_jsonl(const std::string& path, Role role,
                   int num_classes_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  Dataset dataset;
  dataset.role = role;
  std::unordered_set<std::string> seen_ids;
  int max_label = -1;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim_view(line).empty()) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      line_error(path, line_no, "invalid JSON object");
    }
    for (const char* field : {"id", "text", "label"}) {
      if (!obj.contains(field)) {
        line_error(path, line_no, std::string("missing field ") + field);
      }
    }
    if (!obj["id"].is_string()) line_error(path, line_no, "field id must be a string");
    if (!obj["text"].is_string()) line_error(path, line_no, "field text must be a string");
    if (!obj["label"].is_number_integer()) {
      line_error(path, line_no, "field label must be an integer");
    }
    Example ex;
    ex.id = obj["id"].get<std::string>();
    ex.text = obj["text"].get<std::string>();
    ex.label = obj["label"].get<int>();
    if (ex.id.empty()) line_error(path, line_no, "empty id");
    if (trim_view(ex.text).empty()) line_error(path, line_no, "empty text");
    if (ex.label < 0) line_error(path, line_no, "negative label");
    if (!seen_ids.insert(ex.id).second) {
      line_error(path, line_no, "duplicate id \"" + ex.id + "\"");
    }
    if (obj.contains("origin_id")) ex.origin_id = obj["origin_id"].get<std::string>();
    if (obj.contains("method")) ex.method = obj["method"].get<std::string>();
    if (obj.contains("label_original")) {
      ex.label_original = obj["label_original"].get<int>();
    }
    max_label = std::max(max_label, ex.label);
    dataset.examples.push_back(std::move(ex));
  }
  dataset.num_classes = max_label + 1;
  if (num_classes_override > 0) {
    if (num_classes_override <= max_label) {
      throw std::runtime_error(path + ": num_classes override " +
                               std::to_string(num_classes_override) +
                               " is smaller than max label + 1");
    }
    dataset.num_classes = num_classes_override;
  }
  return dataset;
}

std::string dataset_to_jsonl(const Dataset& dataset) {
  std::string out;
  for (const Example& ex : dataset.examples) {
    json obj;
    obj["id"] = ex.id;
    obj["text"] = ex.text;
    obj["label"] = ex.label;
    if (ex.is_augmented()) {
      obj["origin_id"] = ex.origin_id;
      obj["method"] = ex.method;
      obj["label_original"] = ex.label_original;
    }
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void save_jsonl(const Dataset& dataset, const std::string& path) {
  atomic_write_file(path, dataset_to_jsonl(dataset));
}

std::map<int, size_t> class_counts(const Dataset& dataset) {
  std::map<int, size_t> counts;
  for (const Example& ex : dataset.examples) ++counts[ex.label];
  return counts;
}

std::pair<Dataset, Dataset> split_train_val(const Dataset& dataset,
                                            double val_fraction, uint64_t seed,
                                            bool stratified) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw std::invalid_argument("val_fraction must be in (0, 1)");
  }
  // Index lists in input order: one per class, or a single pool when the
  // split is not stratified.
  std::map<int, std::vector<size_t>> by_class;
  for (size_t i = 0; i < dataset.examples.size(); ++i) {
    by_class[stratified ? dataset.examples[i].label : 0].push_back(i);
  }
  std::vector<char> to_val(dataset.examples.size(), 0);
  Rng rng(combine_seed(seed, "split_train_val"));
  for (auto& [label, indices] : by_class) {
    const size_t n = indices.size();
    const size_t n_val =
        static_cast<size_t>(std::ceil(val_fraction * static_cast<double>(n)));
    if (n - n_val < 1) {
      throw std::runtime_error(
          stratified
              ? "class " + std::to_string(label) + " has " + std::to_string(n) +
                    " examples; validation fraction would empty its train side"
              : "validation fraction would empty the train side");
    }
    std::vector<size_t> shuffled = indices;
    seeded_shuffle(shuffled, rng);
    for (size_t k = 0; k < n_val; ++k) to_val[shuffled[k]] = 1;
  }
  Dataset train;
  train.num_classes = dataset.num_classes;
  train.role = Role::train;
  Dataset val;
  val.num_classes = dataset.num_classes;
  val.role = Role::val;
  for (size_t i = 0; i < dataset.examples.size(); ++i) {
    (to_val[i] ? val : train).examples.push_back(dataset.examples[i]);
  }
  return {std::move(train), std::move(val)};
}

Dataset subsample(const Dataset& dataset, size_t n, uint64_t seed,
                  bool stratified) {
  if (n < 1) throw std::invalid_argument("subsample size must be >= 1");
  if (n > dataset.size()) {
    throw std::runtime_error("subsample size " + std::to_string(n) +
                             " exceeds dataset size " +
                             std::to_string(dataset.size()));
  }
  std::map<int, std::vector<size_t>> by_class;
  for (size_t i = 0; i < dataset.examples.size(); ++i) {
    by_class[stratified ? dataset.examples[i].label : 0].push_back(i);
  }
  const double total = static_cast<double>(dataset.size());
  // Largest-remainder quotas: floor everything, then hand out the remaining
  // slots by descending fractional part (ties to the smaller label).
  struct Quota {
    int label;
    size_t base;
    double remainder;
  };
  std::vector<Quota> quotas;
  size_t assigned = 0;
  for (const auto& [label, indices] : by_class) {
    const double exact =
        static_cast<double>(n) * static_cast<double>(indices.size()) / total;
    const size_t base = static_cast<size_t>(std::floor(exact));
    quotas.push_back({label, base, exact - static_cast<double>(base)});
    assigned += base;
  }
  std::vector<size_t> order(quotas.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (quotas[a].remainder != quotas[b].remainder) {
      return quotas[a].remainder > quotas[b].remainder;
    }
    return quotas[a].label < quotas[b].label;
  });
  for (size_t k = 0; assigned < n; ++assigned, ++k) {
    ++quotas[order[k % order.size()]].base;
  }

  std::vector<char> selected(dataset.examples.size(), 0);
  Rng rng(combine_seed(seed, "subsample"));
  for (const Quota& q : quotas) {
    std::vector<size_t> shuffled = by_class[q.label];
    seeded_shuffle(shuffled, rng);
    for (size_t k = 0; k < q.base; ++k) selected[shuffled[k]] = 1;
  }
  Dataset out;
  out.num_classes = dataset.num_classes;
  out.role = dataset.role;
  for (size_t i = 0; i < dataset.examples.size(); ++i) {
    if (selected[i]) out.examples.push_back(dataset.examples[i]);
  }
  return out;
}

CorpusStats corpus_stats(const Dataset& dataset) {
  CorpusStats stats;
  stats.count = dataset.size();
  if (dataset.empty()) return stats;
  size_t total_tokens = 0;
  for (const Example& ex : dataset.examples) {
    total_tokens += tokenize(ex.text).size();
    ++stats.class_histogram[ex.label];
  }
  stats.avg_tokens =
      static_cast<double>(total_tokens) / static_cast<double>(stats.count);
  return stats;
}

}  // namespace summaug
