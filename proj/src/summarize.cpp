#include "summaug/summarize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "summaug/util.hpp"

namespace summaug {

namespace {

bool is_delimiter(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_quote_at(const std::string& s, size_t i, size_t* len) {
  const char c = s[i];
  if (c == '"' || c == '\'') {
    *len = 1;
    return true;
  }
  // U+2018/2019/201C/201D
  if (i + 2 < s.size() && static_cast<unsigned char>(c) == 0xE2 &&
      static_cast<unsigned char>(s[i + 1]) == 0x80) {
    const unsigned char c2 = static_cast<unsigned char>(s[i + 2]);
    if (c2 == 0x98 || c2 == 0x99 || c2 == 0x9C || c2 == 0x9D) {
      *len = 3;
      return true;
    }
  }
  *len = 0;
  return false;
}

bool is_upper_ascii(char c) { return c >= 'A' && c <= 'Z'; }

void push_sentence(std::vector<Sentence>& sentences, const std::string& text,
                   size_t begin, size_t end) {
  while (begin < end && is_ascii_space(text[begin])) ++begin;
  while (end > begin && is_ascii_space(text[end - 1])) --end;
  if (begin >= end) return;
  Sentence s;
  s.index = static_cast<int>(sentences.size());
  s.text = text.substr(begin, end - begin);
  s.tokens = tokenize(s.text);
  sentences.push_back(std::move(s));
}

}  // namespace

SummarizerKind summarizer_kind_from_string(const std::string& name) {
  if (name == "textrank") return SummarizerKind::textrank;
  if (name == "lead") return SummarizerKind::lead;
  if (name == "remote") return SummarizerKind::remote;
  throw std::invalid_argument("unknown summarizer kind: " + name);
}

std::string summarizer_kind_name(SummarizerKind kind) {
  switch (kind) {
    case SummarizerKind::textrank: return "textrank";
    case SummarizerKind::lead: return "lead";
    case SummarizerKind::remote: return "remote";
  }
  return "textrank";
}

void validate(const SummarizerConfig& config) {
  if (config.budget_tokens < 1) {
    throw std::invalid_argument("budget_tokens must be >= 1");
  }
  if (!(config.damping > 0.0 && config.damping < 1.0)) {
    throw std::invalid_argument("damping must be in (0, 1)");
  }
  if (!(config.tolerance > 0.0)) {
    throw std::invalid_argument("tolerance must be > 0");
  }
  if (config.max_iterations < 1) {
    throw std::invalid_argument("max_iterations must be >= 1");
  }
  if (config.kind == SummarizerKind::remote && config.endpoint.empty()) {
    throw std::invalid_argument("remote summarizer requires an endpoint");
  }
  if (config.max_in_flight < 1) {
    throw std::invalid_argument("max_in_flight must be >= 1");
  }
}

std::vector<Sentence> split_sentences(const std::string& text) {
  std::vector<Sentence> sentences;
  size_t begin = 0;
  size_t i = 0;
  while (i < text.size()) {
    if (!is_delimiter(text[i])) {
      ++i;
      continue;
    }
    // Closing quotes right after the delimiter stay with the left sentence.
    size_t j = i + 1;
    size_t qlen = 0;
    while (j < text.size() && is_quote_at(text, j, &qlen)) j += qlen;
    size_t k = j;
    while (k < text.size() && is_ascii_space(text[k])) ++k;
    const bool has_space = k > j;
    bool boundary = false;
    if (has_space && k < text.size()) {
      size_t dummy = 0;
      boundary = is_upper_ascii(text[k]) || is_quote_at(text, k, &dummy);
    }
    if (boundary) {
      push_sentence(sentences, text, begin, j);
      begin = k;
      i = k;
    } else {
      ++i;
    }
  }
  push_sentence(sentences, text, begin, text.size());
  return sentences;
}

double sentence_similarity(const Sentence& a, const Sentence& b) {
  if (a.tokens.size() < 2 || b.tokens.size() < 2) return 0.0;
  const std::unordered_set<std::string> set_a(a.tokens.begin(), a.tokens.end());
  std::unordered_set<std::string> seen;
  size_t overlap = 0;
  for (const std::string& t : b.tokens) {
    if (set_a.count(t) && seen.insert(t).second) ++overlap;
  }
  const double denom = std::log(static_cast<double>(a.tokens.size())) +
                       std::log(static_cast<double>(b.tokens.size()));
  if (denom <= 0.0) return 0.0;
  return static_cast<double>(overlap) / denom;
}

std::vector<double> textrank_scores(const std::vector<Sentence>& sentences,
                                    const SummarizerConfig& config) {
  validate(config);
  const size_t n = sentences.size();
  if (n == 0) throw std::invalid_argument("textrank needs at least one sentence");
  if (n == 1) return {1.0};

  // Row-normalized similarity matrix; dangling rows spread uniformly.
  std::vector<double> weights(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const double sim = sentence_similarity(sentences[i], sentences[j]);
      weights[i * n + j] = sim;
      weights[j * n + i] = sim;
    }
  }
  const double uniform = 1.0 / static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (size_t j = 0; j < n; ++j) row_sum += weights[i * n + j];
    if (row_sum > 0.0) {
      for (size_t j = 0; j < n; ++j) weights[i * n + j] /= row_sum;
    } else {
      for (size_t j = 0; j < n; ++j) weights[i * n + j] = uniform;
    }
  }

  std::vector<double> scores(n, uniform);
  std::vector<double> next(n, 0.0);
  const double base = (1.0 - config.damping) * uniform;
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (size_t i = 0; i < n; ++i) {
      const double si = scores[i];
      for (size_t j = 0; j < n; ++j) next[j] += weights[i * n + j] * si;
    }
    double delta = 0.0;
    for (size_t j = 0; j < n; ++j) {
      next[j] = base + config.damping * next[j];
      delta += std::abs(next[j] - scores[j]);
    }
    scores.swap(next);
    if (delta < config.tolerance) break;
  }
  return scores;
}

std::vector<int> select_summary_sentences(
    const std::vector<Sentence>& sentences, const SummarizerConfig& config) {
  validate(config);
  if (sentences.empty()) return {};
  std::vector<int> rank(sentences.size());
  std::iota(rank.begin(), rank.end(), 0);
  if (config.kind != SummarizerKind::lead) {
    const std::vector<double> scores = textrank_scores(sentences, config);
    std::stable_sort(rank.begin(), rank.end(), [&](int a, int b) {
      if (scores[static_cast<size_t>(a)] != scores[static_cast<size_t>(b)]) {
        return scores[static_cast<size_t>(a)] > scores[static_cast<size_t>(b)];
      }
      return a < b;
    });
  }
  std::vector<int> selected;
  size_t used = 0;
  for (int idx : rank) {
    const size_t cost = sentences[static_cast<size_t>(idx)].tokens.size();
    if (selected.empty()) {
      // The top-ranked sentence is always kept, budget or not.
      selected.push_back(idx);
      used = cost;
      continue;
    }
    if (used + cost > static_cast<size_t>(config.budget_tokens)) break;
    selected.push_back(idx);
    used += cost;
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

std::string extract_summary(const std::string& text,
                            const SummarizerConfig& config) {
  const std::vector<Sentence> sentences = split_sentences(text);
  if (sentences.empty()) {
    throw std::runtime_error("cannot summarize empty text");
  }
  const std::vector<int> selected = select_summary_sentences(sentences, config);
  std::string out;
  for (size_t k = 0; k < selected.size(); ++k) {
    if (k > 0) out += ' ';
    out += sentences[static_cast<size_t>(selected[k])].text;
  }
  return out;
}

std::string summarize_text(const std::string& text,
                           const SummarizerConfig& config) {
  if (config.kind == SummarizerKind::remote) {
    return remote_summarize(config, text);
  }
  return extract_summary(text, config);
}

namespace {

Example make_pseudo_example(const Example& source, std::string summary,
                            const LabelMap& map) {
  Example pseudo;
  pseudo.id = source.id + "-summaug";
  pseudo.text = std::move(summary);
  pseudo.label = apply_label_map(map, source.label);
  pseudo.origin_id = source.id;
  pseudo.method = "summaug";
  pseudo.label_original = source.label;
  return pseudo;
}

}  // namespace

Dataset build_pseudo_dataset(const Dataset& dataset,
                             const SummarizerConfig& config,
                             const LabelMap& map) {
  validate(config);
  if (map.num_fine() != dataset.num_classes) {
    throw std::runtime_error("label map covers " +
                             std::to_string(map.num_fine()) +
                             " labels but dataset has " +
                             std::to_string(dataset.num_classes));
  }
  Dataset pseudo;
  pseudo.num_classes = map.num_coarse;
  pseudo.role = Role::pseudo;
  pseudo.examples.resize(dataset.size());

  auto summarize_one = [&](size_t i) {
    const Example& source = dataset.examples[i];
    try {
      pseudo.examples[i] =
          make_pseudo_example(source, summarize_text(source.text, config), map);
    } catch (const std::exception& e) {
      throw std::runtime_error("summarization failed for id \"" + source.id +
                               "\": " + e.what());
    }
  };

  if (config.kind == SummarizerKind::remote && dataset.size() > 1) {
    // Bounded in-flight requests; slots are indexed so output order stays
    // equal to input order no matter which request finishes first.
    const size_t workers =
        std::min<size_t>(static_cast<size_t>(config.max_in_flight),
                         dataset.size());
    std::atomic<size_t> cursor{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::string first_error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        while (!failed.load()) {
          const size_t i = cursor.fetch_add(1);
          if (i >= dataset.size()) break;
          try {
            summarize_one(i);
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!failed.exchange(true)) first_error = e.what();
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (failed.load()) throw std::runtime_error(first_error);
  } else {
    for (size_t i = 0; i < dataset.size(); ++i) summarize_one(i);
  }
  return pseudo;
}

}  // namespace summaug
