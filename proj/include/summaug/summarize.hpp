#pragma once

#include <string>
#include <vector>

#include "summaug/corpus.hpp"
#include "summaug/labelmap.hpp"

namespace summaug {

struct Sentence {
  int index = 0;
  std::string text;
  std::vector<std::string> tokens;
};

enum class SummarizerKind { textrank, lead, remote };

SummarizerKind summarizer_kind_from_string(const std::string& name);
std::string summarizer_kind_name(SummarizerKind kind);

struct SummarizerConfig {
  SummarizerKind kind = SummarizerKind::textrank;
  int budget_tokens = 60;
  double damping = 0.85;
  double tolerance = 1e-4;
  int max_iterations = 100;
  std::string endpoint;           // remote only
  double timeout_s = 10.0;        // remote request timeout
  int max_in_flight = 4;          // bound on concurrent remote requests
  int retry_initial_delay_ms = 250;
};

void validate(const SummarizerConfig& config);

// Splits at . ! ? followed by whitespace and an uppercase letter or quote;
// the delimiter (plus any closing quotes) stays with the left sentence.
// Whole text comes back as one sentence when no boundary is found.
std::vector<Sentence> split_sentences(const std::string& text);

// Unique-token overlap / (ln|a| + ln|b|); 0 when either side has fewer than
// two tokens.
double sentence_similarity(const Sentence& a, const Sentence& b);

// Damped power iteration on the row-normalized similarity graph. Rows with
// zero out-weight distribute uniformly. Scores are strictly positive and
// sum to 1.
std::vector<double> textrank_scores(const std::vector<Sentence>& sentences,
                                    const SummarizerConfig& config);

// Indices of the selected sentences, ascending. Rank order is score
// descending with ties to the smaller index (document order for kind=lead);
// sentences are taken while the token budget holds, and the top-ranked
// sentence is always kept.
std::vector<int> select_summary_sentences(
    const std::vector<Sentence>& sentences, const SummarizerConfig& config);

std::string extract_summary(const std::string& text,
                            const SummarizerConfig& config);

// POST {"text", "max_tokens"} to config.endpoint, expect {"summary"}.
// Retries twice with exponential backoff on timeout/connect errors and 5xx.
std::string remote_summarize(const SummarizerConfig& config,
                             const std::string& text);

// Dispatches on config.kind.
std::string summarize_text(const std::string& text,
                           const SummarizerConfig& config);

// One pseudo example {summary(x), f(y)} per input example, order preserved.
// Any per-document failure aborts with the offending id.
Dataset build_pseudo_dataset(const Dataset& dataset,
                             const SummarizerConfig& config,
                             const LabelMap& map);

}  // namespace summaug
