#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "summaug/corpus.hpp"
#include "summaug/util.hpp"
#include "test_util.hpp"

using namespace summaug;

namespace {

Dataset make_dataset(const std::vector<int>& labels) {
  Dataset dataset;
  dataset.examples.reserve(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    Example example;
    example.id = "e" + std::to_string(i);
    example.text = "document number " + std::to_string(i) + " body text";
    example.label = labels[i];
    dataset.examples.push_back(std::move(example));
  }
  int max_label = -1;
  for (int label : labels) max_label = std::max(max_label, label);
  dataset.num_classes = max_label + 1;
  return dataset;
}

std::set<std::string> id_set(const Dataset& dataset) {
  std::set<std::string> ids;
  for (const auto& example : dataset.examples) ids.insert(example.id);
  return ids;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("tokenize lowercases and splits punctuation off word edges") {
    CHECK(tokenize("Good movie!") ==
          std::vector<std::string>{"good", "movie", "!"});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(tokenize("A B. C") == std::vector<std::string>{"a", "b", ".", "c"});
    CHECK(tokenize("...") == std::vector<std::string>{".", ".", "."});
    CHECK(tokenize("wait!!") == std::vector<std::string>{"wait", "!", "!"});
    CHECK(tokenize("it's mid-word.punct") ==
          std::vector<std::string>{"it's", "mid-word.punct"});
  }

  TEST_CASE("tokenize splits on unicode whitespace") {
    CHECK(tokenize("a b") == std::vector<std::string>{"a", "b"});
    CHECK(tokenize("a b\tc\nd") ==
          std::vector<std::string>{"a", "b", "c", "d"});
    CHECK(tokenize("café Bar") ==
          std::vector<std::string>{"café", "bar"});
  }

  TEST_CASE("tokenize agrees with the reference rule on ascii text") {
    const std::vector<std::string> texts = {
        "The movie, frankly, was a bore: slow; loud!",
        "Colons: and semicolons; and commas, and periods.",
        "  leading and   trailing   spaces  ",
        "!leading?marks and trailing.marks.",
        "ALL CAPS SENTENCE! With?Inner marks staying put.",
    };
    for (const auto& text : texts) {
      CAPTURE(text);
      CHECK(tokenize(text) == testutil::tokenize_oracle(text));
    }
  }

  TEST_CASE("tokenize is idempotent over its own space-joined output") {
    const std::string text = "Weird, spacing... and MORE: marks?!";
    std::vector<std::string> once = tokenize(text);
    std::string joined;
    for (const auto& token : once) {
      if (!joined.empty()) joined += ' ';
      joined += token;
    }
    CHECK(tokenize(joined) == once);
  }

  TEST_CASE("load_jsonl reads plain corpora") {
    const std::string path = testutil::write_temp_file(
        "load_plain.jsonl",
        R"({"id": "a", "text": "first doc", "label": 0})"
        "\n"
        R"({"id": "b", "text": "second doc", "label": 1})"
        "\n");
    Dataset dataset = load_jsonl(path);
    CHECK(dataset.size() == 2);
    CHECK(dataset.num_classes == 2);
    CHECK(dataset.examples[0].id == "a");
    CHECK(dataset.examples[1].label == 1);
    CHECK_FALSE(dataset.examples[0].is_augmented());
  }

  TEST_CASE("load_jsonl error carries the line number") {
    const std::string path = testutil::write_temp_file(
        "load_missing_label.jsonl", R"({"id": "a", "text": "no label"})"
                                    "\n");
    const std::string error = testutil::capture_error([&] { load_jsonl(path); });
    CHECK(error.find("line 1: missing field label") != std::string::npos);
  }

  TEST_CASE("load_jsonl rejects duplicates, bad labels, malformed lines") {
    auto error_for = [](const std::string& name, const std::string& body) {
      const std::string path = testutil::write_temp_file(name, body);
      return testutil::capture_error([&] { load_jsonl(path); });
    };
    CHECK(error_for("dup.jsonl",
                    R"({"id": "a", "text": "x", "label": 0})"
                    "\n"
                    R"({"id": "a", "text": "y", "label": 0})"
                    "\n")
              .find("line 2: duplicate id \"a\"") != std::string::npos);
    CHECK(error_for("neg.jsonl", R"({"id": "a", "text": "x", "label": -1})"
                                 "\n")
              .find("negative label") != std::string::npos);
    CHECK(error_for("garbage.jsonl", "not json at all\n")
              .find("line 1") != std::string::npos);
    CHECK(error_for("empty_text.jsonl",
                    R"({"id": "a", "text": "   ", "label": 0})"
                    "\n")
              .find("empty text") != std::string::npos);
  }

  TEST_CASE("load_jsonl num_classes override") {
    const std::string path = testutil::write_temp_file(
        "override.jsonl",
        R"({"id": "a", "text": "x", "label": 0})"
        "\n"
        R"({"id": "b", "text": "y", "label": 9})"
        "\n");
    Dataset dataset = load_jsonl(path, Role::train, 10);
    CHECK(dataset.num_classes == 10);
    const std::string error = testutil::capture_error(
        [&] { load_jsonl(path, Role::train, 5); });
    CHECK(error.find("smaller than max label") != std::string::npos);
  }

  TEST_CASE("jsonl round trip keeps augmentation fields") {
    Dataset dataset = make_dataset({0, 1});
    dataset.examples[1].origin_id = "e0";
    dataset.examples[1].method = "summaug";
    dataset.examples[1].label_original = 1;
    const std::string path =
        testutil::temp_dir("roundtrip") + "/corpus.jsonl";
    save_jsonl(dataset, path);
    Dataset loaded = load_jsonl(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded.examples[1].origin_id == "e0");
    CHECK(loaded.examples[1].method == "summaug");
    CHECK(loaded.examples[1].label_original == 1);
    CHECK(loaded.examples[1].is_augmented());
    CHECK_FALSE(loaded.examples[0].is_augmented());
    CHECK(dataset_to_jsonl(loaded) == dataset_to_jsonl(dataset));
  }

  TEST_CASE("split_train_val stratifies per class with ceil rounding") {
    std::vector<int> labels(100);
    for (size_t i = 0; i < labels.size(); ++i) labels[i] = i % 2;
    Dataset dataset = make_dataset(labels);
    auto [train, val] = split_train_val(dataset, 0.1, 0);
    CHECK(train.size() == 90);
    CHECK(val.size() == 10);
    auto histogram = testutil::label_histogram(val);
    CHECK(histogram[0] == 5);
    CHECK(histogram[1] == 5);

    // ceil(0.1 * 3) = 1 from a 3-example class
    Dataset tiny = make_dataset({0, 0, 0, 1, 1, 1, 1, 1, 1, 1});
    auto [tiny_train, tiny_val] = split_train_val(tiny, 0.1, 7);
    auto tiny_histogram = testutil::label_histogram(tiny_val);
    CHECK(tiny_histogram[0] == 1);
    CHECK(tiny_histogram[1] == 1);
  }

  TEST_CASE("split_train_val partitions the corpus deterministically") {
    std::vector<int> labels(60);
    for (size_t i = 0; i < labels.size(); ++i) labels[i] = i % 3;
    Dataset dataset = make_dataset(labels);
    auto [train_a, val_a] = split_train_val(dataset, 0.25, 42);
    auto [train_b, val_b] = split_train_val(dataset, 0.25, 42);
    CHECK(train_a.size() + val_a.size() == dataset.size());
    CHECK(id_set(train_a) == id_set(train_b));
    CHECK(id_set(val_a) == id_set(val_b));

    std::set<std::string> all = id_set(train_a);
    for (const auto& id : id_set(val_a)) {
      CHECK(all.insert(id).second);  // disjoint
    }
    CHECK(all.size() == dataset.size());

    auto [train_c, val_c] = split_train_val(dataset, 0.25, 43);
    CHECK(id_set(val_c) != id_set(val_a));
  }

  TEST_CASE("split_train_val keeps input order in both halves") {
    std::vector<int> labels(30);
    for (size_t i = 0; i < labels.size(); ++i) labels[i] = i % 2;
    Dataset dataset = make_dataset(labels);
    auto [train, val] = split_train_val(dataset, 0.2, 9);
    std::vector<std::string> input_ids;
    for (const auto& example : dataset.examples) input_ids.push_back(example.id);
    std::vector<std::string> train_ids;
    for (const auto& example : train.examples) train_ids.push_back(example.id);
    std::vector<std::string> val_ids;
    for (const auto& example : val.examples) val_ids.push_back(example.id);
    CHECK(testutil::is_subsequence(train_ids, input_ids));
    CHECK(testutil::is_subsequence(val_ids, input_ids));
  }

  TEST_CASE("split_train_val matches the documented 25000 example shape") {
    std::vector<int> labels(25000);
    for (size_t i = 0; i < labels.size(); ++i) labels[i] = i % 2;
    Dataset dataset = make_dataset(labels);
    auto [train, val] = split_train_val(dataset, 0.1, 1);
    CHECK(train.size() == 22500);
    CHECK(val.size() == 2500);
  }

  TEST_CASE("split_train_val errors when a class would lose its train side") {
    Dataset dataset = make_dataset({0, 0, 0, 1});
    const std::string error = testutil::capture_error(
        [&] { split_train_val(dataset, 0.5, 0); });
    CHECK(error.find("class 1") != std::string::npos);
    CHECK_THROWS_AS(split_train_val(dataset, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(split_train_val(dataset, 1.0, 0), std::invalid_argument);
  }

  TEST_CASE("split_train_val unstratified draws from the whole pool") {
    std::vector<int> labels(40);
    for (size_t i = 0; i < labels.size(); ++i) labels[i] = i % 2;
    Dataset dataset = make_dataset(labels);
    auto [train, val] = split_train_val(dataset, 0.25, 5, false);
    CHECK(val.size() == 10);
    CHECK(train.size() == 30);
  }

  TEST_CASE("subsample hits exact stratified quotas") {
    std::vector<int> labels(50);
    for (size_t i = 0; i < labels.size(); ++i) labels[i] = i % 2;
    Dataset dataset = make_dataset(labels);
    Dataset sample = subsample(dataset, 20, 3);
    auto histogram = testutil::label_histogram(sample);
    CHECK(histogram[0] == 10);
    CHECK(histogram[1] == 10);
  }

  TEST_CASE("subsample quotas follow largest-remainder rounding") {
    // 7/11/23 class sizes; n=17 forces fractional quotas.
    std::vector<int> labels;
    for (int k = 0; k < 7; ++k) labels.push_back(0);
    for (int k = 0; k < 11; ++k) labels.push_back(1);
    for (int k = 0; k < 23; ++k) labels.push_back(2);
    Dataset dataset = make_dataset(labels);
    Dataset sample = subsample(dataset, 17, 12);
    auto expected = testutil::quota_oracle({{0, 7}, {1, 11}, {2, 23}}, 17);
    auto histogram = testutil::label_histogram(sample);
    CHECK(histogram == expected);
    CHECK(sample.size() == 17);
  }

  TEST_CASE("subsample of the full size keeps every member") {
    Dataset dataset = make_dataset({0, 1, 0, 1, 2});
    Dataset sample = subsample(dataset, 5, 99);
    CHECK(id_set(sample) == id_set(dataset));
  }

  TEST_CASE("subsample is deterministic and order-preserving") {
    std::vector<int> labels(40);
    for (size_t i = 0; i < labels.size(); ++i) labels[i] = i % 4;
    Dataset dataset = make_dataset(labels);
    Dataset a = subsample(dataset, 12, 8);
    Dataset b = subsample(dataset, 12, 8);
    CHECK(id_set(a) == id_set(b));
    std::vector<std::string> input_ids;
    for (const auto& example : dataset.examples) input_ids.push_back(example.id);
    std::vector<std::string> sample_ids;
    for (const auto& example : a.examples) sample_ids.push_back(example.id);
    CHECK(testutil::is_subsequence(sample_ids, input_ids));
  }

  TEST_CASE("subsample rejects out-of-range sizes") {
    Dataset dataset = make_dataset({0, 1});
    CHECK_THROWS(subsample(dataset, 3, 0));
    CHECK_THROWS(subsample(dataset, 0, 0));
  }

  TEST_CASE("corpus_stats averages token counts") {
    Dataset dataset;
    Example a;
    a.id = "a";
    a.text = "one two three four";
    Example b;
    b.id = "b";
    b.text = "one two three four five six";
    b.label = 1;
    dataset.examples = {a, b};
    dataset.num_classes = 2;
    CorpusStats stats = corpus_stats(dataset);
    CHECK(stats.count == 2);
    CHECK(stats.avg_tokens == doctest::Approx(5.0));
    CHECK(stats.class_histogram[0] == 1);
    CHECK(stats.class_histogram[1] == 1);

    CorpusStats empty = corpus_stats(Dataset{});
    CHECK(empty.count == 0);
    CHECK(empty.avg_tokens == 0.0);
  }

  TEST_CASE("corpus_stats matches an independent token counter") {
    Dataset dataset = make_dataset({0, 1, 0, 1, 0, 1, 0, 1, 0, 1});
    dataset.examples[3].text = "Punctuated, text! With: edges; everywhere?";
    dataset.examples[7].text = "   spaced    out   ";
    CorpusStats stats = corpus_stats(dataset);
    double total = 0.0;
    for (const auto& example : dataset.examples) {
      total += static_cast<double>(
          testutil::tokenize_oracle(example.text).size());
    }
    CHECK(stats.avg_tokens ==
          doctest::Approx(total / static_cast<double>(dataset.size())));
    size_t histogram_sum = 0;
    for (const auto& [label, count] : stats.class_histogram) {
      histogram_sum += count;
    }
    CHECK(histogram_sum == dataset.size());
  }
}
