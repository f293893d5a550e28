#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "summaug/corpus.hpp"

namespace summaug {

struct Vocab {
  std::vector<std::string> terms;  // index -> term
  std::unordered_map<std::string, int> index;
  std::vector<double> idf;
  int max_features = 20000;

  int size() const { return static_cast<int>(terms.size()); }
};

struct SparseVector {
  std::vector<int> indices;  // ascending
  std::vector<double> values;
};

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c)
      : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c), 0.0) {}

  double& operator()(int i, int j) {
    return data[static_cast<size_t>(i) * static_cast<size_t>(cols) + static_cast<size_t>(j)];
  }
  double operator()(int i, int j) const {
    return data[static_cast<size_t>(i) * static_cast<size_t>(cols) + static_cast<size_t>(j)];
  }
};

// tf-idf features -> one ReLU hidden layer (the "encoder") -> softmax head.
// The head is the only part holding per-class parameters, so it can be
// discarded and re-seeded independently of the encoder.
struct Model {
  Vocab vocab;
  Matrix w_hidden;               // V x H
  std::vector<double> b_hidden;  // H
  Matrix w_head;                 // H x K
  std::vector<double> b_head;    // K
  int num_classes = 0;
  int hidden_dim = 0;
};

struct TrainConfig {
  double learning_rate = 0.1;
  int batch_size = 64;
  int epochs = 2;
  uint64_t seed = 1;
  double l2 = 1e-4;
  int hidden_dim = 64;
  int max_features = 20000;
};

void validate(const TrainConfig& config);

struct EpochMetric {
  int stage = 0;  // 0 plain run, 1/2 curriculum stages
  int epoch = 0;  // 1-based within its run
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  bool has_val = false;
};

struct GradientBundle {
  Matrix w_hidden;
  std::vector<double> b_hidden;
  Matrix w_head;
  std::vector<double> b_head;
};

// Top-max_features terms by document frequency (ties lexicographic);
// idf(t) = ln((1+D)/(1+df(t))) + 1.
Vocab fit_vocab(const Dataset& dataset, int max_features);

// Raw in-vocab token counts scaled by idf, then L2-normalized. All-OOV text
// vectorizes to the zero vector.
SparseVector vectorize(const Vocab& vocab, const std::string& text);

std::vector<SparseVector> vectorize_dataset(const Vocab& vocab,
                                            const Dataset& dataset);

// Uniform weights in [-0.05, 0.05] from a seeded generator, zero biases.
Model init_model(const Vocab& vocab, int num_classes, int hidden_dim,
                 uint64_t seed);

std::vector<double> hidden_activations(const Model& model,
                                       const SparseVector& x);
std::vector<double> predict_logits(const Model& model, const SparseVector& x);
std::vector<double> softmax(std::vector<double> logits);
int predict_class(const Model& model, const SparseVector& x);

// Mean softmax cross-entropy over `batch` plus (l2/2)*||W||^2 on both weight
// matrices (biases unregularized). When `grads` is non-null it receives the
// full analytic gradient of that loss.
double batch_loss_and_gradients(const Model& model,
                                const std::vector<SparseVector>& features,
                                const std::vector<int>& labels,
                                const std::vector<size_t>& batch, double l2,
                                GradientBundle* grads);

using EpochObserver =
    std::function<void(const Model& model, const EpochMetric& metric)>;

// Mini-batch SGD with per-epoch seeded shuffling. Returns the final-state
// model plus one metric per epoch; throws DivergenceError on non-finite
// loss. `val` may be null (no per-epoch accuracy).
std::pair<Model, std::vector<EpochMetric>> train_epochs(
    Model model, const Dataset& data, const Dataset* val,
    const TrainConfig& config, const EpochObserver& observer = nullptr);

// Argmax accuracy; prediction ties break toward the smaller class index.
double evaluate(const Model& model, const Dataset& dataset);

// Fresh seeded head with new_num_classes outputs; encoder untouched.
Model reset_head(const Model& model, int new_num_classes, uint64_t seed);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace summaug
