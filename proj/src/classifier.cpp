#include "summaug/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "summaug/util.hpp"

namespace summaug {

void validate(const TrainConfig& config) {
  if (!(config.learning_rate > 0.0)) {
    throw std::invalid_argument("learning_rate must be > 0");
  }
  if (config.batch_size < 1) {
    throw std::invalid_argument("batch_size must be >= 1");
  }
  if (config.epochs < 0) {
    throw std::invalid_argument("epochs must be >= 0");
  }
  if (config.l2 < 0.0) {
    throw std::invalid_argument("l2 must be >= 0");
  }
  if (config.hidden_dim < 1) {
    throw std::invalid_argument("hidden_dim must be >= 1");
  }
  if (config.max_features < 1) {
    throw std::invalid_argument("max_features must be >= 1");
  }
}

Vocab fit_vocab(const Dataset& dataset, int max_features) {
  if (dataset.empty()) {
    throw std::runtime_error("cannot fit vocabulary on an empty dataset");
  }
  if (max_features < 1) {
    throw std::invalid_argument("max_features must be >= 1");
  }
  std::unordered_map<std::string, int> df;
  std::unordered_map<std::string, bool> seen_in_doc;
  for (const Example& ex : dataset.examples) {
    seen_in_doc.clear();
    for (const std::string& token : tokenize(ex.text)) {
      if (!seen_in_doc.emplace(token, true).second) continue;
      ++df[token];
    }
  }
  std::vector<std::pair<std::string, int>> ranked(df.begin(), df.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > static_cast<size_t>(max_features)) {
    ranked.resize(static_cast<size_t>(max_features));
  }
  Vocab vocab;
  vocab.max_features = max_features;
  vocab.terms.reserve(ranked.size());
  vocab.idf.reserve(ranked.size());
  const double d = static_cast<double>(dataset.size());
  for (const auto& [term, term_df] : ranked) {
    vocab.index.emplace(term, static_cast<int>(vocab.terms.size()));
    vocab.terms.push_back(term);
    vocab.idf.push_back(std::log((1.0 + d) / (1.0 + term_df)) + 1.0);
  }
  return vocab;
}

SparseVector vectorize(const Vocab& vocab, const std::string& text) {
  std::map<int, double> tf;
  for (const std::string& token : tokenize(text)) {
    const auto it = vocab.index.find(token);
    if (it != vocab.index.end()) tf[it->second] += 1.0;
  }
  SparseVector x;
  x.indices.reserve(tf.size());
  x.values.reserve(tf.size());
  double norm_sq = 0.0;
  for (const auto& [idx, count] : tf) {
    const double v = count * vocab.idf[static_cast<size_t>(idx)];
    x.indices.push_back(idx);
    x.values.push_back(v);
    norm_sq += v * v;
  }
  if (norm_sq > 0.0) {
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : x.values) v *= inv;
  }
  return x;
}

std::vector<SparseVector> vectorize_dataset(const Vocab& vocab,
                                            const Dataset& dataset) {
  std::vector<SparseVector> out;
  out.reserve(dataset.size());
  for (const Example& ex : dataset.examples) {
    out.push_back(vectorize(vocab, ex.text));
  }
  return out;
}

namespace {

void fill_uniform(Rng& rng, std::vector<double>& data, double lo, double hi) {
  for (double& v : data) v = lo + (hi - lo) * rng_unit(rng);
}

void check_labels(const Dataset& data, int num_classes) {
  for (const Example& ex : data.examples) {
    if (ex.label < 0 || ex.label >= num_classes) {
      throw std::runtime_error("label " + std::to_string(ex.label) +
                               " of example \"" + ex.id +
                               "\" out of range for " +
                               std::to_string(num_classes) + " classes");
    }
  }
}

constexpr double kWeightInitRange = 0.05;

}  // namespace

Model init_model(const Vocab& vocab, int num_classes, int hidden_dim,
                 uint64_t seed) {
  if (num_classes < 2) {
    throw std::invalid_argument("model needs at least 2 classes");
  }
  if (hidden_dim < 1) {
    throw std::invalid_argument("hidden_dim must be >= 1");
  }
  Model model;
  model.vocab = vocab;
  model.num_classes = num_classes;
  model.hidden_dim = hidden_dim;
  model.w_hidden = Matrix(vocab.size(), hidden_dim);
  model.b_hidden.assign(static_cast<size_t>(hidden_dim), 0.0);
  model.w_head = Matrix(hidden_dim, num_classes);
  model.b_head.assign(static_cast<size_t>(num_classes), 0.0);
  Rng rng(combine_seed(seed, "init_model"));
  fill_uniform(rng, model.w_hidden.data, -kWeightInitRange, kWeightInitRange);
  fill_uniform(rng, model.w_head.data, -kWeightInitRange, kWeightInitRange);
  return model;
}

std::vector<double> hidden_activations(const Model& model,
                                       const SparseVector& x) {
  std::vector<double> h(model.b_hidden);
  for (size_t t = 0; t < x.indices.size(); ++t) {
    const int v = x.indices[t];
    const double xv = x.values[t];
    const double* row = &model.w_hidden.data[static_cast<size_t>(v) *
                                             static_cast<size_t>(model.hidden_dim)];
    for (int j = 0; j < model.hidden_dim; ++j) h[static_cast<size_t>(j)] += xv * row[j];
  }
  for (double& v : h) v = std::max(0.0, v);
  return h;
}

std::vector<double> predict_logits(const Model& model, const SparseVector& x) {
  const std::vector<double> h = hidden_activations(model, x);
  std::vector<double> z(model.b_head);
  for (int j = 0; j < model.hidden_dim; ++j) {
    const double hj = h[static_cast<size_t>(j)];
    if (hj == 0.0) continue;
    const double* row = &model.w_head.data[static_cast<size_t>(j) *
                                           static_cast<size_t>(model.num_classes)];
    for (int k = 0; k < model.num_classes; ++k) z[static_cast<size_t>(k)] += hj * row[k];
  }
  return z;
}

std::vector<double> softmax(std::vector<double> logits) {
  const double zmax = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& z : logits) {
    z = std::exp(z - zmax);
    sum += z;
  }
  for (double& z : logits) z /= sum;
  return logits;
}

int predict_class(const Model& model, const SparseVector& x) {
  const std::vector<double> z = predict_logits(model, x);
  int best = 0;
  for (int k = 1; k < model.num_classes; ++k) {
    if (z[static_cast<size_t>(k)] > z[static_cast<size_t>(best)]) best = k;
  }
  return best;
}

double batch_loss_and_gradients(const Model& model,
                                const std::vector<SparseVector>& features,
                                const std::vector<int>& labels,
                                const std::vector<size_t>& batch, double l2,
                                GradientBundle* grads) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const int h_dim = model.hidden_dim;
  const int k_dim = model.num_classes;
  if (grads) {
    grads->w_hidden = Matrix(model.w_hidden.rows, model.w_hidden.cols);
    grads->b_hidden.assign(static_cast<size_t>(h_dim), 0.0);
    grads->w_head = Matrix(model.w_head.rows, model.w_head.cols);
    grads->b_head.assign(static_cast<size_t>(k_dim), 0.0);
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  std::vector<double> h_pre(static_cast<size_t>(h_dim));
  for (const size_t i : batch) {
    const SparseVector& x = features[i];
    // forward, keeping pre-activations for the ReLU mask
    std::copy(model.b_hidden.begin(), model.b_hidden.end(), h_pre.begin());
    for (size_t t = 0; t < x.indices.size(); ++t) {
      const double xv = x.values[t];
      const double* row =
          &model.w_hidden.data[static_cast<size_t>(x.indices[t]) *
                               static_cast<size_t>(h_dim)];
      for (int j = 0; j < h_dim; ++j) h_pre[static_cast<size_t>(j)] += xv * row[j];
    }
    std::vector<double> z(model.b_head);
    for (int j = 0; j < h_dim; ++j) {
      const double hj = std::max(0.0, h_pre[static_cast<size_t>(j)]);
      if (hj == 0.0) continue;
      const double* row = &model.w_head.data[static_cast<size_t>(j) *
                                             static_cast<size_t>(k_dim)];
      for (int k = 0; k < k_dim; ++k) z[static_cast<size_t>(k)] += hj * row[k];
    }
    const std::vector<double> p = softmax(z);
    const int y = labels[i];
    loss -= std::log(std::max(p[static_cast<size_t>(y)], 1e-300)) * inv_b;
    if (!grads) continue;

    // dL/dz = (p - onehot(y)) / B
    std::vector<double> dz(p);
    dz[static_cast<size_t>(y)] -= 1.0;
    for (double& v : dz) v *= inv_b;

    std::vector<double> dh(static_cast<size_t>(h_dim), 0.0);
    for (int j = 0; j < h_dim; ++j) {
      const double hj = std::max(0.0, h_pre[static_cast<size_t>(j)]);
      double* g_row = &grads->w_head.data[static_cast<size_t>(j) *
                                          static_cast<size_t>(k_dim)];
      const double* w_row = &model.w_head.data[static_cast<size_t>(j) *
                                               static_cast<size_t>(k_dim)];
      double acc = 0.0;
      for (int k = 0; k < k_dim; ++k) {
        g_row[k] += hj * dz[static_cast<size_t>(k)];
        acc += w_row[k] * dz[static_cast<size_t>(k)];
      }
      dh[static_cast<size_t>(j)] = acc;
    }
    for (int k = 0; k < k_dim; ++k) {
      grads->b_head[static_cast<size_t>(k)] += dz[static_cast<size_t>(k)];
    }
    for (int j = 0; j < h_dim; ++j) {
      if (h_pre[static_cast<size_t>(j)] <= 0.0) dh[static_cast<size_t>(j)] = 0.0;
    }
    for (int j = 0; j < h_dim; ++j) {
      grads->b_hidden[static_cast<size_t>(j)] += dh[static_cast<size_t>(j)];
    }
    for (size_t t = 0; t < x.indices.size(); ++t) {
      const double xv = x.values[t];
      double* g_row = &grads->w_hidden.data[static_cast<size_t>(x.indices[t]) *
                                            static_cast<size_t>(h_dim)];
      for (int j = 0; j < h_dim; ++j) g_row[j] += xv * dh[static_cast<size_t>(j)];
    }
  }
  if (l2 > 0.0) {
    double reg = 0.0;
    for (const double w : model.w_hidden.data) reg += w * w;
    for (const double w : model.w_head.data) reg += w * w;
    loss += 0.5 * l2 * reg;
    if (grads) {
      for (size_t i = 0; i < grads->w_hidden.data.size(); ++i) {
        grads->w_hidden.data[i] += l2 * model.w_hidden.data[i];
      }
      for (size_t i = 0; i < grads->w_head.data.size(); ++i) {
        grads->w_head.data[i] += l2 * model.w_head.data[i];
      }
    }
  }
  return loss;
}

namespace {

double accuracy_on(const Model& model, const std::vector<SparseVector>& x,
                   const std::vector<int>& y) {
  size_t correct = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (predict_class(model, x[i]) == y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(x.size());
}

}  // namespace

std::pair<Model, std::vector<EpochMetric>> train_epochs(
    Model model, const Dataset& data, const Dataset* val,
    const TrainConfig& config, const EpochObserver& observer) {
  validate(config);
  check_labels(data, model.num_classes);
  if (val) check_labels(*val, model.num_classes);
  std::vector<EpochMetric> metrics;
  if (config.epochs == 0) return {std::move(model), std::move(metrics)};

  const std::vector<SparseVector> features =
      vectorize_dataset(model.vocab, data);
  std::vector<int> labels;
  labels.reserve(data.size());
  for (const Example& ex : data.examples) labels.push_back(ex.label);

  std::vector<SparseVector> val_features;
  std::vector<int> val_labels;
  if (val) {
    val_features = vectorize_dataset(model.vocab, *val);
    for (const Example& ex : val->examples) val_labels.push_back(ex.label);
  }

  const size_t n = data.size();
  if (n == 0) throw std::runtime_error("cannot train on an empty dataset");
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(combine_seed(config.seed, "epoch_shuffle"));
  GradientBundle grads;
  const double lr = config.learning_rate;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    seeded_shuffle(order, shuffle_rng);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < n; start += static_cast<size_t>(config.batch_size)) {
      const size_t end = std::min(n, start + static_cast<size_t>(config.batch_size));
      const std::vector<size_t> batch(order.begin() + static_cast<long>(start),
                                      order.begin() + static_cast<long>(end));
      const double batch_loss = batch_loss_and_gradients(
          model, features, labels, batch, config.l2, &grads);
      if (!std::isfinite(batch_loss)) {
        throw DivergenceError("training diverged: non-finite loss at epoch " +
                              std::to_string(epoch));
      }
      epoch_loss += batch_loss * static_cast<double>(batch.size());
      for (size_t i = 0; i < model.w_hidden.data.size(); ++i) {
        model.w_hidden.data[i] -= lr * grads.w_hidden.data[i];
      }
      for (size_t i = 0; i < model.b_hidden.size(); ++i) {
        model.b_hidden[i] -= lr * grads.b_hidden[i];
      }
      for (size_t i = 0; i < model.w_head.data.size(); ++i) {
        model.w_head.data[i] -= lr * grads.w_head.data[i];
      }
      for (size_t i = 0; i < model.b_head.size(); ++i) {
        model.b_head[i] -= lr * grads.b_head[i];
      }
    }
    EpochMetric metric;
    metric.epoch = epoch;
    metric.train_loss = epoch_loss / static_cast<double>(n);
    if (val) {
      metric.val_accuracy = accuracy_on(model, val_features, val_labels);
      metric.has_val = true;
    }
    metrics.push_back(metric);
    if (observer) observer(model, metric);
  }
  return {std::move(model), std::move(metrics)};
}

double evaluate(const Model& model, const Dataset& dataset) {
  if (dataset.empty()) {
    throw std::runtime_error("cannot evaluate on an empty dataset");
  }
  check_labels(dataset, model.num_classes);
  size_t correct = 0;
  for (const Example& ex : dataset.examples) {
    if (predict_class(model, vectorize(model.vocab, ex.text)) == ex.label) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

Model reset_head(const Model& model, int new_num_classes, uint64_t seed) {
  if (new_num_classes < 2) {
    throw std::invalid_argument("model needs at least 2 classes");
  }
  Model out = model;
  out.num_classes = new_num_classes;
  out.w_head = Matrix(model.hidden_dim, new_num_classes);
  out.b_head.assign(static_cast<size_t>(new_num_classes), 0.0);
  Rng rng(combine_seed(seed, "reset_head"));
  fill_uniform(rng, out.w_head.data, -kWeightInitRange, kWeightInitRange);
  return out;
}

namespace {

constexpr char kModelMagic[8] = {'S', 'M', 'A', 'U', 'G', 'M', 'D', 'L'};
constexpr uint32_t kModelVersion = 1;

void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ostream& out, uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
  write_u64(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

uint32_t read_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

uint64_t read_u64(std::istream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

std::vector<double> read_doubles(std::istream& in) {
  std::vector<double> v(read_u64(in));
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  return v;
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
  std::ostringstream out(std::ios::binary);
  out.write(kModelMagic, sizeof(kModelMagic));
  write_u32(out, kModelVersion);
  write_u64(out, model.vocab.terms.size());
  for (const std::string& term : model.vocab.terms) {
    write_u64(out, term.size());
    out.write(term.data(), static_cast<std::streamsize>(term.size()));
  }
  write_doubles(out, model.vocab.idf);
  write_u32(out, static_cast<uint32_t>(model.vocab.max_features));
  write_u32(out, static_cast<uint32_t>(model.hidden_dim));
  write_u32(out, static_cast<uint32_t>(model.num_classes));
  write_doubles(out, model.w_hidden.data);
  write_doubles(out, model.b_hidden);
  write_doubles(out, model.w_head.data);
  write_doubles(out, model.b_head);
  atomic_write_file(path, out.str());
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
    throw std::runtime_error(path + " is not a model file");
  }
  const uint32_t version = read_u32(in);
  if (version != kModelVersion) {
    throw std::runtime_error(path + ": unsupported model version " +
                             std::to_string(version));
  }
  Model model;
  const uint64_t v = read_u64(in);
  model.vocab.terms.reserve(v);
  for (uint64_t i = 0; i < v; ++i) {
    std::string term(read_u64(in), '\0');
    in.read(term.data(), static_cast<std::streamsize>(term.size()));
    model.vocab.index.emplace(term, static_cast<int>(i));
    model.vocab.terms.push_back(std::move(term));
  }
  model.vocab.idf = read_doubles(in);
  model.vocab.max_features = static_cast<int>(read_u32(in));
  model.hidden_dim = static_cast<int>(read_u32(in));
  model.num_classes = static_cast<int>(read_u32(in));
  model.w_hidden = Matrix(static_cast<int>(v), model.hidden_dim);
  model.w_hidden.data = read_doubles(in);
  model.b_hidden = read_doubles(in);
  model.w_head = Matrix(model.hidden_dim, model.num_classes);
  model.w_head.data = read_doubles(in);
  model.b_head = read_doubles(in);
  if (!in) throw std::runtime_error(path + ": truncated model file");
  return model;
}

}  // namespace summaug
