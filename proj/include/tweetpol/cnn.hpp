#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tweetpol/embeddings.hpp"
#include "tweetpol/polarity.hpp"
#include "tweetpol/preprocess.hpp"

// Multi-branch 1D convolutional text classifier over frozen word vectors:
// parallel convolutions -> selu -> masked global max pooling -> concat ->
// dense + selu -> dropout -> dense -> softmax. Everything is float64.
namespace tweetpol::cnn {

inline constexpr double kSeluLambda = 1.0507009873554804934193349852946;
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

inline double selu(double x) { return x > 0.0 ? kSeluLambda * x : kSeluLambda * kSeluAlpha * std::expm1(x); }

inline double selu_derivative(double x) {
  return x > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(x);
}

// Uniform draws built directly from the engine output so that initial
// weights and dropout masks do not depend on the standard library vendor.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    std::size_t n = 1;
    for (auto v : shape) n *= v;
    data.assign(n, 0.0);
  }

  std::size_t size() const { return data.size(); }
  bool operator==(const Tensor&) const = default;
};

struct CnnArchitecture {
  std::size_t embedding_dim = 300;
  std::size_t max_length = 50;
  std::vector<std::size_t> window_widths{2, 3, 4};
  std::size_t filters = 56;
  std::size_t hidden = 200;
  std::size_t classes = kNumClasses;
  double dropout = 0.2;

  std::size_t pooled_size() const { return window_widths.size() * filters; }
  std::size_t widest_window() const {
    return *std::max_element(window_widths.begin(), window_widths.end());
  }

  bool operator==(const CnnArchitecture&) const = default;
};

inline CnnArchitecture cnn4_architecture(std::size_t embedding_dim, std::size_t max_length) {
  CnnArchitecture a;
  a.embedding_dim = embedding_dim;
  a.max_length = max_length;
  return a;
}

// Parameter tensors, in order: per branch (weight [filters, width, dim],
// bias [filters]), then dense weight [hidden, pooled] and bias [hidden],
// then output weight [classes, hidden] and bias [classes].
struct CnnModel {
  CnnArchitecture arch;
  std::vector<Tensor> params;
  std::vector<std::string> names;

  std::size_t branches() const { return arch.window_widths.size(); }
  Tensor& conv_weight(std::size_t b) { return params[2 * b]; }
  Tensor& conv_bias(std::size_t b) { return params[2 * b + 1]; }
  const Tensor& conv_weight(std::size_t b) const { return params[2 * b]; }
  const Tensor& conv_bias(std::size_t b) const { return params[2 * b + 1]; }
  const Tensor& dense_weight() const { return params[2 * branches()]; }
  const Tensor& dense_bias() const { return params[2 * branches() + 1]; }
  const Tensor& output_weight() const { return params[2 * branches() + 2]; }
  const Tensor& output_bias() const { return params[2 * branches() + 3]; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params) n += p.size();
    return n;
  }

  bool operator==(const CnnModel&) const = default;
};

// Zero-initialized tensors with the architecture's shapes.
inline CnnModel make_model(const CnnArchitecture& arch) {
  if (arch.window_widths.empty() || arch.filters == 0 || arch.hidden == 0 || arch.classes == 0 ||
      arch.embedding_dim == 0)
    throw Error("invalid CNN architecture");
  if (arch.max_length < arch.widest_window())
    throw Error("max sequence length " + std::to_string(arch.max_length) +
                " is shorter than the widest convolution window (" +
                std::to_string(arch.widest_window()) + ")");
  if (!(arch.dropout >= 0.0 && arch.dropout < 1.0)) throw Error("dropout must lie in [0, 1)");
  CnnModel m;
  m.arch = arch;
  for (auto w : arch.window_widths) {
    m.params.emplace_back(std::vector<std::size_t>{arch.filters, w, arch.embedding_dim});
    m.names.push_back("conv" + std::to_string(w) + ".weight");
    m.params.emplace_back(std::vector<std::size_t>{arch.filters});
    m.names.push_back("conv" + std::to_string(w) + ".bias");
  }
  m.params.emplace_back(std::vector<std::size_t>{arch.hidden, arch.pooled_size()});
  m.names.push_back("dense.weight");
  m.params.emplace_back(std::vector<std::size_t>{arch.hidden});
  m.names.push_back("dense.bias");
  m.params.emplace_back(std::vector<std::size_t>{arch.classes, arch.hidden});
  m.names.push_back("output.weight");
  m.params.emplace_back(std::vector<std::size_t>{arch.classes});
  m.names.push_back("output.bias");
  return m;
}

// Weights ~ U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)); biases zero.
inline void initialize(CnnModel& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    auto& t = m.params[i];
    if (t.shape.size() < 2) {
      std::fill(t.data.begin(), t.data.end(), 0.0);
      continue;
    }
    std::size_t fan_in = t.size() / t.shape[0];
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (double& v : t.data) v = (2.0 * uniform01(rng) - 1.0) * limit;
  }
}

inline CnnModel build_cnn(const CnnArchitecture& arch, std::uint64_t seed) {
  auto m = make_model(arch);
  initialize(m, seed);
  return m;
}

inline CnnModel build_cnn4(std::size_t embedding_dim, std::size_t max_length, std::uint64_t seed) {
  return build_cnn(cnn4_architecture(embedding_dim, max_length), seed);
}

// ---------------------------------------------------------------------------
// Inputs.

// L x d row-major matrix of token vectors; rows at or beyond valid_length
// are zero padding.
struct SequenceInput {
  std::size_t length = 0;
  std::size_t dim = 0;
  std::size_t valid_length = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

inline SequenceInput encode_sequence(std::span<const std::string> tokens, const EmbeddingTable& table,
                                     std::size_t max_length) {
  if (max_length < 1) throw Error("encode_sequence: max length must be at least 1");
  SequenceInput in;
  in.length = max_length;
  in.dim = table.dimension();
  in.valid_length = std::min(tokens.size(), max_length);
  in.values.assign(max_length * in.dim, 0.0);
  for (std::size_t i = 0; i < in.valid_length; ++i) {
    auto v = table.lookup(tokens[i]);
    if (!v.empty()) std::copy(v.begin(), v.end(), in.values.begin() + static_cast<std::ptrdiff_t>(i * in.dim));
  }
  return in;
}

// Number of leading window positions that take part in pooling: windows that
// lie entirely on real tokens, or just the first window when the sequence is
// shorter than the window.
inline std::size_t pooling_positions(std::size_t valid_length, std::size_t length, std::size_t width) {
  std::size_t all = length - width + 1;
  if (valid_length < width) return 1;
  return std::min(valid_length - width + 1, all);
}

// ---------------------------------------------------------------------------
// Forward / backward.

enum class Mode { Train, Eval };

struct ExampleTrace {
  std::vector<double> pooled;            // pooled_size
  std::vector<std::size_t> argmax;       // winning window position per pooled unit
  std::vector<double> argmax_preact;     // conv pre-activation at that position
  std::vector<double> hidden_preact;     // hidden
  std::vector<double> hidden_dropped;    // after selu and dropout
  std::vector<double> probabilities;     // classes
};

// Dropout keep-masks, one entry per hidden unit, already scaled by 1/(1-p).
// An empty mask means no dropout.
using DropoutMask = std::vector<double>;

inline DropoutMask sample_dropout_mask(const CnnArchitecture& arch, std::mt19937_64& rng) {
  DropoutMask m(arch.hidden);
  double keep = 1.0 - arch.dropout;
  for (double& v : m) v = uniform01(rng) < keep ? 1.0 / keep : 0.0;
  return m;
}

inline void softmax_inplace(std::vector<double>& z) {
  double mx = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    s += v;
  }
  for (double& v : z) v /= s;
}

inline ExampleTrace forward_example(const CnnModel& m, const SequenceInput& x, const DropoutMask& mask) {
  const auto& a = m.arch;
  if (x.dim != a.embedding_dim || x.length != a.max_length)
    throw Error("CNN input is " + std::to_string(x.length) + "x" + std::to_string(x.dim) +
                ", model expects " + std::to_string(a.max_length) + "x" +
                std::to_string(a.embedding_dim));
  ExampleTrace tr;
  tr.pooled.resize(a.pooled_size());
  tr.argmax.resize(a.pooled_size());
  tr.argmax_preact.resize(a.pooled_size());
  for (std::size_t b = 0; b < m.branches(); ++b) {
    const std::size_t w = a.window_widths[b];
    const std::size_t span = w * a.embedding_dim;
    const auto& W = m.conv_weight(b).data;
    const auto& B = m.conv_bias(b).data;
    const std::size_t npos = pooling_positions(x.valid_length, x.length, w);
    for (std::size_t f = 0; f < a.filters; ++f) {
      const double* wf = W.data() + f * span;
      double best = -std::numeric_limits<double>::infinity();
      std::size_t best_t = 0;
      for (std::size_t t = 0; t < npos; ++t) {
        const double* xt = x.values.data() + t * a.embedding_dim;
        double z = B[f];
        for (std::size_t k = 0; k < span; ++k) z += wf[k] * xt[k];
        if (z > best) {
          best = z;
          best_t = t;
        }
      }
      std::size_t u = b * a.filters + f;
      // selu is increasing, so the max of activations sits at the max of
      // pre-activations.
      tr.pooled[u] = selu(best);
      tr.argmax[u] = best_t;
      tr.argmax_preact[u] = best;
    }
  }

  const auto& W1 = m.dense_weight().data;
  const auto& b1 = m.dense_bias().data;
  tr.hidden_preact.resize(a.hidden);
  tr.hidden_dropped.resize(a.hidden);
  const std::size_t P = a.pooled_size();
  for (std::size_t h = 0; h < a.hidden; ++h) {
    double z = b1[h];
    const double* row = W1.data() + h * P;
    for (std::size_t k = 0; k < P; ++k) z += row[k] * tr.pooled[k];
    tr.hidden_preact[h] = z;
    double act = selu(z);
    tr.hidden_dropped[h] = mask.empty() ? act : act * mask[h];
  }

  const auto& W2 = m.output_weight().data;
  const auto& b2 = m.output_bias().data;
  tr.probabilities.resize(a.classes);
  for (std::size_t c = 0; c < a.classes; ++c) {
    double z = b2[c];
    const double* row = W2.data() + c * a.hidden;
    for (std::size_t h = 0; h < a.hidden; ++h) z += row[h] * tr.hidden_dropped[h];
    tr.probabilities[c] = z;
  }
  softmax_inplace(tr.probabilities);
  return tr;
}

// Class probabilities for a batch. Train mode draws a fresh dropout mask per
// example from `seed`; eval mode is deterministic and ignores it.
inline std::vector<std::vector<double>> forward(const CnnModel& m, std::span<const SequenceInput> batch,
                                                Mode mode = Mode::Eval, std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> out;
  out.reserve(batch.size());
  for (const auto& x : batch) {
    DropoutMask mask;
    if (mode == Mode::Train && m.arch.dropout > 0.0) mask = sample_dropout_mask(m.arch, rng);
    out.push_back(forward_example(m, x, mask).probabilities);
  }
  return out;
}

inline ClassDistribution predict_distribution(const CnnModel& m, const SequenceInput& x) {
  if (m.arch.classes != kNumClasses) throw Error("predict_distribution: model is not 4-class");
  auto p = forward_example(m, x, {}).probabilities;
  ClassDistribution d;
  std::copy(p.begin(), p.end(), d.probabilities.begin());
  return d;
}

inline constexpr double kProbabilityFloor = 1e-12;

// Mean categorical cross-entropy.
inline double loss(std::span<const std::vector<double>> probs, std::span<const std::size_t> gold) {
  if (probs.size() != gold.size()) throw Error("loss: batch and label counts differ");
  if (probs.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    s -= std::log(std::max(probs[i][gold[i]], kProbabilityFloor));
  return s / static_cast<double>(probs.size());
}

inline std::vector<Tensor> zero_like(const CnnModel& m) {
  std::vector<Tensor> g;
  g.reserve(m.params.size());
  for (const auto& p : m.params) g.emplace_back(p.shape);
  return g;
}

// Accumulates d(loss)/d(params) for one example into `grads`, with the loss
// scaled by `scale` (1/batch for a mean).
inline void backward_example(const CnnModel& m, const SequenceInput& x, const ExampleTrace& tr,
                             const DropoutMask& mask, std::size_t gold, double scale,
                             std::vector<Tensor>& grads) {
  const auto& a = m.arch;
  const std::size_t nb = m.branches();
  const std::size_t P = a.pooled_size();

  std::vector<double> dlogits(tr.probabilities);
  // The floor in the loss is flat below 1e-12, so its gradient vanishes there.
  if (tr.probabilities[gold] < kProbabilityFloor) {
    std::fill(dlogits.begin(), dlogits.end(), 0.0);
  } else {
    dlogits[gold] -= 1.0;
    for (double& v : dlogits) v *= scale;
  }

  auto& gW2 = grads[2 * nb + 2].data;
  auto& gb2 = grads[2 * nb + 3].data;
  const auto& W2 = m.output_weight().data;
  std::vector<double> dhidden(a.hidden, 0.0);
  for (std::size_t c = 0; c < a.classes; ++c) {
    double g = dlogits[c];
    gb2[c] += g;
    double* grow = gW2.data() + c * a.hidden;
    const double* wrow = W2.data() + c * a.hidden;
    for (std::size_t h = 0; h < a.hidden; ++h) {
      grow[h] += g * tr.hidden_dropped[h];
      dhidden[h] += g * wrow[h];
    }
  }

  auto& gW1 = grads[2 * nb].data;
  auto& gb1 = grads[2 * nb + 1].data;
  const auto& W1 = m.dense_weight().data;
  std::vector<double> dpooled(P, 0.0);
  for (std::size_t h = 0; h < a.hidden; ++h) {
    double g = dhidden[h];
    if (!mask.empty()) g *= mask[h];
    g *= selu_derivative(tr.hidden_preact[h]);
    if (g == 0.0) continue;
    gb1[h] += g;
    double* grow = gW1.data() + h * P;
    const double* wrow = W1.data() + h * P;
    for (std::size_t k = 0; k < P; ++k) {
      grow[k] += g * tr.pooled[k];
      dpooled[k] += g * wrow[k];
    }
  }

  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t span = a.window_widths[b] * a.embedding_dim;
    auto& gW = grads[2 * b].data;
    auto& gB = grads[2 * b + 1].data;
    for (std::size_t f = 0; f < a.filters; ++f) {
      std::size_t u = b * a.filters + f;
      double g = dpooled[u] * selu_derivative(tr.argmax_preact[u]);
      if (g == 0.0) continue;
      gB[f] += g;
      const double* xt = x.values.data() + tr.argmax[u] * a.embedding_dim;
      double* gw = gW.data() + f * span;
      for (std::size_t k = 0; k < span; ++k) gw[k] += g * xt[k];
    }
  }
}

struct LossAndGradients {
  double loss = 0.0;
  std::vector<Tensor> gradients;
};

// Forward pass with the given dropout masks (empty vector, or one mask per
// example) followed by reverse-mode differentiation of the mean loss.
inline LossAndGradients backward(const CnnModel& m, std::span<const SequenceInput> batch,
                                 std::span<const std::size_t> gold,
                                 std::span<const DropoutMask> masks = {}) {
  if (batch.size() != gold.size()) throw Error("backward: batch and label counts differ");
  if (!masks.empty() && masks.size() != batch.size())
    throw Error("backward: need one dropout mask per example");
  LossAndGradients out;
  out.gradients = zero_like(m);
  if (batch.empty()) return out;
  const double scale = 1.0 / static_cast<double>(batch.size());
  static const DropoutMask kNoMask;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (gold[i] >= m.arch.classes) throw Error("backward: label out of range");
    const auto& mask = masks.empty() ? kNoMask : masks[i];
    auto tr = forward_example(m, batch[i], mask);
    out.loss -= std::log(std::max(tr.probabilities[gold[i]], kProbabilityFloor)) * scale;
    backward_example(m, batch[i], tr, mask, gold[i], scale, out.gradients);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adam.

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double decay = 0.0;  // lr / (1 + decay * step)

  bool operator==(const AdamConfig&) const = default;
};

struct AdamState {
  AdamConfig config;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;
};

inline AdamState make_adam_state(std::span<const Tensor> params, const AdamConfig& config = {}) {
  AdamState s;
  s.config = config;
  for (const auto& p : params) {
    s.first_moment.emplace_back(p.shape);
    s.second_moment.emplace_back(p.shape);
  }
  return s;
}

// Bias-corrected Adam update of every tensor in place.
inline void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size())
    throw Error("adam_step: parameter, gradient and state tensor counts differ");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i].shape != grads[i].shape || params[i].shape != state.first_moment[i].shape)
      throw Error("adam_step: shape mismatch in tensor " + std::to_string(i));

  const auto& c = state.config;
  double lr = c.learning_rate / (1.0 + c.decay * static_cast<double>(state.step));
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].data;
    const auto& g = grads[i].data;
    auto& m1 = state.first_moment[i].data;
    auto& m2 = state.second_moment[i].data;
    for (std::size_t k = 0; k < p.size(); ++k) {
      m1[k] = c.beta1 * m1[k] + (1.0 - c.beta1) * g[k];
      m2[k] = c.beta2 * m2[k] + (1.0 - c.beta2) * g[k] * g[k];
      double mhat = m1[k] / bc1;
      double vhat = m2[k] / bc2;
      p[k] -= lr * mhat / (std::sqrt(vhat) + c.epsilon);
    }
  }
}

// ---------------------------------------------------------------------------
// Training.

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  std::uint64_t seed = 42;
  AdamConfig adam;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainResult {
  CnnModel model;  // snapshot with the lowest validation loss
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;
};

// Tracks the best validation loss; stop() turns true after `patience`
// consecutive epochs without strict improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {
    if (patience < 1) throw Error("early-stopping patience must be at least 1");
  }

  // Returns true when `val_loss` is a new best.
  bool update(double val_loss) {
    if (val_loss < best_) {
      best_ = val_loss;
      stale_ = 0;
      return true;
    }
    ++stale_;
    return false;
  }

  bool stop() const { return stale_ >= patience_; }
  double best() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t stale_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

inline double evaluate_loss(const CnnModel& m, std::span<const SequenceInput> xs,
                            std::span<const std::size_t> ys, double* accuracy = nullptr) {
  auto probs = forward(m, xs, Mode::Eval);
  if (accuracy) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      auto best = static_cast<std::size_t>(std::max_element(probs[i].begin(), probs[i].end()) -
                                           probs[i].begin());
      hit += best == ys[i];
    }
    *accuracy = probs.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(probs.size());
  }
  return loss(probs, ys);
}

// Mini-batch Adam with a seeded shuffle per epoch and per-example dropout
// masks; returns the parameters of the epoch with the lowest validation loss.
inline TrainResult train_with_early_stopping(CnnModel model, std::span<const SequenceInput> train_x,
                                             std::span<const std::size_t> train_y,
                                             std::span<const SequenceInput> val_x,
                                             std::span<const std::size_t> val_y,
                                             const TrainConfig& config) {
  if (train_x.empty() || val_x.empty()) throw Error("training needs non-empty train and validation sets");
  if (train_x.size() != train_y.size() || val_x.size() != val_y.size())
    throw Error("training: input and label counts differ");
  if (config.batch_size < 1) throw Error("batch size must be at least 1");

  std::mt19937_64 rng(config.seed);
  AdamState adam = make_adam_state(model.params, config.adam);
  EarlyStopping stopper(config.patience);
  TrainResult result;
  result.model = model;

  std::vector<std::size_t> order(train_x.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<SequenceInput> bx;
  std::vector<std::size_t> by;
  std::vector<DropoutMask> bm;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    double train_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      std::size_t end = std::min(order.size(), start + config.batch_size);
      bx.clear();
      by.clear();
      bm.clear();
      for (std::size_t k = start; k < end; ++k) {
        bx.push_back(train_x[order[k]]);
        by.push_back(train_y[order[k]]);
        if (model.arch.dropout > 0.0) bm.push_back(sample_dropout_mask(model.arch, rng));
      }
      auto lg = backward(model, bx, by, bm);
      train_loss += lg.loss * static_cast<double>(end - start);
      adam_step(model.params, lg.gradients, adam);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train_loss / static_cast<double>(order.size());
    rec.val_loss = evaluate_loss(model, val_x, val_y, &rec.val_accuracy);
    result.log.push_back(rec);
    if (stopper.update(rec.val_loss)) {
      result.model = model;
      result.best_epoch = epoch;
    }
    if (stopper.stop()) break;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Serialization.

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json to_json(const CnnArchitecture& a) {
  return {{"embedding_dim", a.embedding_dim}, {"max_length", a.max_length},
          {"window_widths", a.window_widths}, {"filters", a.filters},
          {"hidden", a.hidden},               {"classes", a.classes},
          {"dropout", a.dropout},             {"activation", "selu"},
          {"pooling", "max"}};
}

inline nlohmann::json to_json(const CnnModel& m) {
  nlohmann::json tensors = nlohmann::json::array();
  for (std::size_t i = 0; i < m.params.size(); ++i)
    tensors.push_back({{"name", m.names[i]}, {"shape", m.params[i].shape}, {"data", m.params[i].data}});
  return {{"kind", "cnn"},
          {"version", kVersion},
          {"format_version", kModelFormatVersion},
          {"architecture", to_json(m.arch)},
          {"tensors", std::move(tensors)}};
}

inline CnnModel cnn_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "cnn") throw Error("not a CNN model file");
  if (j.at("format_version").get<int>() != kModelFormatVersion)
    throw Error("unsupported CNN model format version");
  const auto& ja = j.at("architecture");
  CnnArchitecture a;
  a.embedding_dim = ja.at("embedding_dim").get<std::size_t>();
  a.max_length = ja.at("max_length").get<std::size_t>();
  a.window_widths = ja.at("window_widths").get<std::vector<std::size_t>>();
  a.filters = ja.at("filters").get<std::size_t>();
  a.hidden = ja.at("hidden").get<std::size_t>();
  a.classes = ja.at("classes").get<std::size_t>();
  a.dropout = ja.at("dropout").get<double>();
  CnnModel m = make_model(a);
  const auto& jt = j.at("tensors");
  if (jt.size() != m.params.size()) throw Error("CNN model file has the wrong number of tensors");
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    if (jt[i].at("shape").get<std::vector<std::size_t>>() != m.params[i].shape)
      throw Error("CNN tensor " + m.names[i] + " has the wrong shape");
    auto data = jt[i].at("data").get<std::vector<double>>();
    if (data.size() != m.params[i].size())
      throw Error("CNN tensor " + m.names[i] + " has the wrong element count");
    m.params[i].data = std::move(data);
  }
  return m;
}

}  // namespace tweetpol::cnn
