#pragma once

// Masked multilayer perceptron.
//
// Weight layer l connects layer_sizes[l] (left / fan-in) to
// layer_sizes[l + 1] (right / fan-out). Its weights are a CsrMatrix whose
// pattern is the layer's BipartiteTopology, so row r holds the outgoing
// edges of input neuron r and the forward product is z = W^T a + b.
// Every unit, including the outputs, is a logistic sigmoid; the loss is the
// mean squared error over output units.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snn/dataset.hpp"
#include "snn/error.hpp"
#include "snn/linalg.hpp"
#include "snn/rng.hpp"
#include "snn/topology.hpp"

namespace snn {

enum class GlorotFans {
  FullLayer,     // fan_in / fan_out of the unmasked layer
  MaskedDegree,  // mean in/out degree of the masked pattern
};

struct NetworkConfig {
  std::vector<std::size_t> layer_sizes;
  std::vector<ConstructionSpec> topologies;  // one per weight layer
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::size_t epochs = 50;
  // Empty, or one drop probability per weight layer, applied to that layer's
  // input activations during training (entry 0 is the input layer).
  std::vector<double> dropout_rates;
  std::uint64_t init_seed = 0;
  GlorotFans glorot_fans = GlorotFans::FullLayer;

  std::size_t weight_layer_count() const noexcept { return layer_sizes.empty() ? 0 : layer_sizes.size() - 1; }
  double dropout_rate(std::size_t layer) const { return dropout_rates.empty() ? 0.0 : dropout_rates[layer]; }

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

inline void validate(const NetworkConfig& cfg) {
  if (cfg.layer_sizes.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two layer sizes");
  for (std::size_t s : cfg.layer_sizes)
    if (s < 1) throw Error(ErrorCode::InvalidArgument, "layer sizes must be positive");
  if (cfg.topologies.size() != cfg.weight_layer_count())
    throw Error(ErrorCode::DimensionMismatch, std::to_string(cfg.topologies.size()) + " topology specs for " +
                                                  std::to_string(cfg.weight_layer_count()) + " weight layers");
  if (!(cfg.learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning_rate must be positive");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) throw Error(ErrorCode::InvalidArgument, "momentum outside [0, 1)");
  if (cfg.batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  if (!cfg.dropout_rates.empty() && cfg.dropout_rates.size() != cfg.weight_layer_count())
    throw Error(ErrorCode::DimensionMismatch, "dropout_rates needs one entry per weight layer");
  for (double rate : cfg.dropout_rates)
    if (!(rate >= 0.0 && rate < 1.0)) throw Error(ErrorCode::InvalidArgument, "dropout rate outside [0, 1)");
}

struct SparseLayer {
  ConstructionSpec construction;
  CsrMatrix weights;  // fan_in x fan_out
  Vector bias;        // fan_out
  Vector weight_velocity;  // one per stored weight
  Vector bias_velocity;

  std::size_t fan_in() const noexcept { return weights.rows; }
  std::size_t fan_out() const noexcept { return weights.cols; }

  friend bool operator==(const SparseLayer&, const SparseLayer&) = default;
};

// The topology a layer was built from, recovered from its CSR pattern.
inline BipartiteTopology layer_topology(const SparseLayer& layer) {
  const auto& w = layer.weights;
  std::vector<std::vector<std::uint32_t>> rows(w.rows);
  for (std::size_t r = 0; r < w.rows; ++r)
    rows[r].assign(w.col_indices.begin() + static_cast<std::ptrdiff_t>(w.row_offsets[r]),
                   w.col_indices.begin() + static_cast<std::ptrdiff_t>(w.row_offsets[r + 1]));
  ConstructionSpec tag = layer.construction;
  if (tag.kind == ConstructionKind::FullyConnected) tag.k = w.cols;
  return from_rows(w.rows, w.cols, std::move(rows), tag);
}

struct Network {
  NetworkConfig config;
  std::vector<SparseLayer> layers;

  std::size_t input_size() const { return config.layer_sizes.front(); }
  std::size_t output_size() const { return config.layer_sizes.back(); }

  friend bool operator==(const Network&, const Network&) = default;
};

inline double sigmoid(double t) noexcept { return 1.0 / (1.0 + std::exp(-t)); }

namespace detail {
constexpr std::uint64_t kInitStream = 0x494E4954;     // "INIT"
constexpr std::uint64_t kShuffleStream = 0x53485546;  // "SHUF"
constexpr std::uint64_t kDropoutStream = 0x44524F50;  // "DROP"
}  // namespace detail

inline Network init_network(const NetworkConfig& cfg) {
  validate(cfg);
  Network net;
  net.config = cfg;
  for (std::size_t l = 0; l < cfg.weight_layer_count(); ++l) {
    const std::size_t fan_in = cfg.layer_sizes[l];
    const std::size_t fan_out = cfg.layer_sizes[l + 1];
    const BipartiteTopology topology = build(cfg.topologies[l], fan_in, fan_out);

    double fans = static_cast<double>(fan_in + fan_out);
    if (cfg.glorot_fans == GlorotFans::MaskedDegree && topology.edge_count() > 0) {
      const double edges = static_cast<double>(topology.edge_count());
      fans = edges / static_cast<double>(fan_out) + edges / static_cast<double>(fan_in);
    }
    const double sigma = std::sqrt(2.0 / fans);
    Rng rng(derive_seed(cfg.init_seed, {detail::kInitStream, l}));

    SparseLayer layer;
    layer.construction = cfg.topologies[l];
    if (layer.construction.kind == ConstructionKind::FullyConnected) layer.construction.k = fan_out;
    layer.weights = csr_from_topology(topology, [&] { return rng.normal(0.0, sigma); });
    layer.bias.assign(fan_out, 0.0);
    layer.weight_velocity.assign(layer.weights.nnz(), 0.0);
    layer.bias_velocity.assign(fan_out, 0.0);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

enum class Mode { Train, Eval };

// Per-sample forward state. activations[0] is the (possibly dropped) input,
// activations[l + 1] the (possibly dropped) output of weight layer l.
// outputs[l] holds sigmoid values before dropout, used for sigma'.
// masks[l] is the multiplier applied to activations[l] (empty when no dropout).
struct Activations {
  std::vector<Vector> activations;
  std::vector<Vector> outputs;
  std::vector<Vector> masks;

  std::span<const double> output() const { return activations.back(); }
};

namespace detail {

inline void apply_dropout(Vector& values, Vector& mask, double rate, Rng& rng) {
  mask.resize(values.size());
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < values.size(); ++i) {
    mask[i] = rng.bernoulli(rate) ? 0.0 : keep_scale;
    values[i] *= mask[i];
  }
}

inline void prepare(const Network& net, Activations& acts) {
  const std::size_t count = net.config.layer_sizes.size();
  acts.activations.resize(count);
  acts.outputs.resize(count);
  acts.masks.resize(count);
  for (std::size_t l = 0; l < count; ++l) {
    acts.activations[l].resize(net.config.layer_sizes[l]);
    acts.outputs[l].resize(net.config.layer_sizes[l]);
  }
}

}  // namespace detail

// Fills `acts` in place (buffers are reused across calls). Dropout is drawn
// from `dropout_rng` in Train mode; a null rng disables it.
inline void forward(const Network& net, std::span<const double> x, Mode mode, Rng* dropout_rng, Activations& acts) {
  if (x.size() != net.input_size())
    throw Error(ErrorCode::DimensionMismatch,
                "input has " + std::to_string(x.size()) + " values, network expects " + std::to_string(net.input_size()));
  detail::prepare(net, acts);
  const bool drop = mode == Mode::Train && dropout_rng != nullptr && !net.config.dropout_rates.empty();
  std::copy(x.begin(), x.end(), acts.outputs[0].begin());
  std::copy(x.begin(), x.end(), acts.activations[0].begin());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (drop && net.config.dropout_rate(l) > 0.0)
      detail::apply_dropout(acts.activations[l], acts.masks[l], net.config.dropout_rate(l), *dropout_rng);
    else
      acts.masks[l].clear();
    const SparseLayer& layer = net.layers[l];
    Vector& out = acts.outputs[l + 1];
    spmv_transpose(layer.weights, acts.activations[l], out);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = sigmoid(out[j] + layer.bias[j]);
    acts.activations[l + 1] = out;
  }
}

inline Activations forward(const Network& net, std::span<const double> x, Mode mode = Mode::Eval,
                           std::optional<std::uint64_t> dropout_seed = std::nullopt) {
  Activations acts;
  if (mode == Mode::Train && dropout_seed) {
    Rng rng(*dropout_seed);
    forward(net, x, mode, &rng, acts);
  } else {
    forward(net, x, mode, nullptr, acts);
  }
  return acts;
}

inline Vector predict(const Network& net, std::span<const double> x) {
  auto acts = forward(net, x, Mode::Eval);
  return std::move(acts.activations.back());
}

// Gradients laid out like the parameters: weights[l][e] pairs with
// layers[l].weights.values[e].
struct Gradients {
  std::vector<Vector> weights;
  std::vector<Vector> bias;

  static Gradients zeros_like(const Network& net) {
    Gradients g;
    for (const auto& layer : net.layers) {
      g.weights.emplace_back(layer.weights.nnz(), 0.0);
      g.bias.emplace_back(layer.fan_out(), 0.0);
    }
    return g;
  }

  void set_zero() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
  }
};

inline double mse(std::span<const double> output, std::span<const double> target) {
  double sum = 0.0;
  for (std::size_t c = 0; c < output.size(); ++c) sum += (output[c] - target[c]) * (output[c] - target[c]);
  return sum / static_cast<double>(output.size());
}

namespace detail {

struct BackwardBuffers {
  std::vector<Vector> deltas;  // dL/dz per weight layer
};

// Adds scale * dL/dtheta for one already-forwarded sample into `grads`.
// Weight gradients only exist at stored positions, so the mask holds by
// construction. Returns the sample loss.
inline double accumulate_gradients(const Network& net, const Activations& acts, std::span<const double> target,
                                   double scale, Gradients& grads, BackwardBuffers& buf) {
  const std::size_t depth = net.layers.size();
  const auto output = acts.output();
  if (target.size() != output.size())
    throw Error(ErrorCode::DimensionMismatch, "target has " + std::to_string(target.size()) + " values, output has " +
                                                  std::to_string(output.size()));
  buf.deltas.resize(depth);
  const double inv_classes = 1.0 / static_cast<double>(output.size());
  Vector& top = buf.deltas[depth - 1];
  top.resize(output.size());
  double loss = 0.0;
  for (std::size_t c = 0; c < output.size(); ++c) {
    const double diff = output[c] - target[c];
    loss += diff * diff;
    const double s = acts.outputs[depth][c];
    top[c] = 2.0 * diff * inv_classes * s * (1.0 - s);
  }
  loss *= inv_classes;

  for (std::size_t l = depth; l-- > 0;) {
    const SparseLayer& layer = net.layers[l];
    const Vector& delta = buf.deltas[l];
    auto& gw = grads.weights[l];
    auto& gb = grads.bias[l];
    for (std::size_t j = 0; j < delta.size(); ++j) gb[j] += scale * delta[j];

    // gw[r, c] += scale * a[r] * delta[c] over stored (r, c).
    const auto& w = layer.weights;
    const Vector& a = acts.activations[l];
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double ar = scale * a[r];
      if (ar == 0.0) continue;
      for (std::size_t e = w.row_offsets[r]; e < w.row_offsets[r + 1]; ++e) gw[e] += ar * delta[w.col_indices[e]];
    }

    if (l == 0) break;
    Vector& below = buf.deltas[l - 1];
    below.resize(w.rows);
    spmv(w, delta, below);
    const Vector& s = acts.outputs[l];
    const Vector& mask = acts.masks[l];
    for (std::size_t r = 0; r < below.size(); ++r) {
      double d = below[r] * s[r] * (1.0 - s[r]);
      if (!mask.empty()) d *= mask[r];
      below[r] = d;
    }
  }
  return loss;
}

}  // namespace detail

struct SampleGradient {
  double loss = 0.0;
  Gradients grads;
};

// Loss and parameter gradients for one sample. Eval mode (no dropout) unless
// a dropout seed is given.
inline SampleGradient backward(const Network& net, std::span<const double> x, std::span<const double> target,
                               std::optional<std::uint64_t> dropout_seed = std::nullopt) {
  Activations acts;
  if (dropout_seed) {
    Rng rng(*dropout_seed);
    forward(net, x, Mode::Train, &rng, acts);
  } else {
    forward(net, x, Mode::Eval, nullptr, acts);
  }
  SampleGradient out{0.0, Gradients::zeros_like(net)};
  detail::BackwardBuffers buf;
  out.loss = detail::accumulate_gradients(net, acts, target, 1.0, out.grads, buf);
  return out;
}

inline double sample_loss(const Network& net, std::span<const double> x, std::span<const double> target) {
  Activations acts;
  forward(net, x, Mode::Eval, nullptr, acts);
  if (target.size() != acts.output().size()) throw Error(ErrorCode::DimensionMismatch, "target size");
  return mse(acts.output(), target);
}

struct Example {
  std::span<const double> x;
  std::span<const double> target;
};

// Minibatch SGD with Nesterov momentum, lookahead form:
//   g = mean over batch of grad L(theta + mu * v)
//   v <- mu * v - eta * g
//   theta <- theta + v
// Holds scratch buffers so repeated steps do not allocate.
class NesterovSgd {
 public:
  explicit NesterovSgd(const Network& net) : lookahead_(net), grads_(Gradients::zeros_like(net)) {}

  // Returns the mean loss over the batch, measured at the lookahead point.
  double step(Network& net, std::span<const Example> batch, Rng* dropout_rng = nullptr) {
    if (batch.empty()) throw Error(ErrorCode::InvalidArgument, "empty batch");
    const double mu = net.config.momentum;
    const double eta = net.config.learning_rate;

    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const auto& layer = net.layers[l];
      auto& look = lookahead_.layers[l];
      for (std::size_t e = 0; e < layer.weights.values.size(); ++e)
        look.weights.values[e] = layer.weights.values[e] + mu * layer.weight_velocity[e];
      for (std::size_t j = 0; j < layer.bias.size(); ++j) look.bias[j] = layer.bias[j] + mu * layer.bias_velocity[j];
    }
    lookahead_.config.dropout_rates = net.config.dropout_rates;

    grads_.set_zero();
    const double scale = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (const Example& ex : batch) {
      forward(lookahead_, ex.x, Mode::Train, dropout_rng, acts_);
      loss += detail::accumulate_gradients(lookahead_, acts_, ex.target, scale, grads_, buffers_);
    }

    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      auto& layer = net.layers[l];
      const auto& gw = grads_.weights[l];
      const auto& gb = grads_.bias[l];
      for (std::size_t e = 0; e < layer.weights.values.size(); ++e) {
        layer.weight_velocity[e] = mu * layer.weight_velocity[e] - eta * gw[e];
        layer.weights.values[e] += layer.weight_velocity[e];
      }
      for (std::size_t j = 0; j < layer.bias.size(); ++j) {
        layer.bias_velocity[j] = mu * layer.bias_velocity[j] - eta * gb[j];
        layer.bias[j] += layer.bias_velocity[j];
      }
    }
    return loss * scale;
  }

 private:
  Network lookahead_;
  Gradients grads_;
  Activations acts_;
  detail::BackwardBuffers buffers_;
};

inline double sgd_nesterov_step(Network& net, std::span<const Example> batch, Rng* dropout_rng = nullptr) {
  NesterovSgd opt(net);
  return opt.step(net, batch, dropout_rng);
}

// Index of the largest output; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

inline double evaluate(const Network& net, const Dataset& test) {
  if (test.empty()) throw Error(ErrorCode::InvalidArgument, "empty test set");
  if (test.input_dim != net.input_size()) throw Error(ErrorCode::DimensionMismatch, "test set input size");
  Activations acts;
  std::size_t correct = 0;
  for (std::size_t s = 0; s < test.size(); ++s) {
    forward(net, test.sample(s), Mode::Eval, nullptr, acts);
    if (argmax(acts.output()) == test.labels[s]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

struct WeightStats {
  double max = 0.0;
  double min = 0.0;
  double std = 0.0;  // population convention
  std::size_t count = 0;

  friend bool operator==(const WeightStats&, const WeightStats&) = default;
};

inline WeightStats weight_statistics(std::span<const double> values) {
  WeightStats st;
  st.count = values.size();
  if (values.empty()) return st;
  st.max = *std::max_element(values.begin(), values.end());
  st.min = *std::min_element(values.begin(), values.end());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  st.std = std::sqrt(sq / static_cast<double>(values.size()));
  return st;
}

inline std::vector<WeightStats> weight_statistics(const Network& net) {
  std::vector<WeightStats> stats;
  for (const auto& layer : net.layers) stats.push_back(weight_statistics(layer.weights.values));
  return stats;
}

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double test_accuracy = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainRecord {
  double initial_accuracy = 0.0;
  std::vector<EpochRecord> epochs;
  std::vector<WeightStats> weight_stats;
  double wall_seconds = 0.0;

  double final_accuracy() const { return epochs.empty() ? initial_accuracy : epochs.back().test_accuracy; }
};

// Deterministic per-epoch sample order: Fisher-Yates seeded from
// (init_seed, epoch).
inline std::vector<std::size_t> epoch_permutation(std::size_t count, std::uint64_t init_seed, std::size_t epoch) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(init_seed, {detail::kShuffleStream, epoch}));
  rng.shuffle(std::span<std::size_t>(order));
  return order;
}

using EpochCallback = std::function<void(const EpochRecord&)>;

// Runs net.config.epochs epochs of shuffled minibatch training, evaluating
// on `test` before training and after every epoch. The final short batch of
// an epoch is kept.
inline TrainRecord train(Network& net, const Dataset& train_set, const Dataset& test_set,
                         const EpochCallback& on_epoch = {}) {
  if (train_set.empty() || test_set.empty()) throw Error(ErrorCode::InvalidArgument, "empty dataset");
  if (train_set.input_dim != net.input_size() || test_set.input_dim != net.input_size())
    throw Error(ErrorCode::DimensionMismatch, "dataset input size does not match the network");
  if (train_set.class_count != net.output_size() || test_set.class_count != net.output_size())
    throw Error(ErrorCode::DimensionMismatch, "dataset class count does not match the network");

  const auto start = std::chrono::steady_clock::now();
  const NetworkConfig& cfg = net.config;
  TrainRecord record;
  record.initial_accuracy = evaluate(net, test_set);

  std::vector<Vector> targets;
  for (std::size_t c = 0; c < train_set.class_count; ++c) targets.push_back(one_hot(c, train_set.class_count));

  NesterovSgd opt(net);
  std::vector<Example> batch;
  batch.reserve(cfg.batch_size);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = epoch_permutation(train_set.size(), cfg.init_seed, epoch);
    Rng dropout_rng(derive_seed(cfg.init_seed, {detail::kDropoutStream, epoch}));
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      batch.clear();
      for (std::size_t i = begin; i < end; ++i)
        batch.push_back({train_set.sample(order[i]), targets[train_set.labels[order[i]]]});
      loss_sum += opt.step(net, batch, &dropout_rng) * static_cast<double>(batch.size());
    }
    EpochRecord rec{epoch, loss_sum / static_cast<double>(train_set.size()), evaluate(net, test_set)};
    record.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  record.weight_stats = weight_statistics(net);
  record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

}  // namespace snn
