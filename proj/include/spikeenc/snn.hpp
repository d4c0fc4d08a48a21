#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spikeenc/core.hpp"
#include "spikeenc/io.hpp"

namespace spikeenc {

// Dense spiking network of integrate-and-fire neurons. Every neuron adds its
// weighted input plus bias to the membrane each step, fires when the membrane
// reaches its layer threshold and subtracts the threshold on a spike. The
// output layer's spike counts over T steps are the class scores.

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct DenseLayer {
  MatrixX<Scalar> weights;  // outputs x inputs
  VectorX<Scalar> bias;
  Scalar threshold = Scalar(1);

  Eigen::Index inputs() const { return weights.cols(); }
  Eigen::Index outputs() const { return weights.rows(); }
};

template <typename Scalar = double>
struct SnnModel {
  std::vector<DenseLayer<Scalar>> layers;
  Scalar surrogate_slope = Scalar(1);

  int input_size() const { return layers.empty() ? 0 : static_cast<int>(layers.front().inputs()); }
  int class_count() const { return layers.empty() ? 0 : static_cast<int>(layers.back().outputs()); }
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
  }

  void validate() const {
    if (layers.empty()) throw Error(ErrorCode::InvalidArgument, "model has no layers");
    if (!(surrogate_slope > 0)) throw Error(ErrorCode::InvalidArgument, "surrogate slope must be positive");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      if (l.bias.size() != l.outputs()) throw Error(ErrorCode::ShapeMismatch, "bias size != layer outputs");
      if (i > 0 && l.inputs() != layers[i - 1].outputs())
        throw Error(ErrorCode::ShapeMismatch, "adjacent layer dimensions differ");
      if (!(l.threshold > 0)) throw Error(ErrorCode::InvalidArgument, "layer thresholds must be positive");
      if (!l.weights.allFinite() || !l.bias.allFinite())
        throw Error(ErrorCode::InvalidArgument, "non-finite weights");
    }
  }

  /// Uniform(-a, a) weights with a = gain * sqrt(3 / fan_in), zero biases.
  static SnnModel initialized(std::span<const int> sizes, std::uint64_t seed, Scalar threshold = Scalar(1),
                              Scalar slope = Scalar(1), Scalar gain = Scalar(1)) {
    if (sizes.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least input and output sizes");
    SnnModel model;
    model.surrogate_slope = slope;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 1; i < sizes.size(); ++i) {
      if (sizes[i - 1] < 1 || sizes[i] < 1) throw Error(ErrorCode::InvalidArgument, "layer sizes must be positive");
      const double bound = static_cast<double>(gain) * std::sqrt(3.0 / sizes[i - 1]);
      std::uniform_real_distribution<double> dist(-bound, bound);
      DenseLayer<Scalar> layer;
      layer.weights.resize(sizes[i], sizes[i - 1]);
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) layer.weights(r, c) = Scalar(dist(rng));
      layer.bias = VectorX<Scalar>::Zero(sizes[i]);
      layer.threshold = threshold;
      model.layers.push_back(std::move(layer));
    }
    return model;
  }
};

/// Hard: spike = [U >= theta]. Relaxed: spike = clamp(slope (U - theta) + 1/2, 0, 1),
/// the function whose derivative is the rectangular surrogate; used to check
/// gradients against finite differences.
enum class FiringMode { Hard, Relaxed };

/// One sample: inputSize x T matrix of input spikes (column t = step t).
template <typename Scalar>
struct SpikeSample {
  MatrixX<Scalar> frames;
  int label = 0;
};

template <typename Scalar>
using SpikeDataset = std::vector<SpikeSample<Scalar>>;

/// Flattens a spike tensor to inputSize x T with row index (c * H + y) * W + x.
template <typename Scalar>
MatrixX<Scalar> to_frames(const SpikeTensor& spikes) {
  const Eigen::Index frame = static_cast<Eigen::Index>(spikes.pixels_per_frame());
  MatrixX<Scalar> out(frame * spikes.channels(), spikes.time_steps());
  const auto bits = spikes.bits();
  for (int c = 0; c < spikes.channels(); ++c)
    for (int t = 0; t < spikes.time_steps(); ++t)
      for (Eigen::Index i = 0; i < frame; ++i)
        out(c * frame + i, t) = Scalar(bits[spikes.index(c, t, 0, 0) + static_cast<std::size_t>(i)]);
  return out;
}

template <typename Scalar>
Scalar surrogate_derivative(Scalar membrane, Scalar threshold, Scalar slope) {
  return std::abs(membrane - threshold) <= Scalar(0.5) / slope ? slope : Scalar(0);
}

namespace detail {

template <typename Scalar>
struct ForwardTrace {
  // [layer][t], each outputs x batch
  std::vector<std::vector<MatrixX<Scalar>>> membrane;  // before firing
  std::vector<std::vector<MatrixX<Scalar>>> spikes;
  MatrixX<Scalar> counts;  // classes x batch
};

template <typename Scalar>
void check_input(const SnnModel<Scalar>& model, const MatrixX<Scalar>& frames) {
  if (frames.rows() != model.input_size())
    throw Error(ErrorCode::ShapeMismatch, "input has " + std::to_string(frames.rows()) +
                                              " neurons, model expects " + std::to_string(model.input_size()));
  if (frames.cols() < 1) throw Error(ErrorCode::ShapeMismatch, "input has no time steps");
}

template <typename Scalar>
ForwardTrace<Scalar> run(const SnnModel<Scalar>& model, std::span<const SpikeSample<Scalar>* const> batch,
                         FiringMode mode, bool keep_trace) {
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index steps = batch.front()->frames.cols();
  for (const auto* sample : batch) {
    check_input(model, sample->frames);
    if (sample->frames.cols() != steps) throw Error(ErrorCode::ShapeMismatch, "batch mixes time-step counts");
  }
  const std::size_t depth = model.layers.size();
  ForwardTrace<Scalar> trace;
  if (keep_trace) {
    trace.membrane.assign(depth, std::vector<MatrixX<Scalar>>(static_cast<std::size_t>(steps)));
    trace.spikes.assign(depth, std::vector<MatrixX<Scalar>>(static_cast<std::size_t>(steps)));
  }
  std::vector<MatrixX<Scalar>> membrane(depth);
  for (std::size_t l = 0; l < depth; ++l) membrane[l] = MatrixX<Scalar>::Zero(model.layers[l].outputs(), b);
  trace.counts = MatrixX<Scalar>::Zero(model.class_count(), b);

  MatrixX<Scalar> input(model.input_size(), b);
  const Scalar slope = model.surrogate_slope;
  for (Eigen::Index t = 0; t < steps; ++t) {
    for (Eigen::Index j = 0; j < b; ++j) input.col(j) = batch[static_cast<std::size_t>(j)]->frames.col(t);
    MatrixX<Scalar> x = input;
    for (std::size_t l = 0; l < depth; ++l) {
      const auto& layer = model.layers[l];
      auto& u = membrane[l];
      u.noalias() += layer.weights * x;
      u.colwise() += layer.bias;
      MatrixX<Scalar> s;
      if (mode == FiringMode::Hard) {
        s = (u.array() >= layer.threshold).template cast<Scalar>().matrix();
      } else {
        s = (slope * (u.array() - layer.threshold) + Scalar(0.5)).max(Scalar(0)).min(Scalar(1)).matrix();
      }
      if (keep_trace) {
        trace.membrane[l][static_cast<std::size_t>(t)] = u;
        trace.spikes[l][static_cast<std::size_t>(t)] = s;
      }
      u -= layer.threshold * s;
      x = std::move(s);
    }
    trace.counts += x;
  }
  return trace;
}

template <typename Scalar>
int argmax_lowest(const Eigen::Ref<const VectorX<Scalar>>& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = static_cast<int>(i);
  return best;
}

}  // namespace detail

/// Per-class output spike counts for one sample.
template <typename Scalar>
VectorX<Scalar> forward(const SnnModel<Scalar>& model, const MatrixX<Scalar>& frames,
                        FiringMode mode = FiringMode::Hard) {
  model.validate();
  const SpikeSample<Scalar> sample{frames, 0};
  const SpikeSample<Scalar>* ptr = &sample;
  return detail::run(model, std::span<const SpikeSample<Scalar>* const>(&ptr, 1), mode, false).counts.col(0);
}

/// Argmax of the hard-mode class counts, ties to the lowest index.
template <typename Scalar>
int predict(const SnnModel<Scalar>& model, const MatrixX<Scalar>& frames) {
  return detail::argmax_lowest<Scalar>(forward(model, frames, FiringMode::Hard));
}

template <typename Scalar>
struct Gradients {
  std::vector<MatrixX<Scalar>> weights;
  std::vector<VectorX<Scalar>> bias;
};

template <typename Scalar>
struct LossAndGrad {
  Scalar loss = 0;
  Gradients<Scalar> grad;
  int correct = 0;  // argmax hits within the batch
};

/// Softmax cross-entropy of a count vector against a label.
template <typename Scalar>
Scalar cross_entropy(const Eigen::Ref<const VectorX<Scalar>>& logits, int label) {
  const Scalar peak = logits.maxCoeff();
  const Scalar log_sum = peak + std::log((logits.array() - peak).exp().sum());
  return log_sum - logits[label];
}

/// Mean softmax cross-entropy over the batch and its gradient by
/// backpropagation through time. The firing nonlinearity's derivative is the
/// rectangular surrogate (slope within 1/(2 slope) of threshold, else 0), and
/// the reset subtraction stays in the graph.
template <typename Scalar>
LossAndGrad<Scalar> loss_and_grad(const SnnModel<Scalar>& model,
                                  std::span<const SpikeSample<Scalar>* const> batch,
                                  FiringMode mode = FiringMode::Hard) {
  model.validate();
  if (batch.empty()) throw Error(ErrorCode::EmptyDataset, "empty batch");
  for (const auto* sample : batch)
    if (sample->label < 0 || sample->label >= model.class_count())
      throw Error(ErrorCode::ShapeMismatch, "label outside the model's classes");

  const auto trace = detail::run(model, batch, mode, true);
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index steps = batch.front()->frames.cols();
  const std::size_t depth = model.layers.size();
  const Scalar slope = model.surrogate_slope;

  LossAndGrad<Scalar> out;
  MatrixX<Scalar> d_counts(model.class_count(), b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const VectorX<Scalar> logits = trace.counts.col(j);
    const int label = batch[static_cast<std::size_t>(j)]->label;
    out.loss += cross_entropy<Scalar>(logits, label);
    if (detail::argmax_lowest<Scalar>(logits) == label) ++out.correct;
    VectorX<Scalar> p = (logits.array() - logits.maxCoeff()).exp().matrix();
    p /= p.sum();
    p[label] -= Scalar(1);
    d_counts.col(j) = p / Scalar(b);
  }
  out.loss /= Scalar(b);

  out.grad.weights.resize(depth);
  out.grad.bias.resize(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    out.grad.weights[l] = MatrixX<Scalar>::Zero(model.layers[l].outputs(), model.layers[l].inputs());
    out.grad.bias[l] = VectorX<Scalar>::Zero(model.layers[l].outputs());
  }

  // Gradient reaching each layer's spikes at every step, filled top-down.
  std::vector<MatrixX<Scalar>> d_spikes(static_cast<std::size_t>(steps), d_counts);
  std::vector<MatrixX<Scalar>> inputs(static_cast<std::size_t>(steps), MatrixX<Scalar>(model.input_size(), b));
  for (Eigen::Index t = 0; t < steps; ++t)
    for (Eigen::Index j = 0; j < b; ++j)
      inputs[static_cast<std::size_t>(t)].col(j) = batch[static_cast<std::size_t>(j)]->frames.col(t);

  for (std::size_t li = depth; li-- > 0;) {
    const auto& layer = model.layers[li];
    const auto& layer_in = li == 0 ? inputs : trace.spikes[li - 1];
    MatrixX<Scalar> d_post = MatrixX<Scalar>::Zero(layer.outputs(), b);  // dL/dU after reset, from step t+1
    std::vector<MatrixX<Scalar>> d_below(li == 0 ? 0 : static_cast<std::size_t>(steps));
    for (Eigen::Index t = steps; t-- > 0;) {
      const auto ts = static_cast<std::size_t>(t);
      const auto& u = trace.membrane[li][ts];
      const MatrixX<Scalar> sg = u.unaryExpr([&](Scalar v) { return surrogate_derivative(v, layer.threshold, slope); });
      // U_post = U - theta S(U):  dL/dU = dL/dS S' + dL/dU_post (1 - theta S')
      MatrixX<Scalar> d_pre = d_spikes[ts].cwiseProduct(sg) +
                              d_post.cwiseProduct((Scalar(1) - layer.threshold * sg.array()).matrix());
      out.grad.weights[li].noalias() += d_pre * layer_in[ts].transpose();
      out.grad.bias[li] += d_pre.rowwise().sum();
      if (li > 0) d_below[ts].noalias() = layer.weights.transpose() * d_pre;
      d_post = std::move(d_pre);
    }
    if (li > 0) d_spikes = std::move(d_below);
  }
  return out;
}

template <typename Scalar>
LossAndGrad<Scalar> loss_and_grad(const SnnModel<Scalar>& model, const SpikeDataset<Scalar>& batch,
                                  FiringMode mode = FiringMode::Hard) {
  std::vector<const SpikeSample<Scalar>*> ptrs;
  for (const auto& s : batch) ptrs.push_back(&s);
  return loss_and_grad(model, std::span<const SpikeSample<Scalar>* const>(ptrs), mode);
}

struct TrainConfig {
  double learning_rate = 0.002;
  int epochs = 20;
  int batch_size = 32;
  std::uint64_t seed = 1;
  int time_steps = 32;

  void validate() const {
    if (!(learning_rate > 0)) throw Error(ErrorCode::InvalidArgument, "learning rate must be positive");
    if (epochs < 0) throw Error(ErrorCode::InvalidArgument, "epochs must be >= 0");
    if (batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch size must be >= 1");
    if (time_steps < 1) throw Error(ErrorCode::InvalidArgument, "time steps must be >= 1");
  }
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;  // training accuracy seen during the epoch
};

/// Plain minibatch SGD with a fixed learning rate. Sample order is reshuffled
/// every epoch from a generator seeded with config.seed.
template <typename Scalar>
std::vector<EpochRecord> train(SnnModel<Scalar>& model, const SpikeDataset<Scalar>& data, const TrainConfig& config) {
  config.validate();
  model.validate();
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "no training samples");
  if (static_cast<std::size_t>(config.batch_size) > data.size())
    throw Error(ErrorCode::InvalidArgument, "batch size exceeds dataset size");
  for (const auto& s : data)
    if (s.label < 0 || s.label >= model.class_count())
      throw Error(ErrorCode::BadLabel, "label outside the model's classes");

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<EpochRecord> history;
  std::vector<const SpikeSample<Scalar>*> batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int correct = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(&data[order[k]]);
      const auto result = loss_and_grad(model, std::span<const SpikeSample<Scalar>* const>(batch));
      loss_sum += static_cast<double>(result.loss) * static_cast<double>(batch.size());
      correct += result.correct;
      const Scalar lr = Scalar(config.learning_rate);
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        model.layers[l].weights -= lr * result.grad.weights[l];
        model.layers[l].bias -= lr * result.grad.bias[l];
      }
    }
    history.push_back({epoch + 1, loss_sum / static_cast<double>(data.size()),
                       static_cast<double>(correct) / static_cast<double>(data.size())});
  }
  return history;
}

/// Fraction of samples whose predicted class equals the label.
template <typename Scalar>
double evaluate(const SnnModel<Scalar>& model, const SpikeDataset<Scalar>& data) {
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "no evaluation samples");
  model.validate();
  std::size_t correct = 0;
  constexpr std::size_t chunk = 64;
  std::vector<const SpikeSample<Scalar>*> batch;
  for (std::size_t start = 0; start < data.size(); start += chunk) {
    batch.clear();
    for (std::size_t k = start; k < std::min(data.size(), start + chunk); ++k) batch.push_back(&data[k]);
    const auto trace = detail::run(model, std::span<const SpikeSample<Scalar>* const>(batch), FiringMode::Hard, false);
    for (std::size_t j = 0; j < batch.size(); ++j)
      if (detail::argmax_lowest<Scalar>(trace.counts.col(static_cast<Eigen::Index>(j))) == batch[j]->label)
        ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

// --- desk-scale protocol ----------------------------------------------------

/// Encodes labelled images with the photoreceptor layer. For the rate codec
/// every image gets its own generator seed derived from (config.seed, index).
template <typename Scalar>
SpikeDataset<Scalar> encode_dataset(std::span<const LabeledImage> images, ChannelSet set,
                                    const EncoderConfig& config);

std::uint64_t derive_item_seed(std::uint64_t seed, std::size_t index);

/// Grayscale-and-downsample preprocessing: luminance, then 2x2 mean.
std::vector<LabeledImage> prepare_desk_images(std::span<const LabeledImage> images, bool grayscale, bool downsample);

struct ComparisonSetup {
  ChannelSet channels = ChannelSet::Gray;
  EncoderConfig encoder;            // codec and seed are overridden per row / seed
  std::vector<int> hidden = {128};  // hidden layer widths
  double init_gain = 1.5;
  double surrogate_slope = 0.25;
  TrainConfig train;                // seed overridden per run
};

struct CodecComparisonRow {
  Codec codec = Codec::If;
  std::vector<std::uint64_t> seeds;
  std::vector<double> accuracies;
  double mean = 0.0;
  double stddev = 0.0;
};

/// Trains and tests one network per (codec, seed) with identical architecture,
/// hyperparameters and per-seed initialization; only the encoder differs.
std::vector<CodecComparisonRow> compare_codecs(std::span<const LabeledImage> train_images,
                                               std::span<const LabeledImage> test_images,
                                               std::span<const Codec> codecs, std::span<const std::uint64_t> seeds,
                                               const ComparisonSetup& setup);

std::string comparison_csv(std::span<const CodecComparisonRow> rows);
std::string history_csv(std::span<const EpochRecord> history);

// --- checkpoint ("SNN1") ------------------------------------------------------

/// Little-endian: "SNN1", u16 version, u32 layer count, f64 surrogate slope,
/// then per layer u32 inputs, u32 outputs, f64 threshold, outputs x inputs
/// f64 weights (row-major), outputs f64 biases.
Bytes save_checkpoint(const SnnModel<double>& model);
SnnModel<double> load_checkpoint(std::span<const std::uint8_t> bytes);

extern template SpikeDataset<double> encode_dataset<double>(std::span<const LabeledImage>, ChannelSet,
                                                            const EncoderConfig&);
extern template SpikeDataset<float> encode_dataset<float>(std::span<const LabeledImage>, ChannelSet,
                                                          const EncoderConfig&);

}  // namespace spikeenc
