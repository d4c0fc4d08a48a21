#include "spikeenc/snn.hpp"

#include <cstring>
#include <sstream>

#include "spikeenc/photoreceptor.hpp"

namespace spikeenc {

std::uint64_t derive_item_seed(std::uint64_t seed, std::size_t index) {
  std::uint64_t z = seed ^ (0xD1B54A32D192ED03ull * (static_cast<std::uint64_t>(index) + 1));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

template <typename Scalar>
SpikeDataset<Scalar> encode_dataset(std::span<const LabeledImage> images, ChannelSet set,
                                    const EncoderConfig& config) {
  SpikeDataset<Scalar> data;
  data.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    EncoderConfig item = config;
    if (config.codec == Codec::Rate) item.seed = derive_item_seed(config.seed, i);
    data.push_back({to_frames<Scalar>(encode_photoreceptor(images[i].image, set, item)), images[i].label});
  }
  return data;
}

template SpikeDataset<double> encode_dataset<double>(std::span<const LabeledImage>, ChannelSet,
                                                     const EncoderConfig&);
template SpikeDataset<float> encode_dataset<float>(std::span<const LabeledImage>, ChannelSet, const EncoderConfig&);

std::vector<LabeledImage> prepare_desk_images(std::span<const LabeledImage> images, bool grayscale,
                                              bool downsample) {
  std::vector<LabeledImage> out;
  out.reserve(images.size());
  for (const auto& item : images) {
    RawImage image = grayscale ? to_grayscale(item.image) : item.image;
    if (downsample) image = downsample_2x(image);
    out.push_back({std::move(image), item.label});
  }
  return out;
}

std::vector<CodecComparisonRow> compare_codecs(std::span<const LabeledImage> train_images,
                                               std::span<const LabeledImage> test_images,
                                               std::span<const Codec> codecs, std::span<const std::uint64_t> seeds,
                                               const ComparisonSetup& setup) {
  if (codecs.empty() || seeds.empty())
    throw Error(ErrorCode::InvalidArgument, "comparison needs at least one codec and one seed");
  if (train_images.empty() || test_images.empty()) throw Error(ErrorCode::EmptyDataset, "empty train or test set");

  int classes = 2;
  for (const auto& item : train_images) classes = std::max(classes, item.label + 1);
  for (const auto& item : test_images) classes = std::max(classes, item.label + 1);

  const auto& probe = train_images.front().image;
  const int input_size =
      probe.width() * probe.height() * channel_count(setup.channels);
  std::vector<int> sizes{input_size};
  sizes.insert(sizes.end(), setup.hidden.begin(), setup.hidden.end());
  sizes.push_back(classes);

  std::vector<CodecComparisonRow> rows;
  for (const Codec codec : codecs) {
    CodecComparisonRow row;
    row.codec = codec;
    for (const std::uint64_t seed : seeds) {
      EncoderConfig enc = setup.encoder;
      enc.codec = codec;
      enc.time_steps = setup.train.time_steps;
      enc.seed = seed;
      const auto train_set = encode_dataset<double>(train_images, setup.channels, enc);
      enc.seed = derive_item_seed(seed, ~std::size_t{0});
      const auto test_set = encode_dataset<double>(test_images, setup.channels, enc);

      auto model = SnnModel<double>::initialized(sizes, seed, 1.0, setup.surrogate_slope, setup.init_gain);
      TrainConfig tc = setup.train;
      tc.seed = seed;
      train(model, train_set, tc);
      row.seeds.push_back(seed);
      row.accuracies.push_back(evaluate(model, test_set));
    }
    const double n = static_cast<double>(row.accuracies.size());
    row.mean = std::accumulate(row.accuracies.begin(), row.accuracies.end(), 0.0) / n;
    double ss = 0.0;
    for (double a : row.accuracies) ss += (a - row.mean) * (a - row.mean);
    row.stddev = row.accuracies.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string comparison_csv(std::span<const CodecComparisonRow> rows) {
  std::ostringstream csv;
  csv << "codec,seeds,mean_accuracy,stddev_accuracy,per_seed_accuracy\n";
  for (const auto& row : rows) {
    csv << to_string(row.codec) << ',';
    for (std::size_t i = 0; i < row.seeds.size(); ++i) csv << (i ? ";" : "") << row.seeds[i];
    csv << ',' << row.mean << ',' << row.stddev << ',';
    for (std::size_t i = 0; i < row.accuracies.size(); ++i) csv << (i ? ";" : "") << row.accuracies[i];
    csv << '\n';
  }
  return csv.str();
}

std::string history_csv(std::span<const EpochRecord> history) {
  std::ostringstream csv;
  csv << "epoch,loss,accuracy\n";
  for (const auto& r : history) csv << r.epoch << ',' << r.loss << ',' << r.accuracy << '\n';
  return csv.str();
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::uint8_t kSnnMagic[4] = {'S', 'N', 'N', '1'};
constexpr std::uint16_t kSnnVersion = 1;

template <typename T>
void put_le(Bytes& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

void put_f64(Bytes& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  put_le(out, bits);
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T le() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return value;
  }
  double f64() {
    const auto bits = le<std::uint64_t>();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::LengthMismatch, "checkpoint truncated");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Bytes save_checkpoint(const SnnModel<double>& model) {
  model.validate();
  Bytes out(std::begin(kSnnMagic), std::end(kSnnMagic));
  put_le<std::uint16_t>(out, kSnnVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.layers.size()));
  put_f64(out, model.surrogate_slope);
  for (const auto& layer : model.layers) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(layer.inputs()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(layer.outputs()));
    put_f64(out, layer.threshold);
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) put_f64(out, layer.weights(r, c));
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) put_f64(out, layer.bias[r]);
  }
  return out;
}

SnnModel<double> load_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(std::begin(kSnnMagic), std::end(kSnnMagic), bytes.begin()))
    throw Error(ErrorCode::BadMagic, "not an SNN1 checkpoint");
  Reader in(bytes.subspan(4));
  if (const auto version = in.le<std::uint16_t>(); version != kSnnVersion)
    throw Error(ErrorCode::VersionMismatch, "checkpoint version " + std::to_string(version));
  const auto count = in.le<std::uint32_t>();
  SnnModel<double> model;
  model.surrogate_slope = in.f64();
  for (std::uint32_t l = 0; l < count; ++l) {
    const auto inputs = in.le<std::uint32_t>();
    const auto outputs = in.le<std::uint32_t>();
    if (inputs == 0 || outputs == 0 || static_cast<std::uint64_t>(inputs) * outputs > (1ull << 28))
      throw Error(ErrorCode::MalformedHeader, "implausible layer dimensions");
    DenseLayer<double> layer;
    layer.threshold = in.f64();
    layer.weights.resize(outputs, inputs);
    layer.bias.resize(outputs);
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = in.f64();
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = in.f64();
    model.layers.push_back(std::move(layer));
  }
  if (!in.done()) throw Error(ErrorCode::LengthMismatch, "trailing bytes after checkpoint");
  model.validate();
  return model;
}

}  // namespace spikeenc
