#include "spikeenc/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

namespace spikeenc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotColor: return "NotColor";
    case ErrorCode::MultipleSpikes: return "MultipleSpikes";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::UnsupportedMaxval: return "UnsupportedMaxval";
    case ErrorCode::BadRecordCount: return "BadRecordCount";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

constexpr std::array<std::string_view, 4> kCodecNames = {"if", "lif", "rate", "ttfs"};
constexpr std::array<std::string_view, 6> kSetNames = {"gray", "rgb", "rgbl", "lms", "lab", "yuv"};
constexpr std::array<std::string_view, kChannelLabelCount> kLabelNames = {
    "GRAY", "R", "G", "B", "L", "Lcone", "Mcone", "Scone", "Lab_L", "Lab_a", "Lab_b", "Y", "U", "V"};

}  // namespace

std::string_view to_string(Codec codec) { return kCodecNames.at(static_cast<std::size_t>(codec)); }
std::string_view to_string(ChannelSet set) { return kSetNames.at(static_cast<std::size_t>(set)); }
std::string_view to_string(ChannelLabel label) {
  return kLabelNames.at(static_cast<std::size_t>(label));
}

std::optional<Codec> parse_codec(std::string_view text) {
  for (std::size_t i = 0; i < kCodecNames.size(); ++i)
    if (kCodecNames[i] == text) return static_cast<Codec>(i);
  return std::nullopt;
}

std::optional<ChannelSet> parse_channel_set(std::string_view text) {
  for (std::size_t i = 0; i < kSetNames.size(); ++i)
    if (kSetNames[i] == text) return static_cast<ChannelSet>(i);
  return std::nullopt;
}

int channel_count(ChannelSet set) { return static_cast<int>(channel_labels(set).size()); }

std::vector<ChannelLabel> channel_labels(ChannelSet set) {
  using enum ChannelLabel;
  switch (set) {
    case ChannelSet::Gray: return {Gray};
    case ChannelSet::Rgb: return {R, G, B};
    case ChannelSet::Rgbl: return {R, G, B, L};
    case ChannelSet::Lms: return {LCone, MCone, SCone};
    case ChannelSet::Lab: return {LabL, LabA, LabB};
    case ChannelSet::Yuv: return {Y, U, V};
  }
  return {};
}

ChannelSetId ChannelSetId::from_code(std::uint8_t code) {
  if (code & 0x80u) {
    const auto label = static_cast<std::uint8_t>(code & 0x7Fu);
    if (label >= kChannelLabelCount)
      throw Error(ErrorCode::MalformedHeader, "unknown channel label code " + std::to_string(label));
    return single(static_cast<ChannelLabel>(label));
  }
  if (code > static_cast<std::uint8_t>(ChannelSet::Yuv))
    throw Error(ErrorCode::MalformedHeader, "unknown channel set code " + std::to_string(code));
  return ChannelSetId(static_cast<ChannelSet>(code));
}

std::vector<ChannelLabel> ChannelSetId::labels() const {
  if (is_single()) return {static_cast<ChannelLabel>(code_ & 0x7Fu)};
  return channel_labels(static_cast<ChannelSet>(code_));
}

// ---------------------------------------------------------------------------

RawImage::RawImage(int width, int height, int channels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0)
    throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
  if (channels != 1 && channels != 3)
    throw Error(ErrorCode::InvalidArgument, "images carry 1 or 3 channels");
  if (pixels_.size() != static_cast<std::size_t>(width) * height * channels)
    throw Error(ErrorCode::ShapeMismatch, "pixel count does not match width x height x channels");
}

RawImage RawImage::filled(int width, int height, int channels, std::uint8_t value) {
  return RawImage(width, height, channels,
                  std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height * channels, value));
}

NormalizedPlane::NormalizedPlane(int width, int height, std::vector<std::uint32_t> quanta,
                                 std::uint32_t full_scale, ChannelLabel label)
    : width_(width), height_(height), full_scale_(full_scale), label_(label), quanta_(std::move(quanta)) {
  if (width <= 0 || height <= 0)
    throw Error(ErrorCode::InvalidArgument, "plane dimensions must be positive");
  if (full_scale == 0) throw Error(ErrorCode::InvalidArgument, "full scale must be positive");
  if (quanta_.size() != static_cast<std::size_t>(width) * height)
    throw Error(ErrorCode::ShapeMismatch, "plane value count does not match width x height");
  values_.resize(static_cast<Eigen::Index>(quanta_.size()));
  for (std::size_t i = 0; i < quanta_.size(); ++i) {
    if (quanta_[i] > full_scale)
      throw Error(ErrorCode::InvalidArgument, "plane value exceeds full scale");
    values_[static_cast<Eigen::Index>(i)] = static_cast<double>(quanta_[i]) / full_scale;
  }
}

NormalizedPlane NormalizedPlane::from_pixels(int width, int height, std::span<const std::uint8_t> pixels,
                                             ChannelLabel label) {
  return NormalizedPlane(width, height, std::vector<std::uint32_t>(pixels.begin(), pixels.end()), 255,
                         label);
}

NormalizedPlane NormalizedPlane::relabeled(ChannelLabel label) const {
  NormalizedPlane copy = *this;
  copy.label_ = label;
  return copy;
}

std::vector<NormalizedPlane> normalize(const RawImage& image) {
  const int channels = image.channels();
  const std::vector<ChannelLabel> labels =
      channels == 1 ? std::vector{ChannelLabel::Gray}
                    : std::vector{ChannelLabel::R, ChannelLabel::G, ChannelLabel::B};
  std::vector<NormalizedPlane> planes;
  planes.reserve(static_cast<std::size_t>(channels));
  const auto pixels = image.pixels();
  for (int c = 0; c < channels; ++c) {
    std::vector<std::uint32_t> quanta(image.pixel_count());
    for (std::size_t i = 0; i < quanta.size(); ++i) quanta[i] = pixels[i * channels + c];
    planes.emplace_back(image.width(), image.height(), std::move(quanta), 255, labels[c]);
  }
  return planes;
}

RawImage to_image(std::span<const NormalizedPlane> planes) {
  const int channels = static_cast<int>(planes.size());
  if (channels != 1 && channels != 3) throw Error(ErrorCode::InvalidArgument, "an image needs 1 or 3 planes");
  const int w = planes.front().width();
  const int h = planes.front().height();
  for (const auto& p : planes)
    if (p.width() != w || p.height() != h) throw Error(ErrorCode::ShapeMismatch, "planes differ in size");
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * h * channels);
  for (int c = 0; c < channels; ++c) {
    const auto& p = planes[static_cast<std::size_t>(c)];
    const std::uint64_t den = p.full_scale();
    const auto q = p.quanta();
    for (std::size_t i = 0; i < q.size(); ++i)
      pixels[i * channels + c] = static_cast<std::uint8_t>((2 * 255 * std::uint64_t{q[i]} + den) / (2 * den));
  }
  return RawImage(w, h, channels, std::move(pixels));
}

void EncoderConfig::validate() const {
  if (time_steps < 1) throw Error(ErrorCode::InvalidArgument, "time steps must be >= 1");
  if (!(threshold > 0.0) || !std::isfinite(threshold))
    throw Error(ErrorCode::InvalidArgument, "threshold must be positive");
  if (!(leak_factor > 0.0 && leak_factor <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "leak factor must lie in (0, 1]");
  // A membrane that starts at or above threshold would carry a residue the
  // subtract-reset can never bring back under threshold in one step.
  if (!(initial_potential >= 0.0 && initial_potential < threshold))
    throw Error(ErrorCode::InvalidArgument, "initial potential must lie in [0, threshold)");
}

// ---------------------------------------------------------------------------

SpikeTensor::SpikeTensor(int channels, int time_steps, int width, int height, std::vector<std::uint8_t> bits,
                         std::vector<ChannelLabel> labels, Provenance provenance)
    : channels_(channels),
      time_steps_(time_steps),
      width_(width),
      height_(height),
      bits_(std::move(bits)),
      labels_(std::move(labels)),
      provenance_(provenance) {
  if (channels < 1 || time_steps < 1 || width < 1 || height < 1)
    throw Error(ErrorCode::InvalidArgument, "spike tensor dimensions must be positive");
  if (bits_.size() != static_cast<std::size_t>(channels) * time_steps * width * height)
    throw Error(ErrorCode::ShapeMismatch, "bit count does not match C x T x W x H");
  if (labels_.size() != static_cast<std::size_t>(channels))
    throw Error(ErrorCode::ShapeMismatch, "one channel label per channel");
  if (std::any_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b > 1; }))
    throw Error(ErrorCode::InvalidArgument, "spike tensor elements must be 0 or 1");
}

SpikeTensor SpikeTensor::zeros(int channels, int time_steps, int width, int height,
                               std::vector<ChannelLabel> labels, Provenance provenance) {
  const std::size_t n = static_cast<std::size_t>(std::max(channels, 0)) * std::max(time_steps, 0) *
                        std::max(width, 0) * std::max(height, 0);
  return SpikeTensor(channels, time_steps, width, height, std::vector<std::uint8_t>(n, 0), std::move(labels),
                     provenance);
}

std::size_t SpikeTensor::spike_count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

int SpikeTensor::pixel_spike_count(int c, int y, int x) const {
  int n = 0;
  for (int t = 0; t < time_steps_; ++t) n += bits_[index(c, t, y, x)];
  return n;
}

std::optional<int> SpikeTensor::first_spike(int c, int y, int x) const {
  for (int t = 0; t < time_steps_; ++t)
    if (bits_[index(c, t, y, x)]) return t;
  return std::nullopt;
}

SpikeTensor SpikeTensor::channel(int c) const {
  if (c < 0 || c >= channels_) throw Error(ErrorCode::OutOfBounds, "channel index out of range");
  const std::size_t stride = static_cast<std::size_t>(time_steps_) * height_ * width_;
  std::vector<std::uint8_t> bits(bits_.begin() + static_cast<std::ptrdiff_t>(c * stride),
                                 bits_.begin() + static_cast<std::ptrdiff_t>((c + 1) * stride));
  Provenance p = provenance_;
  p.channel_set = ChannelSetId::single(labels_[c]);
  return SpikeTensor(1, time_steps_, width_, height_, std::move(bits), {labels_[c]}, p);
}

SpikeTensor stack_channels(std::span<const SpikeTensor> parts, Provenance provenance) {
  if (parts.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to stack");
  const auto& first = parts.front();
  std::vector<std::uint8_t> bits;
  std::vector<ChannelLabel> labels;
  int channels = 0;
  for (const auto& part : parts) {
    if (part.time_steps() != first.time_steps() || part.width() != first.width() ||
        part.height() != first.height())
      throw Error(ErrorCode::ShapeMismatch, "stacked tensors must share T, width and height");
    bits.insert(bits.end(), part.bits().begin(), part.bits().end());
    labels.insert(labels.end(), part.labels().begin(), part.labels().end());
    channels += part.channels();
  }
  return SpikeTensor(channels, first.time_steps(), first.width(), first.height(), std::move(bits),
                     std::move(labels), provenance);
}

RawImage downsample_2x(const RawImage& image) {
  const int w = image.width() / 2;
  const int h = image.height() / 2;
  const int ch = image.channels();
  if (w < 1 || h < 1) throw Error(ErrorCode::InvalidArgument, "image too small to downsample");
  std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h * ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        const int sum = image.at(2 * x, 2 * y, c) + image.at(2 * x + 1, 2 * y, c) +
                        image.at(2 * x, 2 * y + 1, c) + image.at(2 * x + 1, 2 * y + 1, c);
        out[(static_cast<std::size_t>(y) * w + x) * ch + c] = static_cast<std::uint8_t>((sum + 2) / 4);
      }
  return RawImage(w, h, ch, std::move(out));
}

}  // namespace spikeenc
