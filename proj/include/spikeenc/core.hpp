#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "spikeenc/error.hpp"

namespace spikeenc {

enum class Codec : std::uint8_t { If = 0, Lif = 1, Rate = 2, Ttfs = 3 };

/// Channel sets understood by the photoreceptor layer.
enum class ChannelSet : std::uint8_t { Gray = 0, Rgb = 1, Rgbl = 2, Lms = 3, Lab = 4, Yuv = 5 };

enum class ChannelLabel : std::uint8_t {
  Gray = 0,
  R,
  G,
  B,
  L,
  LCone,
  MCone,
  SCone,
  LabL,
  LabA,
  LabB,
  Y,
  U,
  V,
};

inline constexpr std::uint8_t kChannelLabelCount = 14;

std::string_view to_string(Codec codec);
std::string_view to_string(ChannelSet set);
std::string_view to_string(ChannelLabel label);
std::optional<Codec> parse_codec(std::string_view text);
std::optional<ChannelSet> parse_channel_set(std::string_view text);

int channel_count(ChannelSet set);
std::vector<ChannelLabel> channel_labels(ChannelSet set);

/// 8-bit code stored with a spike tensor describing where its channels came
/// from. Codes 0..5 are the standard channel sets; a tensor built from a
/// single labelled plane uses 0x80 | label so the label survives a round trip.
class ChannelSetId {
 public:
  constexpr ChannelSetId() = default;
  constexpr explicit ChannelSetId(ChannelSet set) : code_(static_cast<std::uint8_t>(set)) {}

  static ChannelSetId single(ChannelLabel label) {
    ChannelSetId id;
    id.code_ = static_cast<std::uint8_t>(0x80u | static_cast<std::uint8_t>(label));
    return id;
  }
  /// Throws MalformedHeader on codes outside both ranges.
  static ChannelSetId from_code(std::uint8_t code);

  constexpr std::uint8_t code() const { return code_; }
  bool is_single() const { return (code_ & 0x80u) != 0; }
  std::vector<ChannelLabel> labels() const;

  friend constexpr bool operator==(ChannelSetId, ChannelSetId) = default;

 private:
  std::uint8_t code_ = 0;
};

/// 8-bit pixel grid, row-major, channel-interleaved.
class RawImage {
 public:
  RawImage() = default;
  RawImage(int width, int height, int channels, std::vector<std::uint8_t> pixels);

  static RawImage filled(int width, int height, int channels, std::uint8_t value);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  std::span<const std::uint8_t> pixels() const { return pixels_; }

  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  friend bool operator==(const RawImage&, const RawImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<std::uint8_t> pixels_;
};

/// Per-channel light intensity in [0, 1], held as an exact rational
/// quanta[i] / full_scale. Planes built from 8-bit images use full_scale 255
/// and keep the source pixel values as quanta, which lets the IF codec run
/// in integer arithmetic.
class NormalizedPlane {
 public:
  NormalizedPlane() = default;
  NormalizedPlane(int width, int height, std::vector<std::uint32_t> quanta,
                  std::uint32_t full_scale = 255, ChannelLabel label = ChannelLabel::Gray);

  static NormalizedPlane from_pixels(int width, int height, std::span<const std::uint8_t> pixels,
                                     ChannelLabel label = ChannelLabel::Gray);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return quanta_.size(); }
  ChannelLabel label() const { return label_; }
  std::uint32_t full_scale() const { return full_scale_; }
  std::span<const std::uint32_t> quanta() const { return quanta_; }
  const Eigen::ArrayXd& values() const { return values_; }
  double value(std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  double value(int x, int y) const { return value(static_cast<std::size_t>(y) * width_ + x); }

  NormalizedPlane relabeled(ChannelLabel label) const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::uint32_t full_scale_ = 255;
  ChannelLabel label_ = ChannelLabel::Gray;
  std::vector<std::uint32_t> quanta_;
  Eigen::ArrayXd values_;
};

/// One plane per image channel, labelled GRAY for 1-channel input and
/// R, G, B for 3-channel input.
std::vector<NormalizedPlane> normalize(const RawImage& image);

/// Inverse of normalize for 1 or 3 equally sized planes: each value is
/// re-quantized to round(255 * quanta / full_scale), ties away from zero.
RawImage to_image(std::span<const NormalizedPlane> planes);

struct EncoderConfig {
  Codec codec = Codec::If;
  int time_steps = 256;
  double threshold = 1.0;
  /// Per-step membrane retention e^(-dt/RC) for LIF; 1 means no leak.
  double leak_factor = 1.0;
  double initial_potential = 0.0;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument when any field is out of range.
  void validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct Provenance {
  EncoderConfig config;
  ChannelSetId channel_set;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Binary spike tensor indexed (channel, time, y, x), x fastest. Time index
/// t is zero-based; the human-facing step number is t + 1.
class SpikeTensor {
 public:
  SpikeTensor() = default;
  SpikeTensor(int channels, int time_steps, int width, int height, std::vector<std::uint8_t> bits,
              std::vector<ChannelLabel> labels, Provenance provenance);

  /// All-zero tensor of the given shape.
  static SpikeTensor zeros(int channels, int time_steps, int width, int height,
                           std::vector<ChannelLabel> labels, Provenance provenance);

  int channels() const { return channels_; }
  int time_steps() const { return time_steps_; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixels_per_frame() const { return static_cast<std::size_t>(width_) * height_; }

  std::size_t index(int c, int t, int y, int x) const {
    return ((static_cast<std::size_t>(c) * time_steps_ + t) * height_ + y) * width_ + x;
  }
  bool operator()(int c, int t, int y, int x) const { return bits_[index(c, t, y, x)] != 0; }
  void set(int c, int t, int y, int x, bool spike) { bits_[index(c, t, y, x)] = spike ? 1 : 0; }

  std::span<const std::uint8_t> bits() const { return bits_; }
  const std::vector<ChannelLabel>& labels() const { return labels_; }
  const Provenance& provenance() const { return provenance_; }

  std::size_t spike_count() const;
  /// Spikes emitted by one pixel over the whole train.
  int pixel_spike_count(int c, int y, int x) const;
  /// Zero-based time index of the first spike, or nullopt for a silent pixel.
  std::optional<int> first_spike(int c, int y, int x) const;

  /// Copy of a single channel as its own tensor.
  SpikeTensor channel(int c) const;

  friend bool operator==(const SpikeTensor&, const SpikeTensor&) = default;

 private:
  int channels_ = 0;
  int time_steps_ = 0;
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
  std::vector<ChannelLabel> labels_;
  Provenance provenance_;
};

/// Concatenates equally shaped tensors along the channel axis.
SpikeTensor stack_channels(std::span<const SpikeTensor> parts, Provenance provenance);

/// 2x2 box average, rounded half up, re-quantized to 8 bits.
RawImage downsample_2x(const RawImage& image);

}  // namespace spikeenc
