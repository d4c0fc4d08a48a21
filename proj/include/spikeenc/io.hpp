#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spikeenc/core.hpp"

namespace spikeenc {

using Bytes = std::vector<std::uint8_t>;

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, std::string_view text);

// --- PPM / PGM (binary P5, P6, maxval 255) ---------------------------------

/// Accepts '#' comments anywhere in the header. Errors: MalformedHeader,
/// TruncatedPayload, UnsupportedMaxval.
RawImage read_ppm(std::span<const std::uint8_t> bytes);
/// P5 for 1-channel images, P6 for 3-channel; no comments.
Bytes write_ppm(const RawImage& image);

// --- CIFAR-10 binary batches ----------------------------------------------

struct LabeledImage {
  RawImage image;
  int label = 0;
};

inline constexpr std::size_t kCifarRecordBytes = 3073;
inline constexpr int kCifarClasses = 10;

/// Records of 1 label byte + 1024 R + 1024 G + 1024 B (planar, row-major),
/// returned as interleaved 32x32x3 images. Errors: BadRecordCount, BadLabel.
std::vector<LabeledImage> read_cifar10_batch(std::span<const std::uint8_t> bytes);
Bytes write_cifar10_batch(std::span<const LabeledImage> images);

/// Reads `files` from `dir` in order, keeping images whose label is in
/// `classes` (empty = all) until `limit` images are collected (0 = no limit).
std::vector<LabeledImage> load_cifar10(const std::filesystem::path& dir, std::span<const std::string> files,
                                       std::span<const int> classes, std::size_t limit);

/// Replaces each label by its position in `classes`; other labels are an error.
std::vector<LabeledImage> remap_labels(std::vector<LabeledImage> images, std::span<const int> classes);

// --- Spike container ("SPK1") ----------------------------------------------

inline constexpr std::size_t kContainerHeaderBytes = 44;
inline constexpr std::uint16_t kContainerVersion = 1;

/// Little-endian header layout:
///   0  magic "SPK1"      4  version u16       6  channels u32
///   10 time steps u32    14 width u32         18 height u32
///   22 channel set u8    23 codec u8          24 threshold x 1000 u32
///   28 seed u64          36 reserved (8 zero bytes)
struct SpikeContainerHeader {
  std::uint16_t version = kContainerVersion;
  std::uint32_t channels = 0;
  std::uint32_t time_steps = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint8_t channel_set = 0;
  std::uint8_t codec = 0;
  std::uint32_t threshold_milli = 0;
  std::uint64_t seed = 0;

  std::size_t payload_bytes() const;
};

/// Bits packed in (c, t, y, x) order, x fastest, LSB first within a byte.
Bytes write_spike_container(const SpikeTensor& spikes);
/// Errors: BadMagic, VersionMismatch, LengthMismatch, MalformedHeader.
SpikeContainerHeader read_container_header(std::span<const std::uint8_t> bytes);
/// Leak factor and initial potential are not stored and come back at their
/// defaults; every header field round-trips.
SpikeTensor read_spike_container(std::span<const std::uint8_t> bytes);

// --- Event list ------------------------------------------------------------

/// CSV "t,x,y,c,p", one line per spike sorted by (t, c, y, x). t is the
/// one-based step number; p is always 1.
std::string export_event_list(const SpikeTensor& spikes);
/// Rebuilds a tensor shaped and labelled like `shape` from an event list.
SpikeTensor parse_event_list(std::string_view csv, const SpikeTensor& shape);

// --- Raster figure ---------------------------------------------------------

struct PixelRef {
  int x = 0;
  int y = 0;
  int c = 0;
};

/// SVG 1.1 raster: one lane per selected pixel, one tick (class "spike") per
/// spike at its step. Errors: OutOfBounds, InvalidArgument for an empty selection.
std::string write_raster_svg(const SpikeTensor& spikes, std::span<const PixelRef> selection);

}  // namespace spikeenc
