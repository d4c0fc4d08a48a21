#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spikeenc/core.hpp"
#include "spikeenc/io.hpp"

namespace spikeenc {

/// Spike count of one pixel over the whole train.
int count_rate(const SpikeTensor& spikes, PixelRef pixel);

/// Mean firing rate of one pixel in the window [t, t + window) over K trials:
/// spikes / (window * K). `t` is a zero-based time index.
double density_rate(std::span<const SpikeTensor> trials, PixelRef pixel, int t, int window);

/// Mean activity of a pixel population in [t, t + window): spikes / (window * n).
double population_rate(const SpikeTensor& spikes, std::span<const PixelRef> region, int t, int window);

/// Every pixel of channel c, in row-major order.
std::vector<PixelRef> channel_region(const SpikeTensor& spikes, int c);

struct ChannelStats {
  ChannelLabel label = ChannelLabel::Gray;
  std::size_t total_spikes = 0;
  double mean_count_rate = 0.0;  // spikes per pixel over the full train
  double population_rate = 0.0;  // spikes per pixel per step
};

std::vector<ChannelStats> channel_stats(const SpikeTensor& spikes);

struct ReconstructionError {
  double max_abs = 0.0;
  double mean_abs = 0.0;
};

ReconstructionError reconstruction_error(const NormalizedPlane& original, const NormalizedPlane& decoded);

struct TimingSummary {
  double mean_us = 0.0;
  double stddev_us = 0.0;
  std::size_t count = 0;
};

TimingSummary summarize(std::span<const double> samples_us);

struct CostReport {
  std::uint64_t flops = 0;
  std::uint64_t parameters = 0;
  TimingSummary wall_clock;
  std::vector<double> samples_us;
  int threads = 1;
};

/// Elementary operations an encoder spends per pixel (per step for the
/// step-driven codecs): IF 4 (accumulate, compare, subtract, write),
/// LIF 5 (adds the leak multiply), RATE 2 (draw, compare), TTFS 2 per pixel.
std::uint64_t encoder_ops_per_pixel(Codec codec);

/// Operation and parameter count for encoding a width x height x channels
/// input with `config`. Encoders hold no learnable parameters.
CostReport flops_report(const EncoderConfig& config, int width, int height, int channels = 1);

/// Times `repetitions` single-threaded passes over `images`; the first pass is
/// a warm-up and is not kept. Throws EmptyDataset on no images.
CostReport bench_encode(const EncoderConfig& config, ChannelSet set, std::span<const RawImage> images,
                        int repetitions);

std::string cost_report_csv_header();
std::string cost_report_csv_row(const EncoderConfig& config, ChannelSet set, std::size_t images, int repetitions,
                                const CostReport& report);

}  // namespace spikeenc
