#include "spikeenc/analysis.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "spikeenc/photoreceptor.hpp"

namespace spikeenc {

namespace {

void check_pixel(const SpikeTensor& s, PixelRef p) {
  if (p.x < 0 || p.x >= s.width() || p.y < 0 || p.y >= s.height() || p.c < 0 || p.c >= s.channels())
    throw Error(ErrorCode::OutOfBounds, "pixel outside the tensor");
}

void check_window(const SpikeTensor& s, int t, int window) {
  if (window < 1 || t < 0 || t + window > s.time_steps())
    throw Error(ErrorCode::OutOfBounds, "time window outside [0, T)");
}

int window_count(const SpikeTensor& s, PixelRef p, int t, int window) {
  int n = 0;
  for (int k = t; k < t + window; ++k) n += s(p.c, k, p.y, p.x);
  return n;
}

}  // namespace

int count_rate(const SpikeTensor& spikes, PixelRef pixel) {
  check_pixel(spikes, pixel);
  return spikes.pixel_spike_count(pixel.c, pixel.y, pixel.x);
}

double density_rate(std::span<const SpikeTensor> trials, PixelRef pixel, int t, int window) {
  if (trials.empty()) throw Error(ErrorCode::InvalidArgument, "density rate needs at least one trial");
  const auto& first = trials.front();
  std::uint64_t total = 0;
  for (const auto& trial : trials) {
    if (trial.channels() != first.channels() || trial.time_steps() != first.time_steps() ||
        trial.width() != first.width() || trial.height() != first.height())
      throw Error(ErrorCode::ShapeMismatch, "trials must share dimensions");
    check_pixel(trial, pixel);
    check_window(trial, t, window);
    total += static_cast<std::uint64_t>(window_count(trial, pixel, t, window));
  }
  return static_cast<double>(total) / (static_cast<double>(window) * static_cast<double>(trials.size()));
}

double population_rate(const SpikeTensor& spikes, std::span<const PixelRef> region, int t, int window) {
  if (region.empty()) throw Error(ErrorCode::InvalidArgument, "population needs at least one pixel");
  check_window(spikes, t, window);
  std::uint64_t active = 0;
  for (const auto& p : region) {
    check_pixel(spikes, p);
    active += static_cast<std::uint64_t>(window_count(spikes, p, t, window));
  }
  return static_cast<double>(active) / (static_cast<double>(window) * static_cast<double>(region.size()));
}

std::vector<PixelRef> channel_region(const SpikeTensor& spikes, int c) {
  std::vector<PixelRef> region;
  region.reserve(spikes.pixels_per_frame());
  for (int y = 0; y < spikes.height(); ++y)
    for (int x = 0; x < spikes.width(); ++x) region.push_back({x, y, c});
  return region;
}

std::vector<ChannelStats> channel_stats(const SpikeTensor& spikes) {
  std::vector<ChannelStats> stats;
  const std::size_t frame = spikes.pixels_per_frame();
  const std::size_t per_channel = frame * static_cast<std::size_t>(spikes.time_steps());
  const auto bits = spikes.bits();
  for (int c = 0; c < spikes.channels(); ++c) {
    const auto begin = bits.begin() + static_cast<std::ptrdiff_t>(c * per_channel);
    const auto total = static_cast<std::size_t>(std::count(begin, begin + static_cast<std::ptrdiff_t>(per_channel), 1));
    stats.push_back({spikes.labels()[c], total, static_cast<double>(total) / frame,
                     static_cast<double>(total) / per_channel});
  }
  return stats;
}

ReconstructionError reconstruction_error(const NormalizedPlane& original, const NormalizedPlane& decoded) {
  if (original.width() != decoded.width() || original.height() != decoded.height())
    throw Error(ErrorCode::ShapeMismatch, "planes differ in size");
  const Eigen::ArrayXd diff = (original.values() - decoded.values()).abs();
  return {diff.maxCoeff(), diff.mean()};
}

TimingSummary summarize(std::span<const double> samples_us) {
  TimingSummary s;
  s.count = samples_us.size();
  if (s.count == 0) return s;
  s.mean_us = std::accumulate(samples_us.begin(), samples_us.end(), 0.0) / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : samples_us) ss += (v - s.mean_us) * (v - s.mean_us);
    s.stddev_us = std::sqrt(ss / static_cast<double>(s.count - 1));
  }
  return s;
}

std::uint64_t encoder_ops_per_pixel(Codec codec) {
  switch (codec) {
    case Codec::If: return 4;
    case Codec::Lif: return 5;
    case Codec::Rate: return 2;
    case Codec::Ttfs: return 2;
  }
  return 0;
}

CostReport flops_report(const EncoderConfig& config, int width, int height, int channels) {
  config.validate();
  if (width < 1 || height < 1 || channels < 1)
    throw Error(ErrorCode::InvalidArgument, "flops_report needs positive dimensions");
  const std::uint64_t pixels = static_cast<std::uint64_t>(width) * height * channels;
  const std::uint64_t steps = config.codec == Codec::Ttfs ? 1 : static_cast<std::uint64_t>(config.time_steps);
  CostReport report;
  report.flops = encoder_ops_per_pixel(config.codec) * pixels * steps;
  report.parameters = 0;
  return report;
}

CostReport bench_encode(const EncoderConfig& config, ChannelSet set, std::span<const RawImage> images,
                        int repetitions) {
  if (images.empty()) throw Error(ErrorCode::EmptyDataset, "nothing to benchmark");
  if (repetitions < 1) throw Error(ErrorCode::InvalidArgument, "repetitions must be >= 1");
  const auto& first = images.front();
  CostReport report = flops_report(config, first.width(), first.height(), channel_count(set));
  report.flops *= images.size();
  report.threads = 1;

  volatile std::size_t sink = 0;
  for (int rep = 0; rep < repetitions; ++rep) {
    const auto start = std::chrono::steady_clock::now();
    std::size_t spikes = 0;
    for (const auto& image : images) spikes += encode_photoreceptor(image, set, config).spike_count();
    const auto stop = std::chrono::steady_clock::now();
    sink = sink + spikes;
    if (rep == 0) continue;
    report.samples_us.push_back(std::chrono::duration<double, std::micro>(stop - start).count());
  }
  report.wall_clock = summarize(report.samples_us);
  return report;
}

std::string cost_report_csv_header() {
  return "codec,channels,images,repetitions,samples,mean_us,stddev_us,threads,flops,parameters";
}

std::string cost_report_csv_row(const EncoderConfig& config, ChannelSet set, std::size_t images, int repetitions,
                                const CostReport& report) {
  std::ostringstream row;
  row << to_string(config.codec) << ',' << to_string(set) << ',' << images << ',' << repetitions << ','
      << report.wall_clock.count << ',' << report.wall_clock.mean_us << ',' << report.wall_clock.stddev_us << ','
      << report.threads << ',' << report.flops << ',' << report.parameters;
  return row.str();
}

}  // namespace spikeenc
