#include "spikeenc/codecs.hpp"

#include <cmath>

namespace spikeenc {

namespace {

void require_codec(const EncoderConfig& config, Codec expected) {
  config.validate();
  if (config.codec != expected)
    throw Error(ErrorCode::InvalidArgument,
                "encoder called with codec '" + std::string(to_string(config.codec)) + "'");
}

Provenance single_plane_provenance(const NormalizedPlane& plane, const EncoderConfig& config) {
  return {config, ChannelSetId::single(plane.label())};
}

SpikeTensor make_tensor(const NormalizedPlane& plane, const EncoderConfig& config,
                        std::vector<std::uint8_t> bits) {
  return SpikeTensor(1, config.time_steps, plane.width(), plane.height(), std::move(bits), {plane.label()},
                     single_plane_provenance(plane, config));
}

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::int64_t if_threshold_quanta(std::uint32_t full_scale, double threshold) {
  const auto quanta = static_cast<std::int64_t>(std::llround(static_cast<double>(full_scale) * threshold));
  if (quanta < 1)
    throw Error(ErrorCode::InvalidArgument, "threshold is below the plane's intensity resolution");
  return quanta;
}

SpikeTensor if_encode(const NormalizedPlane& plane, const EncoderConfig& config) {
  require_codec(config, Codec::If);
  const int steps = config.time_steps;
  const std::size_t frame = plane.size();
  const std::int64_t threshold = if_threshold_quanta(plane.full_scale(), config.threshold);
  const auto start = static_cast<std::int64_t>(std::llround(plane.full_scale() * config.initial_potential));
  const auto quanta = plane.quanta();

  std::vector<std::uint8_t> bits(frame * static_cast<std::size_t>(steps), 0);
  for (std::size_t i = 0; i < frame; ++i) {
    IfState neuron{start, threshold};
    for (int t = 0; t < steps; ++t)
      if (neuron.step(quanta[i])) bits[static_cast<std::size_t>(t) * frame + i] = 1;
  }
  return make_tensor(plane, config, std::move(bits));
}

SpikeTensor lif_encode(const NormalizedPlane& plane, const EncoderConfig& config) {
  require_codec(config, Codec::Lif);
  const int steps = config.time_steps;
  const std::size_t frame = plane.size();
  const auto threshold = static_cast<double>(if_threshold_quanta(plane.full_scale(), config.threshold));
  const double start = std::round(plane.full_scale() * config.initial_potential);
  const double leak = config.leak_factor;
  const auto quanta = plane.quanta();

  std::vector<std::uint8_t> bits(frame * static_cast<std::size_t>(steps), 0);
  for (std::size_t i = 0; i < frame; ++i) {
    LifState neuron{start, threshold, leak};
    for (int t = 0; t < steps; ++t)
      if (neuron.step(static_cast<double>(quanta[i]))) bits[static_cast<std::size_t>(t) * frame + i] = 1;
  }
  return make_tensor(plane, config, std::move(bits));
}

double rate_uniform(std::uint64_t seed, ChannelLabel label, int x, int y, int t) {
  std::uint64_t key = splitmix64(seed);
  key = splitmix64(key ^ static_cast<std::uint64_t>(label));
  key = splitmix64(key ^ ((static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
                          static_cast<std::uint32_t>(y)));
  key = splitmix64(key ^ static_cast<std::uint32_t>(t));
  return static_cast<double>(key >> 11) * 0x1.0p-53;
}

SpikeTensor rate_encode(const NormalizedPlane& plane, const EncoderConfig& config) {
  require_codec(config, Codec::Rate);
  const int steps = config.time_steps;
  const std::size_t frame = plane.size();
  std::vector<std::uint8_t> bits(frame * static_cast<std::size_t>(steps), 0);
  for (int y = 0; y < plane.height(); ++y)
    for (int x = 0; x < plane.width(); ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * plane.width() + x;
      const double p = plane.value(i);
      for (int t = 0; t < steps; ++t)
        bits[static_cast<std::size_t>(t) * frame + i] =
            rate_uniform(config.seed, plane.label(), x, y, t) < p ? 1 : 0;
    }
  return make_tensor(plane, config, std::move(bits));
}

std::optional<int> ttfs_step(std::uint32_t quanta, std::uint32_t full_scale, int time_steps) {
  if (quanta == 0) return std::nullopt;
  const std::uint64_t dark = full_scale - quanta;
  return static_cast<int>(dark * static_cast<std::uint64_t>(time_steps - 1) / full_scale) + 1;
}

SpikeTensor ttfs_encode(const NormalizedPlane& plane, const EncoderConfig& config) {
  require_codec(config, Codec::Ttfs);
  const std::size_t frame = plane.size();
  const auto quanta = plane.quanta();
  std::vector<std::uint8_t> bits(frame * static_cast<std::size_t>(config.time_steps), 0);
  for (std::size_t i = 0; i < frame; ++i)
    if (const auto step = ttfs_step(quanta[i], plane.full_scale(), config.time_steps))
      bits[static_cast<std::size_t>(*step - 1) * frame + i] = 1;
  return make_tensor(plane, config, std::move(bits));
}

SpikeTensor encode(const NormalizedPlane& plane, const EncoderConfig& config) {
  switch (config.codec) {
    case Codec::If: return if_encode(plane, config);
    case Codec::Lif: return lif_encode(plane, config);
    case Codec::Rate: return rate_encode(plane, config);
    case Codec::Ttfs: return ttfs_encode(plane, config);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown codec");
}

std::vector<NormalizedPlane> decode_count(const SpikeTensor& spikes) {
  std::vector<NormalizedPlane> planes;
  for (int c = 0; c < spikes.channels(); ++c) {
    std::vector<std::uint32_t> counts(spikes.pixels_per_frame(), 0);
    for (int y = 0; y < spikes.height(); ++y)
      for (int x = 0; x < spikes.width(); ++x)
        counts[static_cast<std::size_t>(y) * spikes.width() + x] =
            static_cast<std::uint32_t>(spikes.pixel_spike_count(c, y, x));
    planes.emplace_back(spikes.width(), spikes.height(), std::move(counts),
                        static_cast<std::uint32_t>(spikes.time_steps()), spikes.labels()[c]);
  }
  return planes;
}

std::vector<NormalizedPlane> decode_ttfs(const SpikeTensor& spikes) {
  const int steps = spikes.time_steps();
  // value = (T - s) / (T - 1); with T = 1 the only possible spike means "lit".
  const auto scale = static_cast<std::uint32_t>(steps > 1 ? steps - 1 : 1);
  std::vector<NormalizedPlane> planes;
  for (int c = 0; c < spikes.channels(); ++c) {
    std::vector<std::uint32_t> quanta(spikes.pixels_per_frame(), 0);
    for (int y = 0; y < spikes.height(); ++y)
      for (int x = 0; x < spikes.width(); ++x) {
        if (spikes.pixel_spike_count(c, y, x) > 1)
          throw Error(ErrorCode::MultipleSpikes, "pixel (" + std::to_string(x) + "," + std::to_string(y) +
                                                     "," + std::to_string(c) + ") fired more than once");
        if (const auto t = spikes.first_spike(c, y, x))
          quanta[static_cast<std::size_t>(y) * spikes.width() + x] =
              steps > 1 ? static_cast<std::uint32_t>(steps - 1 - *t) : 1u;
      }
    planes.emplace_back(spikes.width(), spikes.height(), std::move(quanta), scale, spikes.labels()[c]);
  }
  return planes;
}

}  // namespace spikeenc
