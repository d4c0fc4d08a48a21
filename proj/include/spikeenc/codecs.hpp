#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spikeenc/core.hpp"

namespace spikeenc {

/// Integer integrate-and-fire neuron. Membrane and threshold are counted in
/// units of 1 / full_scale; a step adds the input and fires on >= threshold.
struct IfState {
  std::int64_t accumulator = 0;
  std::int64_t threshold = 1;

  bool step(std::int64_t input) {
    accumulator += input;
    if (accumulator < threshold) return false;
    accumulator -= threshold;
    return true;
  }
};

/// Leaky variant in the same units: membrane = leak * membrane + input.
struct LifState {
  double membrane = 0.0;
  double threshold = 1.0;
  double leak = 1.0;

  bool step(double input) {
    membrane = leak * membrane + input;
    if (membrane < threshold) return false;
    membrane -= threshold;
    return true;
  }
};

/// Integrate-and-fire encoder. Each pixel adds its quanta to an integer
/// accumulator every step and fires whenever the accumulator reaches
/// round(full_scale * threshold), subtracting the threshold on a spike.
/// Exact: no floating point is involved.
SpikeTensor if_encode(const NormalizedPlane& plane, const EncoderConfig& config);

/// Leaky integrate-and-fire: membrane = leak * membrane + input, same
/// subtract reset as IF. Runs in units of 1 / full_scale so that a leak of
/// exactly 1 reproduces if_encode bit for bit.
SpikeTensor lif_encode(const NormalizedPlane& plane, const EncoderConfig& config);

/// Bernoulli rate code; one independent draw per (pixel, step) from a
/// stateless generator keyed by (seed, channel label, x, y, t).
SpikeTensor rate_encode(const NormalizedPlane& plane, const EncoderConfig& config);

/// Time-to-first-spike: at most one spike per pixel, at
/// step floor((1 - p)(T - 1)) + 1; zero intensity stays silent.
SpikeTensor ttfs_encode(const NormalizedPlane& plane, const EncoderConfig& config);

/// Dispatches on config.codec.
SpikeTensor encode(const NormalizedPlane& plane, const EncoderConfig& config);

/// value = spike count / T for every pixel, one plane per channel.
std::vector<NormalizedPlane> decode_count(const SpikeTensor& spikes);

/// Inverse of the TTFS latency map. Silent pixels decode to 0; throws
/// MultipleSpikes if any pixel fired more than once.
std::vector<NormalizedPlane> decode_ttfs(const SpikeTensor& spikes);

/// round(full_scale * threshold) as used by the IF accumulator; throws if the
/// threshold rounds to zero at this resolution.
std::int64_t if_threshold_quanta(std::uint32_t full_scale, double threshold);

/// One-based TTFS firing step for quanta / full_scale, or nullopt for zero.
std::optional<int> ttfs_step(std::uint32_t quanta, std::uint32_t full_scale, int time_steps);

/// Uniform double in [0, 1) for a given key; exposed for tests.
double rate_uniform(std::uint64_t seed, ChannelLabel label, int x, int y, int t);

}  // namespace spikeenc
