#include "sppq/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "sppq/errors.hpp"
#include "sppq/parallel.hpp"
#include "sppq/random.hpp"

namespace sppq {
namespace {

// Upper bound on source events generated per chunk.
constexpr double kEventsPerChunk = 4e6;

struct ChunkTags {
  std::array<TagStream, kChannelCount> raw;
};

ChunkTags simulate_chunk(const ChainSpec& c, std::uint64_t start, std::uint64_t end, std::uint64_t run_end,
                         std::uint64_t seed) {
  Rng rng(derive_seed(seed, "source"));
  TagStream arm_a;
  TagStream arm_b;
  if (c.mode == SourceMode::Heralded) {
    auto pairs = spdc_pairs_in(c.source, start, end, rng);
    arm_a = thin_stream(pairs.arm_a, c.herald_transmission, derive_seed(seed, "herald-loss"));
    arm_b = std::move(pairs.arm_b);
  } else {
    arm_b = poisson_arrivals(c.source.laser_rate, start, end, rng);
  }
  arm_b = thin_stream(arm_b, c.arm_b_transmission(), derive_seed(seed, "waveguide"));
  auto split = split_stream(arm_b, c.splitter_ratio, derive_seed(seed, "splitter"));

  ChunkTags out;
  const auto& det = c.detectors;
  out.raw[index(Channel::A)] = detect_raw(arm_a, det[0], start, end, run_end, derive_seed(seed, "A"));
  out.raw[index(Channel::B1)] = detect_raw(split.b1, det[1], start, end, run_end, derive_seed(seed, "B1"));
  out.raw[index(Channel::B2)] = detect_raw(split.b2, det[2], start, end, run_end, derive_seed(seed, "B2"));
  return out;
}

}  // namespace

void ChainSpec::validate() const {
  source.validate();
  waveguide.validate();
  for (const auto& d : detectors) d.validate();
  if (!(herald_transmission >= 0.0 && herald_transmission <= 1.0)) {
    throw DomainError("herald_transmission must lie in [0, 1]");
  }
  if (!(attenuation >= 0.0 && attenuation <= 1.0)) throw DomainError("attenuation must lie in [0, 1]");
  if (!(splitter_ratio >= 0.0 && splitter_ratio <= 1.0)) throw DomainError("splitter_ratio must lie in [0, 1]");
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw DomainError("duration must be positive");
}

double ChainSpec::arm_b_transmission() const { return waveguide_survival(waveguide) * attenuation; }

TagSet simulate_chain(const ChainSpec& chain, std::uint64_t seed) {
  chain.validate();
  const std::uint64_t run_end = seconds_to_ps(chain.duration_s);
  const double rate = chain.mode == SourceMode::Heralded
                          ? chain.source.pair_rate * (1.0 + chain.source.double_pair_prob)
                          : chain.source.laser_rate;
  const auto chunks = static_cast<std::uint64_t>(
      std::clamp(std::ceil(rate * chain.duration_s / kEventsPerChunk), 1.0, 1e6));
  const std::uint64_t chunk_ps = (run_end + chunks - 1) / chunks;

  std::vector<ChunkTags> parts(chunks);
  parallel_for(chunks, [&](std::size_t i) {
    const std::uint64_t start = i * chunk_ps;
    const std::uint64_t end = std::min(run_end, start + chunk_ps);
    parts[i] = simulate_chunk(chain, start, end, run_end, derive_seed(seed, static_cast<std::uint64_t>(i)));
  });

  TagSet tags;
  tags.duration_ps = run_end;
  for (std::size_t ch = 0; ch < kChannelCount; ++ch) {
    std::size_t total = 0;
    for (const auto& p : parts) total += p.raw[ch].size();
    TagStream all;
    all.reserve(total);
    for (auto& p : parts) {
      all.insert(all.end(), p.raw[ch].begin(), p.raw[ch].end());
      TagStream().swap(p.raw[ch]);
    }
    // jitter can carry a tag across a chunk edge
    if (!is_sorted_stream(all)) std::sort(all.begin(), all.end());
    const auto dead = chain.detectors[ch].dead_time_ps;
    tags.streams[ch] = dead == 0 ? std::move(all) : apply_dead_time(all, dead);
  }
  return tags;
}

}  // namespace sppq
