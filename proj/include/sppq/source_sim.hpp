#pragma once

#include <cstdint>
#include <span>

#include "sppq/random.hpp"
#include "sppq/time_tags.hpp"

namespace sppq {

struct SourceSpec {
  double pair_rate = 0.0;         ///< pair-emission events per second
  double double_pair_prob = 0.0;  ///< probability an emission event carries two pairs, in [0, 0.1]
  double laser_rate = 0.0;        ///< photons per second at the chain input (laser mode)

  void validate() const;
};

struct DetectorSpec {
  double efficiency = 0.55;
  double dark_rate = 100.0;               ///< counts per second
  double jitter_sigma_ps = 350.0;         ///< Gaussian timing spread
  std::uint64_t dead_time_ps = 50'000;    ///< non-paralyzable

  void validate() const;
};

struct PairArrivals {
  TagStream arm_a;
  TagStream arm_b;
};

/// Pair emission as a homogeneous Poisson process; each event puts one photon in
/// each arm at the same instant, or two with probability `double_pair_prob`.
PairArrivals generate_spdc_pairs(const SourceSpec& spec, double duration_s, std::uint64_t seed);

/// Same process restricted to [start_ps, end_ps), drawing from `rng`.
PairArrivals spdc_pairs_in(const SourceSpec& spec, std::uint64_t start_ps, std::uint64_t end_ps, Rng& rng);

/// Poissonian photon arrivals of an attenuated laser.
TagStream generate_laser_arrivals(double rate, double duration_s, std::uint64_t seed);

/// Homogeneous Poisson arrivals in [start_ps, end_ps).
TagStream poisson_arrivals(double rate, std::uint64_t start_ps, std::uint64_t end_ps, Rng& rng);

/// First half of the detector model: efficiency, Gaussian jitter (clamped to
/// [0, run_end_ps)) and dark counts over [window_start_ps, window_end_ps).
/// The result is sorted but dead time has not been applied. Exposed so long runs
/// can be simulated in chunks and finished with a single dead-time pass.
TagStream detect_raw(std::span<const Timestamp> arrivals, const DetectorSpec& det, std::uint64_t window_start_ps,
                     std::uint64_t window_end_ps, std::uint64_t run_end_ps, std::uint64_t seed);

/// Drops every tag closer than `dead_time_ps` to the previously accepted tag.
TagStream apply_dead_time(std::span<const Timestamp> sorted, std::uint64_t dead_time_ps);

/// Full detector: detect_raw over the whole run followed by the dead-time filter.
TagStream detect(std::span<const Timestamp> arrivals, const DetectorSpec& det, Channel channel, double duration_s,
                 std::uint64_t seed);

}  // namespace sppq
