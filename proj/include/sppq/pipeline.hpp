#pragma once

#include <array>
#include <cstdint>

#include "sppq/optics_chain.hpp"
#include "sppq/source_sim.hpp"
#include "sppq/time_tags.hpp"

namespace sppq {

enum class SourceMode { Heralded, Laser };

/// Everything between the source and the three detectors.
///
/// Heralded: arm A passes `herald_transmission` then detector A; arm B passes
/// the waveguide, `attenuation`, the splitter and detectors B1/B2. Laser: the
/// attenuated laser enters arm B; detector A only sees dark counts.
struct ChainSpec {
  SourceMode mode = SourceMode::Heralded;
  SourceSpec source;
  WaveguideSpec waveguide;
  double herald_transmission = 1.0;
  double attenuation = 1.0;  ///< neutral-density transmission before the splitter
  double splitter_ratio = 0.5;
  std::array<DetectorSpec, kChannelCount> detectors;
  double duration_s = 1.0;

  void validate() const;
  /// Transmission of arm B up to the splitter.
  double arm_b_transmission() const;
};

/// Simulates one acquisition. The run is generated in chunks of bounded size
/// (each chunk seeded from `seed` and its index) and finished with one
/// dead-time pass per channel, so results do not depend on the thread count.
TagSet simulate_chain(const ChainSpec& chain, std::uint64_t seed);

}  // namespace sppq
