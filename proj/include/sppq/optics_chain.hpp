#pragma once

#include <cstdint>
#include <span>

#include "sppq/time_tags.hpp"

namespace sppq {

/// Stripe waveguide between an in- and out-coupling grating.
struct WaveguideSpec {
  double length_um = 7.5;        ///< grating separation
  double prop_length_um = 9.8;   ///< 1/e intensity decay length
  double coupling_in = 1.0;
  double coupling_out = 1.0;
  double pol_angle_rad = 0.0;    ///< incident polarization relative to the coupling axis

  void validate() const;
};

/// coupling_in * coupling_out * cos^2(theta) * exp(-L / ell)
double waveguide_survival(const WaveguideSpec& w);

/// Independent per-photon survival with probability `eta`; order preserved.
TagStream thin_stream(std::span<const Timestamp> arrivals, double eta, std::uint64_t seed);

struct SplitStreams {
  TagStream b1;
  TagStream b2;
};

/// Routes each arrival to B1 with probability `ratio`, otherwise to B2.
SplitStreams split_stream(std::span<const Timestamp> arrivals, double ratio, std::uint64_t seed);

}  // namespace sppq
