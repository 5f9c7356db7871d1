#include "sppq/optics_chain.hpp"

#include <cmath>
#include <string>

#include "sampling.hpp"
#include "sppq/errors.hpp"
#include "sppq/random.hpp"

namespace sppq {
namespace {

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError(std::string(name) + " must lie in [0, 1], got " + std::to_string(v));
}

}  // namespace

void WaveguideSpec::validate() const {
  if (!(length_um >= 0.0) || !std::isfinite(length_um)) throw DomainError("waveguide length must be >= 0");
  if (!(prop_length_um > 0.0)) throw DomainError("propagation length must be > 0");
  check_unit(coupling_in, "coupling_in");
  check_unit(coupling_out, "coupling_out");
  if (!std::isfinite(pol_angle_rad)) throw DomainError("polarization angle must be finite");
}

double waveguide_survival(const WaveguideSpec& w) {
  w.validate();
  const double c = std::cos(w.pol_angle_rad);
  return w.coupling_in * w.coupling_out * c * c * std::exp(-w.length_um / w.prop_length_um);
}

TagStream thin_stream(std::span<const Timestamp> arrivals, double eta, std::uint64_t seed) {
  check_unit(eta, "survival eta");
  Rng rng(seed);
  return detail::bernoulli_thin(arrivals, eta, rng);
}

SplitStreams split_stream(std::span<const Timestamp> arrivals, double ratio, std::uint64_t seed) {
  check_unit(ratio, "splitter ratio");
  Rng rng(seed);
  std::bernoulli_distribution to_b1(ratio);
  SplitStreams out;
  out.b1.reserve(static_cast<std::size_t>(static_cast<double>(arrivals.size()) * ratio * 1.05) + 16);
  out.b2.reserve(static_cast<std::size_t>(static_cast<double>(arrivals.size()) * (1.0 - ratio) * 1.05) + 16);
  for (Timestamp t : arrivals) {
    (to_b1(rng) ? out.b1 : out.b2).push_back(t);
  }
  return out;
}

}  // namespace sppq
