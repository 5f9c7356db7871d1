#include "sampling.hpp"

#include <cstdint>
#include <limits>

namespace sppq::detail {

TagStream bernoulli_thin(std::span<const Timestamp> in, double keep, Rng& rng) {
  TagStream out;
  if (keep <= 0.0 || in.empty()) return out;
  if (keep >= 1.0) return TagStream(in.begin(), in.end());

  out.reserve(static_cast<std::size_t>(static_cast<double>(in.size()) * keep * 1.05) + 16);
  if (keep > 0.25) {
    std::bernoulli_distribution coin(keep);
    for (Timestamp t : in) {
      if (coin(rng)) out.push_back(t);
    }
    return out;
  }
  std::geometric_distribution<std::uint64_t> skip(keep);
  std::uint64_t i = skip(rng);
  while (i < in.size()) {
    out.push_back(in[i]);
    const std::uint64_t gap = skip(rng);
    if (gap >= in.size()) break;
    i += gap + 1;
  }
  return out;
}

}  // namespace sppq::detail
