#pragma once

#include <span>

#include "sppq/random.hpp"
#include "sppq/time_tags.hpp"

namespace sppq::detail {

/// Keeps each element independently with probability `keep`. For small `keep`
/// the gaps between kept elements are drawn from a geometric distribution so the
/// cost scales with the output size.
TagStream bernoulli_thin(std::span<const Timestamp> in, double keep, Rng& rng);

}  // namespace sppq::detail
