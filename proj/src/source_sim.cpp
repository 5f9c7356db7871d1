#include "sppq/source_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sampling.hpp"
#include "sppq/errors.hpp"

namespace sppq {
namespace {

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be finite and >= 0");
}

void require_duration(double duration_s) {
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw DomainError("duration must be positive");
}

// Calls emit(t_ps) for each event of a rate-`rate` Poisson process in [start, end).
template <typename Emit>
void poisson_times(double rate, std::uint64_t start_ps, std::uint64_t end_ps, Rng& rng, Emit&& emit) {
  if (rate <= 0.0 || end_ps <= start_ps) return;
  std::exponential_distribution<double> gap(rate / static_cast<double>(kPicosecondsPerSecond));
  const double end = static_cast<double>(end_ps);
  double t = static_cast<double>(start_ps) + gap(rng);
  while (t < end) {
    emit(static_cast<Timestamp>(t));
    t += gap(rng);
  }
}

}  // namespace

void SourceSpec::validate() const {
  require_nonnegative(pair_rate, "pair_rate");
  require_nonnegative(laser_rate, "laser_rate");
  if (!(double_pair_prob >= 0.0 && double_pair_prob <= 0.1)) {
    throw DomainError("double_pair_prob must lie in [0, 0.1], got " + std::to_string(double_pair_prob));
  }
}

void DetectorSpec::validate() const {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
    throw DomainError("detector efficiency must lie in [0, 1], got " + std::to_string(efficiency));
  }
  require_nonnegative(dark_rate, "dark_rate");
  require_nonnegative(jitter_sigma_ps, "jitter_sigma_ps");
}

TagStream poisson_arrivals(double rate, std::uint64_t start_ps, std::uint64_t end_ps, Rng& rng) {
  require_nonnegative(rate, "rate");
  TagStream out;
  if (rate > 0.0 && end_ps > start_ps) {
    out.reserve(static_cast<std::size_t>(rate * ps_to_seconds(end_ps - start_ps) * 1.01) + 64);
  }
  poisson_times(rate, start_ps, end_ps, rng, [&](Timestamp t) { out.push_back(t); });
  return out;
}

PairArrivals spdc_pairs_in(const SourceSpec& spec, std::uint64_t start_ps, std::uint64_t end_ps, Rng& rng) {
  spec.validate();
  PairArrivals out;
  if (spec.pair_rate <= 0.0 || end_ps <= start_ps) return out;
  const auto expected = static_cast<std::size_t>(spec.pair_rate * ps_to_seconds(end_ps - start_ps) *
                                                 (1.0 + spec.double_pair_prob) * 1.01) + 64;
  out.arm_a.reserve(expected);
  out.arm_b.reserve(expected);
  std::bernoulli_distribution two(spec.double_pair_prob);
  const bool doubles = spec.double_pair_prob > 0.0;
  poisson_times(spec.pair_rate, start_ps, end_ps, rng, [&](Timestamp t) {
    const int pairs = (doubles && two(rng)) ? 2 : 1;
    for (int k = 0; k < pairs; ++k) {
      out.arm_a.push_back(t);
      out.arm_b.push_back(t);
    }
  });
  return out;
}

PairArrivals generate_spdc_pairs(const SourceSpec& spec, double duration_s, std::uint64_t seed) {
  require_duration(duration_s);
  Rng rng(seed);
  return spdc_pairs_in(spec, 0, seconds_to_ps(duration_s), rng);
}

TagStream generate_laser_arrivals(double rate, double duration_s, std::uint64_t seed) {
  require_duration(duration_s);
  Rng rng(seed);
  return poisson_arrivals(rate, 0, seconds_to_ps(duration_s), rng);
}

TagStream detect_raw(std::span<const Timestamp> arrivals, const DetectorSpec& det, std::uint64_t window_start_ps,
                     std::uint64_t window_end_ps, std::uint64_t run_end_ps, std::uint64_t seed) {
  det.validate();
  if (!is_sorted_stream(arrivals)) throw InputError("arrival stream passed to detector is not sorted");
  Rng rng(seed);

  TagStream tags = detail::bernoulli_thin(arrivals, det.efficiency, rng);
  if (det.jitter_sigma_ps > 0.0 && !tags.empty()) {
    std::normal_distribution<double> jitter(0.0, det.jitter_sigma_ps);
    const double last = run_end_ps > 0 ? static_cast<double>(run_end_ps - 1) : 0.0;
    for (Timestamp& t : tags) {
      const double shifted = std::round(static_cast<double>(t) + jitter(rng));
      t = static_cast<Timestamp>(std::clamp(shifted, 0.0, last));
    }
    std::sort(tags.begin(), tags.end());
  }

  if (det.dark_rate > 0.0) {
    TagStream dark = poisson_arrivals(det.dark_rate, window_start_ps, window_end_ps, rng);
    TagStream merged;
    merged.reserve(tags.size() + dark.size());
    std::merge(tags.begin(), tags.end(), dark.begin(), dark.end(), std::back_inserter(merged));
    tags = std::move(merged);
  }
  return tags;
}

TagStream apply_dead_time(std::span<const Timestamp> sorted, std::uint64_t dead_time_ps) {
  TagStream out;
  out.reserve(sorted.size());
  for (Timestamp t : sorted) {
    if (out.empty() || t - out.back() >= dead_time_ps) out.push_back(t);
  }
  return out;
}

TagStream detect(std::span<const Timestamp> arrivals, const DetectorSpec& det, Channel channel, double duration_s,
                 std::uint64_t seed) {
  require_duration(duration_s);
  const auto end = seconds_to_ps(duration_s);
  if (!arrivals.empty() && arrivals.back() >= end) throw InputError("arrival beyond run duration");
  TagStream raw = detect_raw(arrivals, det, 0, end, end, derive_seed(seed, static_cast<std::uint64_t>(channel)));
  if (det.dead_time_ps == 0) return raw;
  return apply_dead_time(raw, det.dead_time_ps);
}

}  // namespace sppq
