#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sppq/time_tags.hpp"

namespace sppq {

struct CoincConfig {
  std::uint64_t window_ps = 2000;                         ///< full width, centered
  std::array<std::int64_t, kChannelCount> channel_delays_ps{};  ///< added to each channel before counting
  std::uint64_t integration_time_ps = 0;                  ///< T

  void validate() const;
};

/// Counts entering the unconditioned and heralded g2 estimators at one delay.
struct CountSummary {
  std::uint64_t n_a = 0;
  std::uint64_t n_b1 = 0;
  std::uint64_t n_b2 = 0;
  std::uint64_t n_b1b2 = 0;
  std::uint64_t n_ab1 = 0;
  std::uint64_t n_ab2 = 0;
  std::uint64_t n_ab1b2 = 0;
  std::int64_t tau_ps = 0;
  std::uint64_t window_ps = 0;
  std::uint64_t integration_time_ps = 0;
};

/// Number of (x, y) matches with |t_y - tau - t_x| <= window/2. X tags are taken
/// in time order and each takes the earliest unused Y tag in its window; every
/// tag is used at most once. Linear two-pointer pass. Throws InputError when a
/// stream is unsorted.
std::uint64_t count_pairs(std::span<const Timestamp> x, std::span<const Timestamp> y, std::uint64_t window_ps,
                          std::int64_t tau_ps);

/// Number of A tags that find both an unused B1 tag within window/2 and an unused
/// B2 tag within window/2 after shifting B2 by tau. A matched triple consumes the
/// earliest B1 and B2 tags in the window, so the result never exceeds the pair
/// counts.
std::uint64_t count_triples(std::span<const Timestamp> a, std::span<const Timestamp> b1,
                            std::span<const Timestamp> b2, std::uint64_t window_ps, std::int64_t tau_ps);

/// All counts at delay `tau_ps` (applied to B2), with channel delays folded in.
CountSummary summarize(const TagSet& tags, const CoincConfig& cfg, std::int64_t tau_ps);

/// N_B1B2 T / (N_B1 N_B2 dt)
double g2_unconditioned(const CountSummary& c);

/// N_A N_AB1B2 / (N_AB1 N_AB2)
double g2_conditional(const CountSummary& c);

/// Poisson standard errors, propagated through the estimators. A zero count is
/// given an uncertainty of one count.
double g2_unconditioned_stderr(const CountSummary& c);
double g2_conditional_stderr(const CountSummary& c);

struct G2Point {
  std::int64_t tau_ps = 0;
  double g2 = 0.0;
  double std_error = 0.0;
  CountSummary counts;
};

struct DelaySweep {
  std::int64_t tau_min_ps = -20'000;
  std::int64_t tau_max_ps = 20'000;
  std::int64_t tau_step_ps = 500;

  std::vector<std::int64_t> delays() const;
};

/// Estimator evaluated at every delay of the sweep; delays are processed in
/// parallel against the shared read-only streams. A delay whose estimator is
/// undefined (zero denominator) gets NaN for g2 and its error.
std::vector<G2Point> g2_curve(const TagSet& tags, const CoincConfig& cfg, const DelaySweep& sweep, bool conditional);

/// dt (R_AB1 R_B2 + R_AB2 R_B1): expected triple rate from a genuine herald-B
/// coincidence meeting an uncorrelated click on the other B detector.
double accidental_triple_rate(double r_ab1, double r_b2, double r_ab2, double r_b1, double window_s);

/// dt R_A (R_B1 / R_AB1 + R_B2 / R_AB2): heralded g2(0) floor set by accidentals.
double g2_accidental_offset(double r_a, double r_b1, double r_ab1, double r_b2, double r_ab2, double window_s);

/// Background-subtracted counts (real-valued): singles minus dark_rate * T,
/// doubles minus the accidental expectation R_X R_Y dt T.
struct CorrectedCounts {
  double n_a = 0.0;
  double n_b1 = 0.0;
  double n_b2 = 0.0;
  double n_b1b2 = 0.0;
  double n_ab1 = 0.0;
  double n_ab2 = 0.0;
};

CorrectedCounts subtract_background(const CountSummary& c, const std::array<double, kChannelCount>& dark_rates);

void to_json(nlohmann::json& j, const CountSummary& c);

}  // namespace sppq
