#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "sppq/errors.hpp"
#include "sppq/fock_model.hpp"
#include "sppq/optics_chain.hpp"
#include "sppq/pipeline.hpp"
#include "sppq/source_sim.hpp"

using namespace sppq;

namespace {

DetectorSpec ideal() {
  DetectorSpec d;
  d.efficiency = 1.0;
  d.dark_rate = 0.0;
  d.jitter_sigma_ps = 0.0;
  d.dead_time_ps = 0;
  return d;
}

bool within_sigma(double value, double mean, double sigma, double k) { return std::abs(value - mean) <= k * sigma; }

}  // namespace

TEST_CASE("pair generation") {
  SourceSpec s;
  auto empty = generate_spdc_pairs(s, 1.0, 1);
  CHECK(empty.arm_a.empty());
  CHECK(empty.arm_b.empty());

  s.pair_rate = 1e6;
  const auto p = generate_spdc_pairs(s, 1.0, 2);
  CHECK(within_sigma(static_cast<double>(p.arm_a.size()), 1e6, 1e3, 5));
  CHECK(p.arm_a == p.arm_b);
  CHECK(std::is_sorted(p.arm_a.begin(), p.arm_a.end()));

  const auto again = generate_spdc_pairs(s, 1.0, 2);
  CHECK(again.arm_a == p.arm_a);
  CHECK(generate_spdc_pairs(s, 1.0, 3).arm_a != p.arm_a);
}

TEST_CASE("double pairs appear at the configured fraction") {
  SourceSpec s;
  s.pair_rate = 1e6;
  s.double_pair_prob = 0.01;
  const auto p = generate_spdc_pairs(s, 1.0, 4);
  // every double event adds one extra arrival per arm at an identical time
  std::size_t doubles = 0;
  for (std::size_t i = 1; i < p.arm_a.size(); ++i) doubles += p.arm_a[i] == p.arm_a[i - 1];
  const double events = static_cast<double>(p.arm_a.size() - doubles);
  const double expected = events * 0.01;
  CHECK(within_sigma(static_cast<double>(doubles), expected, std::sqrt(expected * 0.99), 3));
  CHECK(p.arm_a.size() == p.arm_b.size());

  s.double_pair_prob = 0.2;
  CHECK_THROWS_AS(s.validate(), DomainError);
}

TEST_CASE("laser arrivals are Poissonian") {
  CHECK(generate_laser_arrivals(0.0, 1.0, 1).empty());
  const auto t = generate_laser_arrivals(1e6, 1.0, 7);
  CHECK(within_sigma(static_cast<double>(t.size()), 1e6, 1e3, 5));

  std::vector<double> gaps;
  gaps.reserve(t.size());
  for (std::size_t i = 1; i < t.size(); ++i) gaps.push_back(static_cast<double>(t[i] - t[i - 1]));
  // 1 ps ticks; the exponential is sampled finely enough at a 1 us mean gap
  const double d = oracle::ks_exponential(gaps, 1e-6);
  CHECK(oracle::ks_pvalue(d, gaps.size()) > 0.01);
}

TEST_CASE("ideal detector passes arrivals unchanged") {
  const auto t = generate_laser_arrivals(1e5, 0.1, 9);
  CHECK(detect(t, ideal(), Channel::A, 0.1, 3) == t);
}

TEST_CASE("detector efficiency, darks and dead time") {
  const auto t = generate_laser_arrivals(1e6, 1.0, 10);
  DetectorSpec half = ideal();
  half.efficiency = 0.5;
  const auto kept = detect(t, half, Channel::B1, 1.0, 11);
  const double n = static_cast<double>(t.size());
  CHECK(within_sigma(static_cast<double>(kept.size()), 0.5 * n, std::sqrt(0.25 * n), 5));

  DetectorSpec dark = ideal();
  dark.dark_rate = 1000.0;
  const auto darks = detect({}, dark, Channel::B2, 1.0, 12);
  CHECK(within_sigma(static_cast<double>(darks.size()), 1000.0, std::sqrt(1000.0), 3));

  DetectorSpec real;
  const auto tags = detect(t, real, Channel::A, 1.0, 13);
  CHECK(std::is_sorted(tags.begin(), tags.end()));
  for (std::size_t i = 1; i < tags.size(); ++i) REQUIRE(tags[i] - tags[i - 1] >= real.dead_time_ps);
  CHECK(tags.back() < kPicosecondsPerSecond);
  CHECK(detect(t, real, Channel::A, 1.0, 13) == tags);
}

TEST_CASE("dead-time filter keeps the first tag of each burst") {
  const std::vector<Timestamp> s{0, 10, 49, 50, 120, 130, 171};
  CHECK(apply_dead_time(s, 50) == std::vector<Timestamp>{0, 50, 120, 171});
  CHECK(apply_dead_time(s, 0) == s);
}

TEST_CASE("waveguide survival") {
  WaveguideSpec w;
  w.length_um = 0.0;
  CHECK(waveguide_survival(w) == 1.0);
  w.length_um = w.prop_length_um;
  CHECK(waveguide_survival(w) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  w.pol_angle_rad = std::numbers::pi / 2;
  CHECK(waveguide_survival(w) < 1e-30);
  w.pol_angle_rad = 0.3;
  w.coupling_in = 0.5;
  w.coupling_out = 0.4;
  CHECK(waveguide_survival(w) == doctest::Approx(0.2 * std::pow(std::cos(0.3), 2) * std::exp(-1.0)));
  w.coupling_in = 1.2;
  CHECK_THROWS_AS(w.validate(), DomainError);
}

TEST_CASE("thinning") {
  const auto t = generate_laser_arrivals(1e6, 1.0, 20);
  CHECK(thin_stream(t, 1.0, 1) == t);
  CHECK(thin_stream(t, 0.0, 1).empty());
  const auto k = thin_stream(t, std::exp(-1.0), 21);
  const double n = static_cast<double>(t.size()), p = std::exp(-1.0);
  CHECK(within_sigma(static_cast<double>(k.size()), n * p, std::sqrt(n * p * (1 - p)), 5));
  CHECK(std::includes(t.begin(), t.end(), k.begin(), k.end()));
  CHECK_THROWS_AS(thin_stream(t, 1.1, 1), DomainError);
}

TEST_CASE("splitter partitions its input") {
  const auto t = generate_laser_arrivals(1e6, 1.0, 30);
  const auto all = split_stream(t, 1.0, 1);
  CHECK(all.b1 == t);
  CHECK(all.b2.empty());

  const auto s = split_stream(t, 0.5, 31);
  const double n = static_cast<double>(t.size());
  CHECK(within_sigma(static_cast<double>(s.b1.size()) - static_cast<double>(s.b2.size()), 0.0, std::sqrt(n), 5));
  std::vector<Timestamp> merged;
  std::merge(s.b1.begin(), s.b1.end(), s.b2.begin(), s.b2.end(), std::back_inserter(merged));
  CHECK(merged == t);
}

TEST_CASE("chain singles rates match the analytic click probabilities") {
  ChainSpec c;
  c.source.pair_rate = 2e5;
  c.duration_s = 2.0;
  for (auto& d : c.detectors) {
    d.dark_rate = 0.0;
    d.dead_time_ps = 0;
  }
  const TagSet tags = simulate_chain(c, 40);
  const double eta_b = c.arm_b_transmission();
  // one photon per pair in arm B: the splitter and detectors see fock(1) per event
  const auto clicks = click_probabilities(PhotonNumberDist::fock(1), eta_b * c.detectors[1].efficiency,
                                          eta_b * c.detectors[2].efficiency);
  const double events = c.source.pair_rate * c.duration_s;
  for (auto [ch, p] : {std::pair{Channel::B1, clicks.b1}, std::pair{Channel::B2, clicks.b2}}) {
    const double expected = events * p;
    CHECK(within_sigma(static_cast<double>(tags[ch].size()), expected, std::sqrt(expected), 5));
  }
  const double herald = events * c.herald_transmission * c.detectors[0].efficiency;
  CHECK(within_sigma(static_cast<double>(tags[Channel::A].size()), herald, std::sqrt(herald), 5));
}

TEST_CASE("chain output does not depend on chunking order or repetition") {
  ChainSpec c;
  c.source.pair_rate = 5e6;
  c.duration_s = 1.0;  // spans more than one chunk
  const TagSet a = simulate_chain(c, 77);
  const TagSet b = simulate_chain(c, 77);
  CHECK(a == b);
  for (const auto& s : a.streams) {
    CHECK(std::is_sorted(s.begin(), s.end()));
    for (std::size_t i = 1; i < s.size(); ++i) REQUIRE(s[i] - s[i - 1] >= c.detectors[0].dead_time_ps);
  }
}
