#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "sppq/coincidence.hpp"
#include "sppq/errors.hpp"
#include "sppq/pipeline.hpp"
#include "sppq/source_sim.hpp"

using namespace sppq;

namespace {

TagSet make_tags(TagStream a, TagStream b1, TagStream b2, std::uint64_t duration) {
  TagSet t;
  t[Channel::A] = std::move(a);
  t[Channel::B1] = std::move(b1);
  t[Channel::B2] = std::move(b2);
  t.duration_ps = duration;
  return t;
}

CoincConfig config(std::uint64_t window, std::uint64_t duration) {
  CoincConfig c;
  c.window_ps = window;
  c.integration_time_ps = duration;
  return c;
}

}  // namespace

TEST_CASE("pair counting examples") {
  const TagStream x{100, 5000, 9000, 20000};
  CHECK(count_pairs(x, x, 2000, 0) == x.size());
  const TagStream far{40000, 50000};
  CHECK(count_pairs(x, far, 2000, 0) == 0);
  // window edges are inclusive: |dt| <= window / 2
  CHECK(count_pairs(TagStream{1000}, TagStream{2000}, 2000, 0) == 1);
  CHECK(count_pairs(TagStream{1000}, TagStream{2001}, 2000, 0) == 0);
  CHECK(count_pairs(TagStream{1000}, TagStream{6000}, 2000, 5000) == 1);
  CHECK_THROWS_AS(count_pairs(TagStream{5, 3}, x, 2000, 0), InputError);
}

TEST_CASE("each tag is used at most once") {
  // two X tags competing for one Y tag
  CHECK(count_pairs(TagStream{1000, 1100}, TagStream{1050}, 2000, 0) == 1);
  CHECK(count_pairs(TagStream{1000, 1000}, TagStream{1000, 1000, 1000}, 2000, 0) == 2);
}

TEST_CASE("pair counting is symmetric under swapping streams") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = oracle::random_stream(rng, 300, 200'000);
    const auto y = oracle::random_stream(rng, 250, 200'000);
    const std::int64_t tau = static_cast<std::int64_t>(rng() % 8001) - 4000;
    const auto xy = count_pairs(x, y, 2000, tau);
    CHECK(xy == count_pairs(y, x, 2000, -tau));
    CHECK(xy == oracle::pairs(x, y, 2000, tau));
  }
}

TEST_CASE("triple counting examples") {
  const TagStream a{1000, 30000, 70000};
  CHECK(count_triples(a, a, a, 2000, 0) == a.size());
  CHECK(count_triples(a, a, TagStream{}, 2000, 0) == 0);
  CHECK_THROWS_AS(count_triples(TagStream{2, 1}, a, a, 2000, 0), InputError);
}

TEST_CASE("triples never exceed the pair counts on random streams") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto base = oracle::random_stream(rng, 400, 400'000);
    const auto b1 = oracle::correlated_stream(rng, base, 0.6, 800);
    const auto b2 = oracle::correlated_stream(rng, base, 0.6, 800);
    TagSet t = make_tags(base, b1, b2, 400'001);
    const auto s = summarize(t, config(2000, 400'001), 0);
    CHECK(s.n_ab1b2 <= std::min(s.n_ab1, s.n_ab2));
    CHECK(s.n_ab1 <= std::min(s.n_a, s.n_b1));
    CHECK(s.n_b1b2 <= std::min(s.n_b1, s.n_b2));
    CHECK(s.n_ab1b2 == oracle::triples(base, b1, b2, 2000, 0, 0));
  }
}

TEST_CASE("channel delays shift the streams before counting") {
  TagSet t = make_tags({1000}, {11000}, {1000}, 20000);
  CoincConfig c = config(2000, 20000);
  CHECK(summarize(t, c, 0).n_ab1 == 0);
  c.channel_delays_ps = {0, -10000, 0};
  const auto s = summarize(t, c, 0);
  CHECK(s.n_ab1 == 1);
  CHECK(s.n_ab1b2 == 1);
}

TEST_CASE("hand-built unconditioned g2") {
  // one B1-B2 coincidence over T = 10 ns with a 2 ns window: 1 * 10 / (1 * 1 * 2)
  const TagSet t = make_tags({}, {1000}, {1500}, 10'000);
  const auto s = summarize(t, config(2000, 10'000), 0);
  CHECK(s.n_b1b2 == 1);
  CHECK(g2_unconditioned(s) == doctest::Approx(5.0).epsilon(1e-15));

  const TagSet none = make_tags({}, {1000}, {8000}, 10'000);
  CHECK(g2_unconditioned(summarize(none, config(2000, 10'000), 0)) == 0.0);
  CHECK_THROWS_AS(g2_unconditioned(summarize(make_tags({}, {}, {1}, 10), config(2, 10), 0)),
                  UndefinedStatisticError);
}

TEST_CASE("hand-built conditional g2 with one triple") {
  // N_A = 3, N_AB1 = 2, N_AB2 = 1, N_AB1B2 = 1 -> 3 * 1 / (2 * 1)
  const TagSet t = make_tags({1000, 50000, 90000}, {1200, 50300}, {900}, 100'000);
  const auto s = summarize(t, config(2000, 100'000), 0);
  CHECK(s.n_a == 3);
  CHECK(s.n_ab1 == 2);
  CHECK(s.n_ab2 == 1);
  CHECK(s.n_ab1b2 == 1);
  CHECK(g2_conditional(s) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(g2_conditional_stderr(s) > 0.0);
  CHECK_THROWS_AS(g2_conditional(summarize(make_tags({1000}, {1000}, {}, 2000), config(2000, 2000), 0)),
                  UndefinedStatisticError);
}

TEST_CASE("independent Poisson streams follow the accidental formulas") {
  const double r1 = 5e6, r2 = 5e6, r3 = 5e6, t_s = 1.0, dt = 2e-9;
  const auto a = generate_laser_arrivals(r1, t_s, 101);
  const auto b1 = generate_laser_arrivals(r2, t_s, 102);
  const auto b2 = generate_laser_arrivals(r3, t_s, 103);
  const double ra = a.size() / t_s, rb1 = b1.size() / t_s, rb2 = b2.size() / t_s;

  // pairs at lower rates, where single-use matching loses well under 1 sigma
  const auto x = generate_laser_arrivals(1e6, t_s, 104);
  const auto y = generate_laser_arrivals(1e6, t_s, 105);
  const double pairs = static_cast<double>(count_pairs(x, y, 2000, 0));
  const double pairs_expected = x.size() / t_s * y.size() / t_s * dt * t_s;
  CHECK(std::abs(pairs - pairs_expected) <= 3.0 * std::sqrt(pairs_expected));

  // all-random triples: both B tags land in the window independently
  const double triples = static_cast<double>(count_triples(a, b1, b2, 2000, 0));
  const double triples_expected = ra * rb1 * rb2 * dt * dt * t_s;
  CHECK(std::abs(triples - triples_expected) <= 3.0 * std::sqrt(triples_expected));
}

TEST_CASE("accidental formulas") {
  CHECK(accidental_triple_rate(0, 0, 0, 0, 2e-9) == 0.0);
  CHECK(accidental_triple_rate(1e4, 5e4, 1e4, 5e4, 2e-9) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(accidental_triple_rate(-1, 0, 0, 0, 1e-9), DomainError);

  CHECK(g2_accidental_offset(1e6, 0, 1e4, 0, 1e4, 2e-9) == 0.0);
  const double g = g2_accidental_offset(1e6, 5e4, 1e4, 6e4, 2e4, 2e-9);
  CHECK(g2_accidental_offset(1e6, 5e4, 1e4, 6e4, 2e4, 4e-9) == doctest::Approx(2.0 * g).epsilon(1e-15));
  CHECK_THROWS_AS(g2_accidental_offset(1e6, 1, 0, 1, 1, 2e-9), UndefinedStatisticError);
}

TEST_CASE("background subtraction") {
  CountSummary c;
  c.n_a = 1000;
  c.n_b1 = 2000;
  c.n_b2 = 3000;
  c.n_ab1 = 50;
  c.n_b1b2 = 10;
  c.window_ps = 2000;
  c.integration_time_ps = kPicosecondsPerSecond;
  const auto r = subtract_background(c, {100.0, 200.0, 300.0});
  CHECK(r.n_a == doctest::Approx(900.0));
  CHECK(r.n_b1 == doctest::Approx(1800.0));
  CHECK(r.n_ab1 == doctest::Approx(50.0 - 1000.0 * 2000.0 * 2e-9));
  CHECK(r.n_b1b2 == doctest::Approx(10.0 - 2000.0 * 3000.0 * 2e-9));
}

TEST_CASE("delay sweep") {
  const auto d = DelaySweep{-1000, 1000, 500}.delays();
  CHECK(d == std::vector<std::int64_t>{-1000, -500, 0, 500, 1000});
  CHECK_THROWS_AS((DelaySweep{0, 10, 0}.delays()), DomainError);
  CHECK_THROWS_AS((DelaySweep{10, 0, 5}.delays()), DomainError);
}

TEST_CASE("laser g2 curve is flat and symmetric") {
  TagSet t;
  t.duration_ps = kPicosecondsPerSecond;
  t[Channel::B1] = generate_laser_arrivals(3e5, 1.0, 201);
  t[Channel::B2] = generate_laser_arrivals(3e5, 1.0, 202);
  t[Channel::A] = {};
  const auto curve = g2_curve(t, config(2000, t.duration_ps), DelaySweep{-10'000, 10'000, 1000}, false);
  REQUIRE(curve.size() == 21);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto& p = curve[i];
    const auto& q = curve[curve.size() - 1 - i];
    CHECK(p.tau_ps == -q.tau_ps);
    CHECK(std::abs(p.g2 - 1.0) <= 5.0 * p.std_error);
    CHECK(std::abs(p.g2 - q.g2) <= 5.0 * std::hypot(p.std_error, q.std_error));
  }
}

TEST_CASE("heralded source shows the antibunching dip") {
  ChainSpec c;
  c.source.pair_rate = 1e6;
  c.herald_transmission = 0.5;
  c.duration_s = 1.0;
  const TagSet t = simulate_chain(c, 301);
  const auto s = summarize(t, config(2000, t.duration_ps), 0);
  CHECK(g2_conditional(s) < 0.5);

  // an unconditioned look at one arm of a pair source is classical
  const auto far = summarize(t, config(2000, t.duration_ps), 15'000);
  CHECK(g2_unconditioned(far) >= 1.0 - 3.0 * g2_unconditioned_stderr(far));
}

TEST_CASE("undefined curve points are NaN, not fatal") {
  const TagSet t = make_tags({1000}, {1000}, {1000}, 100'000);
  const auto curve = g2_curve(t, config(2000, 100'000), DelaySweep{0, 50'000, 50'000}, true);
  REQUIRE(curve.size() == 2);
  CHECK(curve[0].g2 == 1.0);
  CHECK(std::isnan(curve[1].g2));
  CHECK(std::isnan(curve[1].std_error));
}
