#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "sppq/errors.hpp"
#include "sppq/fock_model.hpp"

using namespace sppq;

namespace {

double total(const PhotonNumberDist& d) {
  double s = 0.0;
  for (double p : d.probs()) s += p;
  return s;
}

PhotonNumberDist random_dist(std::mt19937_64& rng, int nt) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(static_cast<std::size_t>(nt) + 1);
  for (auto& x : p) x = u(rng);
  return PhotonNumberDist::from_probabilities(p);
}

}  // namespace

TEST_CASE("fock states put all weight on one number") {
  for (int n : {0, 1, 2}) {
    const auto d = PhotonNumberDist::fock(n);
    for (int k = 0; k <= d.truncation(); ++k) CHECK(d[k] == (k == n ? 1.0 : 0.0));
  }
  CHECK(PhotonNumberDist::vacuum()[0] == 1.0);
  CHECK_THROWS_AS(PhotonNumberDist::fock(31, 30), TruncationError);
  CHECK_THROWS_AS(PhotonNumberDist::fock(-1), DomainError);
}

TEST_CASE("coherent(1) matches the quoted Poisson populations") {
  const auto d = PhotonNumberDist::coherent(1.0);
  const double quoted[] = {0.368, 0.368, 0.184, 0.061, 0.015, 0.003};
  for (int n = 0; n < 6; ++n) CHECK(std::abs(d[n] - quoted[n]) <= 5e-4);
  CHECK(PhotonNumberDist::coherent(0.0)[0] == 1.0);
}

TEST_CASE("coherent(1.2) follows the Poisson formula") {
  const auto d = PhotonNumberDist::coherent(1.2);
  const auto ref = oracle::poisson_pmf(1.2, d.truncation());
  for (int n = 0; n <= d.truncation(); ++n) CHECK(d[n] == doctest::Approx(ref[n]).epsilon(1e-9));
  CHECK(d[1] == doctest::Approx(1.2 * std::exp(-1.2)).epsilon(1e-9));
}

TEST_CASE("a large tail is rejected instead of renormalized") {
  CHECK_THROWS_AS(PhotonNumberDist::coherent(20.0, 30), TruncationError);
  CHECK_THROWS_AS(PhotonNumberDist::thermal(5.0, 30), TruncationError);
  CHECK_THROWS_AS(PhotonNumberDist::coherent(1.2, 6), TruncationError);
}

TEST_CASE("thermal distribution") {
  CHECK(PhotonNumberDist::thermal(0.0)[0] == 1.0);
  CHECK(PhotonNumberDist::thermal(0.5)[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(std::abs(g2_zero(PhotonNumberDist::thermal(1.0, 60)) - 2.0) < 1e-6);
}

TEST_CASE("g2 of number states is 1 - 1/n") {
  CHECK(g2_zero(PhotonNumberDist::fock(1)) == 0.0);
  CHECK(g2_zero(PhotonNumberDist::fock(2)) == doctest::Approx(0.5).epsilon(1e-15));
  for (int n = 1; n <= 10; ++n) {
    CHECK(std::abs(g2_zero(PhotonNumberDist::fock(n)) - (1.0 - 1.0 / n)) < 1e-12);
  }
  CHECK_THROWS_AS(g2_zero(PhotonNumberDist::vacuum()), UndefinedStatisticError);
}

TEST_CASE("classical states sit at g2 = 1 and g2 = 2") {
  for (double x : {0.2, 1.0, 3.0}) {
    CHECK(std::abs(g2_zero(PhotonNumberDist::coherent(x, 60)) - 1.0) < 1e-6);
    CHECK(std::abs(g2_zero(PhotonNumberDist::thermal(x, 60)) - 2.0) < 1e-5);
  }
}

TEST_CASE("apply_loss examples") {
  const auto c = PhotonNumberDist::coherent(2.0);
  const auto same = apply_loss(c, 1.0);
  for (int n = 0; n <= c.truncation(); ++n) CHECK(same[n] == doctest::Approx(c[n]).epsilon(1e-15));

  const auto half = apply_loss(PhotonNumberDist::fock(1), 0.5);
  CHECK(half[0] == doctest::Approx(0.5));
  CHECK(half[1] == doctest::Approx(0.5));

  const auto thinned = apply_loss(c, 0.3);
  const auto target = PhotonNumberDist::coherent(0.6);
  for (int n = 0; n <= target.truncation(); ++n) CHECK(std::abs(thinned[n] - target[n]) < 1e-9);

  CHECK_THROWS_AS(apply_loss(c, 1.5), DomainError);
  CHECK_THROWS_AS(apply_loss(c, -0.1), DomainError);
}

TEST_CASE("apply_loss agrees with an explicit binomial sum") {
  std::mt19937_64 rng(11);
  const auto d = random_dist(rng, 12);
  const double eta = 0.37;
  const auto out = apply_loss(d, eta);
  for (int m = 0; m <= 12; ++m) {
    double ref = 0.0;
    for (int n = m; n <= 12; ++n) ref += oracle::binomial(n, m) * std::pow(eta, m) * std::pow(1 - eta, n - m) * d[n];
    CHECK(std::abs(out[m] - ref) < 1e-12);
  }
}

TEST_CASE("loss properties on random distributions") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = random_dist(rng, 15);
    CHECK(std::abs(total(d) - 1.0) < 1e-9);
    for (double eta : {0.1, 0.5, 0.9}) {
      const auto out = apply_loss(d, eta);
      CHECK(std::abs(total(out) - 1.0) < 1e-9);
      CHECK(std::abs(out.mean() - eta * d.mean()) < 1e-9);
      CHECK(std::abs(out.factorial_moment(2) - eta * eta * d.factorial_moment(2)) < 1e-9);
      CHECK(std::abs(g2_zero(out) - g2_zero(d)) < 1e-9);
    }
    const auto ab = apply_loss(apply_loss(d, 0.6), 0.7);
    const auto direct = apply_loss(d, 0.42);
    for (int n = 0; n <= 15; ++n) CHECK(std::abs(ab[n] - direct[n]) < 1e-9);
  }
}

TEST_CASE("click probabilities for a splitter and two on/off detectors") {
  const auto v = click_probabilities(PhotonNumberDist::vacuum(), 0.5, 0.5);
  CHECK(v.b1 == 0.0);
  CHECK(v.b2 == 0.0);
  CHECK(v.both == 0.0);

  const auto one = click_probabilities(PhotonNumberDist::fock(1), 1.0, 1.0);
  CHECK(one.b1 == doctest::Approx(0.5));
  CHECK(one.b2 == doctest::Approx(0.5));
  CHECK(one.both == 0.0);

  const auto two = click_probabilities(PhotonNumberDist::fock(2), 1.0, 1.0);
  CHECK(two.b1 == doctest::Approx(0.75));
  CHECK(two.b2 == doctest::Approx(0.75));
  CHECK(two.both == doctest::Approx(0.5));

  // coherent light: independent Poisson outputs, 1 - exp(-eta x / 2) each
  const auto coh = click_probabilities(PhotonNumberDist::coherent(1.0, 40), 0.4, 0.6);
  CHECK(coh.b1 == doctest::Approx(1.0 - std::exp(-0.2)).epsilon(1e-9));
  CHECK(coh.b2 == doctest::Approx(1.0 - std::exp(-0.3)).epsilon(1e-9));
  CHECK(coh.both == doctest::Approx(coh.b1 * coh.b2).epsilon(1e-9));
}

TEST_CASE("json round trip") {
  const auto d = PhotonNumberDist::coherent(0.7, 12);
  nlohmann::json j = d;
  CHECK(j.at("n_t") == 12);
  const auto back = photon_number_dist_from_json(j);
  for (int n = 0; n <= 12; ++n) CHECK(back[n] == doctest::Approx(d[n]).epsilon(1e-15));
  j["probs"].push_back(0.0);
  CHECK_THROWS_AS(photon_number_dist_from_json(j), InputError);
}
