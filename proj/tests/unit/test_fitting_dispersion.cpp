#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "sppq/dispersion.hpp"
#include "sppq/errors.hpp"
#include "sppq/fitting.hpp"

using namespace sppq;

namespace {

DecaySeries noiseless(double n0, double ell) {
  DecaySeries s;
  for (double l = 5.0; l <= 30.0 + 1e-9; l += 2.5) {
    s.lengths_um.push_back(l);
    s.counts.push_back(n0 * std::exp(-l / ell));
  }
  return s;
}

}  // namespace

TEST_CASE("noiseless decay is recovered exactly") {
  const auto f = fit_exponential(noiseless(1000.0, 9.8));
  CHECK(std::abs(f.ell_um - 9.8) < 1e-6);
  CHECK(f.n0 == doctest::Approx(1000.0).epsilon(1e-8));
  CHECK(f.chi2 < 1e-12);
  CHECK(f.dof == 9);
  CHECK(f.sigma_ell > 0.0);
}

TEST_CASE("scaling the counts scales only the prefactor") {
  const auto a = fit_exponential(noiseless(1000.0, 9.8));
  auto s = noiseless(1000.0, 9.8);
  for (auto& c : s.counts) c *= 7.0;
  const auto b = fit_exponential(s);
  CHECK(b.ell_um == doctest::Approx(a.ell_um).epsilon(1e-9));
  CHECK(b.n0 == doctest::Approx(7.0 * a.n0).epsilon(1e-9));
  // Poisson weights: relative error shrinks as 1/sqrt(c)
  CHECK(b.sigma_ell / b.ell_um == doctest::Approx(a.sigma_ell / a.ell_um / std::sqrt(7.0)).epsilon(1e-6));

  // explicit errors scaled with the counts leave the relative error unchanged
  auto e1 = noiseless(1000.0, 9.8);
  e1.count_errors = std::vector<double>(e1.counts.size());
  for (std::size_t i = 0; i < e1.counts.size(); ++i) (*e1.count_errors)[i] = 0.05 * e1.counts[i];
  auto e7 = e1;
  for (auto& c : e7.counts) c *= 7.0;
  for (auto& e : *e7.count_errors) e *= 7.0;
  const auto f1 = fit_exponential(e1), f7 = fit_exponential(e7);
  CHECK(f7.ell_um == doctest::Approx(f1.ell_um).epsilon(1e-9));
  CHECK(f7.sigma_ell / f7.ell_um == doctest::Approx(f1.sigma_ell / f1.ell_um).epsilon(1e-9));
  CHECK(f7.n0 == doctest::Approx(7.0 * f1.n0).epsilon(1e-9));
}

TEST_CASE("noisy sweeps scatter around the truth") {
  std::mt19937_64 rng(17);
  const auto truth = noiseless(5000.0, 9.8);
  int inside = 0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    DecaySeries s = truth;
    for (auto& c : s.counts) c = static_cast<double>(std::poisson_distribution<long>(c)(rng));
    const auto f = fit_exponential(s);
    inside += std::abs(f.ell_um - 9.8) <= f.sigma_ell;
  }
  // binomial(100, 0.68): 5 sigma is about +-23
  CHECK(inside > 45);
  CHECK(inside < 91);
}

TEST_CASE("zero counts enter the fit with unit error") {
  auto s = noiseless(50.0, 3.0);
  s.counts.back() = 0.0;
  const auto f = fit_exponential(s);
  CHECK(std::isfinite(f.ell_um));
  CHECK(f.ell_um == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("bad series are rejected") {
  DecaySeries s{{5, 7.5}, {10, 5}, {}};
  CHECK_THROWS_AS(s.validate(), InputError);
  s = DecaySeries{{5, 5, 10}, {10, 5, 2}, {}};
  CHECK_THROWS_AS(s.validate(), InputError);
  s = DecaySeries{{5, 7.5, 10}, {10, -1, 2}, {}};
  CHECK_THROWS_AS(s.validate(), InputError);
  s = DecaySeries{{5, 7.5, 10}, {0, 0, 0}, {}};
  CHECK_THROWS_AS(fit_exponential(s), FitError);
  s = DecaySeries{{5, 7.5, 10}, {10, 0, 0}, {}};
  CHECK_THROWS_AS(fit_exponential(s), FitError);
}

TEST_CASE("decay CSV") {
  const auto s = decay_series_from_csv("length_um,counts\n5,100\n7.5,80\n10,64\n");
  CHECK(s.lengths_um == std::vector<double>{5, 7.5, 10});
  CHECK(s.counts == std::vector<double>{100, 80, 64});
  CHECK_FALSE(s.count_errors.has_value());

  const auto e = decay_series_from_csv("length_um,counts,error\n5,100,3\n7.5,80,2\n10,64,1\n");
  REQUIRE(e.count_errors.has_value());
  CHECK((*e.count_errors)[2] == 1.0);

  try {
    decay_series_from_csv("length_um,counts\n5,100\n7.5,abc\n");
    FAIL("expected a parse error");
  } catch (const ParseError& err) {
    CHECK(err.offset() == 27);
  }
  CHECK_THROWS_AS(decay_series_from_csv("L,N\n5,1\n"), ParseError);
  CHECK_THROWS_AS(decay_series_from_csv("length_um,counts\n5,1,2\n"), ParseError);
}

TEST_CASE("fit JSON fields") {
  const nlohmann::json j = fit_exponential(noiseless(1000.0, 9.8));
  for (const char* k : {"N0", "ell_um", "sigma_ell", "chi2", "dof"}) CHECK(j.contains(k));
}

TEST_CASE("flat-interface limit") {
  const std::complex<double> eps{-24.7, 1.5};
  StripeParams p;
  p.eps_metal = eps;
  p.width_um = std::numeric_limits<double>::infinity();
  const double k0 = 2.0 * std::numbers::pi / 0.808;
  const double flat = k0 * std::sqrt(eps.real() / (1.0 + eps.real()));
  CHECK(std::abs(spp_wavevector(p) - flat) < 1e-9);
  CHECK(std::abs(flat_interface_wavevector(808.0, eps) - flat) < 1e-9);
  CHECK(std::abs(grating_period(p, 1) - 808.0 * std::sqrt((1.0 + eps.real()) / eps.real())) < 1e-9);
}

TEST_CASE("stripe wavevector and grating period") {
  StripeParams p;
  p.eps_metal = gold_permittivity(808.0);
  const double k = spp_wavevector(p);
  CHECK(k == doctest::Approx(7.83).epsilon(0.02));
  const double period = grating_period(p, 1);
  CHECK(period == doctest::Approx(802.0).epsilon(0.02));
  CHECK(period < 808.0);
  CHECK(grating_period(p, 2) == doctest::Approx(2.0 * period).epsilon(1e-15));
  CHECK(2.0 * std::numbers::pi / (period * 1e-3) == doctest::Approx(k).epsilon(1e-14));

  double last = 0.0;
  for (double w : {1.0, 2.0, 3.0, 5.0, 10.0, 100.0}) {
    p.width_um = w;
    const double kw = spp_wavevector(p);
    CHECK(kw > last);
    last = kw;
  }
  CHECK(last < flat_interface_wavevector(808.0, p.eps_metal));
}

TEST_CASE("cutoff and domain errors") {
  StripeParams p;
  p.width_um = 0.05;
  try {
    spp_wavevector(p);
    FAIL("expected cutoff");
  } catch (const CutoffError& e) {
    CHECK(std::string(e.what()).find("0.05") != std::string::npos);
  }
  p.width_um = 3.0;
  p.eps_metal = {-0.5, 1.0};
  CHECK_THROWS_AS(p.validate(), DomainError);
  CHECK_THROWS_AS(grating_period(StripeParams{}, 0), DomainError);
  CHECK_THROWS_AS(gold_permittivity(300.0), DomainError);
  CHECK_THROWS_AS(gold_permittivity(3000.0), DomainError);
}

TEST_CASE("gold table is metallic across its range") {
  for (double wl = 500.0; wl <= 1900.0; wl += 50.0) {
    const auto e = gold_permittivity(wl);
    CHECK(e.real() < -1.0);
    CHECK(e.imag() > 0.0);
  }
  // more negative toward the infrared
  CHECK(gold_permittivity(1200.0).real() < gold_permittivity(800.0).real());
}
