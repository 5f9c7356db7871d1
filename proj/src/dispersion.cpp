#include "sppq/dispersion.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sppq/errors.hpp"

namespace sppq {
namespace {

struct OpticalConstant {
  double ev;
  double n;
  double k;
};

// Johnson & Christy, Phys. Rev. B 6, 4370 (1972), gold, low-energy rows.
constexpr std::array<OpticalConstant, 16> kGold{{
    {0.64, 0.92, 13.78}, {0.77, 0.56, 11.21}, {0.89, 0.43, 9.519}, {1.02, 0.35, 8.145},
    {1.14, 0.27, 7.150}, {1.26, 0.22, 6.350}, {1.39, 0.17, 5.663}, {1.51, 0.16, 5.083},
    {1.64, 0.14, 4.542}, {1.76, 0.13, 4.103}, {1.88, 0.14, 3.697}, {2.01, 0.21, 3.272},
    {2.13, 0.29, 2.863}, {2.26, 0.43, 2.455}, {2.38, 0.62, 2.081}, {2.50, 1.04, 1.833},
}};

constexpr double kEvNm = 1239.84193;

std::complex<double> eps_of(const OpticalConstant& c) {
  const std::complex<double> nk{c.n, c.k};
  return nk * nk;
}

double free_space_k(double wavelength_nm) {
  return 2.0 * std::numbers::pi / (wavelength_nm * 1e-3);
}

}  // namespace

void StripeParams::validate() const {
  if (!(wavelength_nm > 0.0) || !std::isfinite(wavelength_nm)) throw DomainError("wavelength must be > 0");
  if (!(eps_metal.real() < -1.0)) throw DomainError("Re(eps_metal) must be < -1 for a bound mode");
  if (!(width_um > 0.0)) throw DomainError("stripe width must be > 0");
}

double flat_interface_wavevector(double wavelength_nm, std::complex<double> eps_metal) {
  const double e = eps_metal.real();
  if (!(e < -1.0)) throw DomainError("Re(eps_metal) must be < -1 for a bound mode");
  return free_space_k(wavelength_nm) * std::sqrt(e / (1.0 + e));
}

double spp_wavevector(const StripeParams& p) {
  p.validate();
  const double flat = flat_interface_wavevector(p.wavelength_nm, p.eps_metal);
  if (std::isinf(p.width_um)) return flat;
  const double transverse = std::numbers::pi / p.width_um;
  const double radicand = flat * flat - transverse * transverse;
  if (!(radicand > 0.0)) {
    std::ostringstream os;
    os << "stripe mode is cut off at width " << p.width_um << " um (wavelength " << p.wavelength_nm << " nm)";
    throw CutoffError(os.str());
  }
  return std::sqrt(radicand);
}

double grating_period(const StripeParams& p, int order) {
  if (order < 1) throw DomainError("grating order must be >= 1");
  return 2.0 * std::numbers::pi * order / spp_wavevector(p) * 1e3;
}

std::complex<double> gold_permittivity(double wavelength_nm) {
  // table sorted by energy; walk it in wavelength order
  const double lo = kEvNm / kGold.back().ev;
  const double hi = kEvNm / kGold.front().ev;
  if (!(wavelength_nm >= lo && wavelength_nm <= hi)) {
    std::ostringstream os;
    os << "wavelength " << wavelength_nm << " nm outside the gold table [" << lo << ", " << hi << "] nm";
    throw DomainError(os.str());
  }
  for (std::size_t i = kGold.size() - 1; i > 0; --i) {
    const double l_short = kEvNm / kGold[i].ev;
    const double l_long = kEvNm / kGold[i - 1].ev;
    if (wavelength_nm <= l_long) {
      const double t = (wavelength_nm - l_short) / (l_long - l_short);
      return eps_of(kGold[i]) * (1.0 - t) + eps_of(kGold[i - 1]) * t;
    }
  }
  return eps_of(kGold.front());
}

}  // namespace sppq
