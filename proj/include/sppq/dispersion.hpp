#pragma once

#include <complex>

namespace sppq {

/// Gold stripe on a dielectric of index 1.
struct StripeParams {
  double wavelength_nm = 808.0;
  std::complex<double> eps_metal{-24.7, 1.5};
  double width_um = 3.0;  ///< +infinity selects the flat interface

  void validate() const;
};

/// Real part of the stripe-mode propagation constant in 1/um. Throws
/// CutoffError when the transverse term exceeds the flat-interface term.
double spp_wavevector(const StripeParams& p);

/// Flat-interface value, (w/c) sqrt(eps / (1 + eps)), in 1/um.
double flat_interface_wavevector(double wavelength_nm, std::complex<double> eps_metal);

/// First-order (m = 1) and higher grating periods matching k_sp, in nm.
double grating_period(const StripeParams& p, int order = 1);

/// Gold permittivity interpolated linearly in wavelength from the bundled
/// Johnson & Christy table (about 496 to 1937 nm). Throws DomainError outside.
std::complex<double> gold_permittivity(double wavelength_nm);

}  // namespace sppq
