#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace sppq {

/// Counts recorded behind waveguides of increasing length.
struct DecaySeries {
  std::vector<double> lengths_um;
  std::vector<double> counts;
  std::optional<std::vector<double>> count_errors;  ///< defaults to max(sqrt(N), 1)

  void validate() const;
};

struct DecayFit {
  double n0 = 0.0;
  double ell_um = 0.0;
  double sigma_n0 = 0.0;
  double sigma_ell = 0.0;
  double chi2 = 0.0;
  int dof = 0;
  int iterations = 0;
};

/// Weighted least squares of N(L) = N0 exp(-L / ell). Levenberg-Marquardt
/// iterations start from a log-linear regression over the non-zero points; the
/// uncertainties come from the inverse of the weighted normal matrix. Throws
/// FitError when the optimum is not finite.
DecayFit fit_exponential(const DecaySeries& s);

void to_json(nlohmann::json& j, const DecayFit& f);

/// Parses `length_um,counts[,error]` with a header line. Throws ParseError.
DecaySeries decay_series_from_csv(std::string_view text);

}  // namespace sppq
