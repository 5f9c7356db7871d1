#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sppq/fock_model.hpp"
#include "sppq/time_tags.hpp"

namespace sppq {

inline constexpr double kDefaultDetectionEfficiency = 0.55 / 2.0;

/// Detector efficiencies eta_nu at which no-click frequencies were recorded.
struct EfficiencyLadder {
  std::vector<double> etas;

  /// Entries in (0, 1], pairwise distinct, and more of them than n_t.
  void validate(int truncation) const;

  /// eta_nu = eta_d * N_B1(nu) / N_B1(0): efficiencies inferred from the singles
  /// recorded behind each filter setting.
  static EfficiencyLadder from_singles(double eta_d, std::span<const double> singles_per_setting,
                                       double singles_unattenuated);
};

/// No-click frequencies f_nu out of n_nu runs per ladder efficiency.
struct NoClickData {
  std::vector<double> freqs;
  std::vector<double> trials;
  std::optional<std::vector<double>> sigma;

  void validate() const;

  /// Fills sigma with the binomial sqrt(f (1 - f) / n).
  void set_binomial_sigma();
};

/// Row-major N x (n_t + 1) matrix of (1 - eta_nu)^n.
struct ResponseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double operator()(std::size_t nu, std::size_t n) const { return values[nu * cols + n]; }
};

/// p(eta) = sum_n (1 - eta)^n rho_n
double forward_noclick(const PhotonNumberDist& d, double eta);

ResponseMatrix build_response(const EfficiencyLadder& ladder, int truncation);

struct EmOptions {
  double epsilon = 1e-8;
  std::uint64_t max_iters = 1'000'000;
  bool record_loglik = false;
};

struct EmResult {
  PhotonNumberDist populations = PhotonNumberDist::vacuum(0);
  std::uint64_t iterations = 0;
  bool converged = false;
  double loglik = 0.0;
  std::vector<double> loglik_history;  ///< per iteration, starting with the uniform start
  double max_norm_error = 0.0;         ///< largest |sum rho - 1| seen over the iterations
};

/// Binomial log-likelihood sum_nu [n0 log p + (n - n0) log(1 - p)].
double noclick_loglik(const NoClickData& data, const ResponseMatrix& a, std::span<const double> rho);

/// Expectation-maximization solution of the linear positive problem p = A rho,
/// starting from the uniform distribution over 0..n_t. Each multiplicative update
/// is followed by projection onto sum rho = 1. Zero frequencies are replaced by
/// half a count, 1 / (2 n_nu).
EmResult em_reconstruct(const NoClickData& data, const EfficiencyLadder& ladder, int truncation,
                        const EmOptions& options = {});

/// Heralded no-click frequencies: n_0 = N_A - N_AB1(nu) eta_x with
/// eta_x = eta_d N_A / N_AB1(0). Throws DataInconsistencyError when a frequency
/// would go negative.
NoClickData noclick_from_heralded(double n_a, std::span<const double> n_ab1_per_eta, double eta_d,
                                  double n_ab1_at_full);

struct LaserWindows {
  std::uint64_t window_ps = 500'000;    ///< 500 ns gate
  std::uint64_t period_ps = 10'000'000; ///< one gate every 10 us
  std::uint64_t runs = 10'000;
  std::uint64_t start_ps = 0;
};

/// Fraction of gates containing no tag. Throws DomainError when the stream's run
/// is shorter than runs * period.
NoClickData noclick_from_laser(std::span<const Timestamp> stream, std::uint64_t run_duration_ps,
                               const LaserWindows& windows = {});

/// Gaussian resampling of f_nu with the data's sigma (clamped to [0, 1]),
/// reconstructing each sample; returns the per-population standard deviation.
std::vector<double> monte_carlo_errors(const NoClickData& data, const EfficiencyLadder& ladder, int truncation,
                                       std::uint64_t trials, std::uint64_t seed, const EmOptions& options = {});

/// Concatenates rows (one f_nu per ladder setting).
NoClickData concat(std::span<const NoClickData> rows);

void to_json(nlohmann::json& j, const EmResult& r);

}  // namespace sppq
