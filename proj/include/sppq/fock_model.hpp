#pragma once

#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace sppq {

inline constexpr int kDefaultTruncation = 30;

/// Largest probability mass a constructor may discard when truncating.
inline constexpr double kMaxTailMass = 1e-6;

/// Diagonal of a single-mode density matrix in the number basis, truncated at
/// photon number `truncation()`. Immutable; probabilities are non-negative and
/// sum to one.
class PhotonNumberDist {
 public:
  static PhotonNumberDist fock(int n, int truncation = kDefaultTruncation);
  static PhotonNumberDist vacuum(int truncation = kDefaultTruncation) { return fock(0, truncation); }
  static PhotonNumberDist coherent(double mean, int truncation = kDefaultTruncation);
  static PhotonNumberDist thermal(double mean, int truncation = kDefaultTruncation);

  /// Validates non-negativity and renormalizes. Throws DomainError on a zero or
  /// negative total.
  static PhotonNumberDist from_probabilities(std::vector<double> probs);

  int truncation() const noexcept { return static_cast<int>(probs_.size()) - 1; }
  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](int n) const { return probs_.at(static_cast<std::size_t>(n)); }

  double mean() const noexcept { return factorial_moment(1); }

  /// <n (n-1) ... (n-k+1)>
  double factorial_moment(int k) const noexcept;

 private:
  explicit PhotonNumberDist(std::vector<double> probs) : probs_(std::move(probs)) {}

  std::vector<double> probs_;
};

/// <n(n-1)> / <n>^2. Throws UndefinedStatisticError for <n> = 0.
double g2_zero(const PhotonNumberDist& d);

/// Binomial (Bernoulli-thinning) loss channel with single-photon survival `eta`.
PhotonNumberDist apply_loss(const PhotonNumberDist& d, double eta);

struct ClickProbabilities {
  double b1 = 0.0;
  double b2 = 0.0;
  double both = 0.0;
};

/// Exact click probabilities for a 50/50 splitter feeding two on/off detectors
/// with efficiencies `eta1`, `eta2`.
ClickProbabilities click_probabilities(const PhotonNumberDist& d, double eta1, double eta2);

void to_json(nlohmann::json& j, const PhotonNumberDist& d);
PhotonNumberDist photon_number_dist_from_json(const nlohmann::json& j);

}  // namespace sppq
