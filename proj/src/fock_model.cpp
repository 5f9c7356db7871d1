#include "sppq/fock_model.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "sppq/errors.hpp"

namespace sppq {
namespace {

void check_truncation(int truncation) {
  if (truncation < 0) throw DomainError("truncation must be non-negative, got " + std::to_string(truncation));
}

void check_efficiency(double eta, const char* name) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw DomainError(std::string(name) + " must lie in [0, 1], got " + std::to_string(eta));
  }
}

// Renormalizes after checking that the discarded tail is negligible.
std::vector<double> finish_truncated(std::vector<double> p, const char* what, double mean) {
  const double kept = std::accumulate(p.begin(), p.end(), 0.0);
  const double tail = 1.0 - kept;
  if (tail > kMaxTailMass) {
    throw TruncationError(std::string(what) + " with mean " + std::to_string(mean) + " leaves tail mass " +
                          std::to_string(tail) + " above truncation " + std::to_string(p.size() - 1));
  }
  for (double& x : p) x /= kept;
  return p;
}

// Row n of Pascal's triangle weighted by a^k b^(n-k).
std::vector<double> binomial_row(int n, double a, double b) {
  std::vector<double> row(static_cast<std::size_t>(n) + 1);
  // log-free recurrence is fine at n <= 60
  double c = 1.0;
  for (int k = 0; k <= n; ++k) {
    row[k] = c * std::pow(a, k) * std::pow(b, n - k);
    c = c * (n - k) / (k + 1);
  }
  return row;
}

}  // namespace

PhotonNumberDist PhotonNumberDist::fock(int n, int truncation) {
  check_truncation(truncation);
  if (n < 0) throw DomainError("photon number must be non-negative");
  if (n > truncation) {
    throw TruncationError("Fock state |" + std::to_string(n) + "> exceeds truncation " + std::to_string(truncation));
  }
  std::vector<double> p(static_cast<std::size_t>(truncation) + 1, 0.0);
  p[n] = 1.0;
  return PhotonNumberDist(std::move(p));
}

PhotonNumberDist PhotonNumberDist::coherent(double mean, int truncation) {
  check_truncation(truncation);
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("coherent mean must be finite and >= 0");
  std::vector<double> p(static_cast<std::size_t>(truncation) + 1);
  p[0] = std::exp(-mean);
  for (int n = 1; n <= truncation; ++n) p[n] = p[n - 1] * mean / n;
  return PhotonNumberDist(finish_truncated(std::move(p), "coherent state", mean));
}

PhotonNumberDist PhotonNumberDist::thermal(double mean, int truncation) {
  check_truncation(truncation);
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("thermal mean must be finite and >= 0");
  std::vector<double> p(static_cast<std::size_t>(truncation) + 1);
  const double ratio = mean / (1.0 + mean);
  p[0] = 1.0 / (1.0 + mean);
  for (int n = 1; n <= truncation; ++n) p[n] = p[n - 1] * ratio;
  return PhotonNumberDist(finish_truncated(std::move(p), "thermal state", mean));
}

PhotonNumberDist PhotonNumberDist::from_probabilities(std::vector<double> probs) {
  if (probs.empty()) throw DomainError("distribution needs at least one entry");
  double total = 0.0;
  for (double x : probs) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("probabilities must be finite and non-negative");
    total += x;
  }
  if (!(total > 0.0)) throw DomainError("probabilities sum to zero");
  for (double& x : probs) x /= total;
  return PhotonNumberDist(std::move(probs));
}

double PhotonNumberDist::factorial_moment(int k) const noexcept {
  double sum = 0.0;
  for (int n = k; n <= truncation(); ++n) {
    double falling = 1.0;
    for (int j = 0; j < k; ++j) falling *= n - j;
    sum += falling * probs_[n];
  }
  return sum;
}

double g2_zero(const PhotonNumberDist& d) {
  const double m1 = d.factorial_moment(1);
  if (!(m1 > 0.0)) throw UndefinedStatisticError("g2(0) undefined for a state with zero mean photon number");
  return d.factorial_moment(2) / (m1 * m1);
}

PhotonNumberDist apply_loss(const PhotonNumberDist& d, double eta) {
  check_efficiency(eta, "loss survival eta");
  const int nt = d.truncation();
  std::vector<double> out(static_cast<std::size_t>(nt) + 1, 0.0);
  for (int n = 0; n <= nt; ++n) {
    const double pn = d[n];
    if (pn == 0.0) continue;
    const auto row = binomial_row(n, eta, 1.0 - eta);
    for (int m = 0; m <= n; ++m) out[m] += row[m] * pn;
  }
  return PhotonNumberDist::from_probabilities(std::move(out));
}

ClickProbabilities click_probabilities(const PhotonNumberDist& d, double eta1, double eta2) {
  check_efficiency(eta1, "eta1");
  check_efficiency(eta2, "eta2");
  ClickProbabilities out;
  for (int n = 0; n <= d.truncation(); ++n) {
    const double pn = d[n];
    if (pn == 0.0) continue;
    const auto routing = binomial_row(n, 0.5, 0.5);
    for (int k = 0; k <= n; ++k) {
      const double w = pn * routing[k];
      const double click1 = 1.0 - std::pow(1.0 - eta1, k);
      const double click2 = 1.0 - std::pow(1.0 - eta2, n - k);
      out.b1 += w * click1;
      out.b2 += w * click2;
      out.both += w * click1 * click2;
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const PhotonNumberDist& d) {
  j = nlohmann::json{{"n_t", d.truncation()}, {"probs", std::vector<double>(d.probs().begin(), d.probs().end())}};
}

PhotonNumberDist photon_number_dist_from_json(const nlohmann::json& j) {
  const int nt = j.at("n_t").get<int>();
  auto probs = j.at("probs").get<std::vector<double>>();
  if (static_cast<int>(probs.size()) != nt + 1) {
    throw InputError("probs has " + std::to_string(probs.size()) + " entries but n_t = " + std::to_string(nt));
  }
  return PhotonNumberDist::from_probabilities(std::move(probs));
}

}  // namespace sppq
