#include "sppq/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "sppq/errors.hpp"
#include "sppq/parallel.hpp"
#include "sppq/random.hpp"

namespace sppq {
namespace {

constexpr double kTinyProbability = 1e-300;

double x_log_y(double x, double y) {
  if (x == 0.0) return 0.0;
  return x * std::log(std::max(y, kTinyProbability));
}

}  // namespace

void EfficiencyLadder::validate(int truncation) const {
  if (etas.empty()) throw DomainError("efficiency ladder is empty");
  for (double e : etas) {
    if (!(e > 0.0 && e <= 1.0)) throw DomainError("ladder efficiency " + std::to_string(e) + " outside (0, 1]");
  }
  auto sorted = etas;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("ladder efficiencies must be distinct");
  }
  if (static_cast<int>(etas.size()) <= truncation) {
    throw UnderdeterminedError("need more than n_t = " + std::to_string(truncation) + " efficiencies, got " +
                               std::to_string(etas.size()));
  }
}

EfficiencyLadder EfficiencyLadder::from_singles(double eta_d, std::span<const double> singles_per_setting,
                                                double singles_unattenuated) {
  if (!(singles_unattenuated > 0.0)) throw UndefinedStatisticError("reference singles count must be > 0");
  EfficiencyLadder ladder;
  for (double n : singles_per_setting) ladder.etas.push_back(eta_d * n / singles_unattenuated);
  return ladder;
}

void NoClickData::validate() const {
  if (freqs.size() != trials.size()) throw InputError("freqs and trials differ in length");
  if (sigma && sigma->size() != freqs.size()) throw InputError("sigma and freqs differ in length");
  for (double f : freqs) {
    if (!(f >= 0.0 && f <= 1.0)) throw DomainError("no-click frequency " + std::to_string(f) + " outside [0, 1]");
  }
  for (double n : trials) {
    if (!(n >= 1.0)) throw DomainError("every ladder setting needs at least one run");
  }
}

void NoClickData::set_binomial_sigma() {
  std::vector<double> s(freqs.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) s[i] = std::sqrt(freqs[i] * (1.0 - freqs[i]) / trials[i]);
  sigma = std::move(s);
}

double forward_noclick(const PhotonNumberDist& d, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("efficiency outside [0, 1]");
  double p = 0.0;
  double weight = 1.0;
  for (int n = 0; n <= d.truncation(); ++n) {
    p += weight * d[n];
    weight *= 1.0 - eta;
  }
  return p;
}

ResponseMatrix build_response(const EfficiencyLadder& ladder, int truncation) {
  if (truncation < 0) throw DomainError("truncation must be >= 0");
  ladder.validate(truncation);
  ResponseMatrix a;
  a.rows = ladder.etas.size();
  a.cols = static_cast<std::size_t>(truncation) + 1;
  a.values.resize(a.rows * a.cols);
  for (std::size_t nu = 0; nu < a.rows; ++nu) {
    const double miss = 1.0 - ladder.etas[nu];
    double w = 1.0;
    for (std::size_t n = 0; n < a.cols; ++n) {
      a.values[nu * a.cols + n] = w;
      w *= miss;
    }
  }
  return a;
}

double noclick_loglik(const NoClickData& data, const ResponseMatrix& a, std::span<const double> rho) {
  double ll = 0.0;
  for (std::size_t nu = 0; nu < a.rows; ++nu) {
    double p = 0.0;
    for (std::size_t n = 0; n < a.cols; ++n) p += a(nu, n) * rho[n];
    p = std::clamp(p, 0.0, 1.0);
    const double n0 = data.freqs[nu] * data.trials[nu];
    ll += x_log_y(n0, p) + x_log_y(data.trials[nu] - n0, 1.0 - p);
  }
  return ll;
}

EmResult em_reconstruct(const NoClickData& data, const EfficiencyLadder& ladder, int truncation,
                        const EmOptions& options) {
  data.validate();
  ladder.validate(truncation);
  if (data.freqs.size() != ladder.etas.size()) throw InputError("one no-click frequency is needed per efficiency");
  if (!(options.epsilon > 0.0)) throw DomainError("epsilon must be > 0");

  const ResponseMatrix a = build_response(ladder, truncation);
  const std::size_t rows = a.rows;
  const std::size_t cols = a.cols;

  std::vector<double> f(data.freqs);
  for (std::size_t nu = 0; nu < rows; ++nu) {
    if (f[nu] == 0.0) f[nu] = 1.0 / (2.0 * data.trials[nu]);
  }
  NoClickData guarded = data;
  guarded.freqs = f;

  // Column sums sum_lambda A_lambda,n normalize each row's contribution.
  std::vector<double> col_sum(cols, 0.0);
  for (std::size_t nu = 0; nu < rows; ++nu) {
    for (std::size_t n = 0; n < cols; ++n) col_sum[n] += a(nu, n);
  }

  std::vector<double> rho(cols, 1.0 / static_cast<double>(cols));
  std::vector<double> next(cols);
  std::vector<double> ratio(rows);

  EmResult result;
  if (options.record_loglik) result.loglik_history.push_back(noclick_loglik(guarded, a, rho));

  std::uint64_t it = 0;
  bool converged = false;
  while (it < options.max_iters) {
    ++it;
    for (std::size_t nu = 0; nu < rows; ++nu) {
      double p = 0.0;
      for (std::size_t n = 0; n < cols; ++n) p += a(nu, n) * rho[n];
      ratio[nu] = f[nu] / std::max(p, kTinyProbability);
    }
    double total = 0.0;
    for (std::size_t n = 0; n < cols; ++n) {
      double s = 0.0;
      for (std::size_t nu = 0; nu < rows; ++nu) s += a(nu, n) * ratio[nu];
      next[n] = rho[n] * s / col_sum[n];
      total += next[n];
    }
    double change = 0.0;
    double norm = 0.0;
    for (std::size_t n = 0; n < cols; ++n) {
      next[n] /= total;
      norm += next[n];
      change = std::max(change, std::abs(next[n] - rho[n]));
    }
    result.max_norm_error = std::max(result.max_norm_error, std::abs(norm - 1.0));
    rho.swap(next);
    if (options.record_loglik) result.loglik_history.push_back(noclick_loglik(guarded, a, rho));
    if (change < options.epsilon) {
      converged = true;
      break;
    }
  }

  result.iterations = it;
  result.converged = converged;
  result.loglik = noclick_loglik(guarded, a, rho);
  result.populations = PhotonNumberDist::from_probabilities(std::move(rho));
  return result;
}

NoClickData noclick_from_heralded(double n_a, std::span<const double> n_ab1_per_eta, double eta_d,
                                  double n_ab1_at_full) {
  if (!(n_a > 0.0)) throw UndefinedStatisticError("heralded no-click data needs N_A > 0");
  if (!(n_ab1_at_full > 0.0)) throw UndefinedStatisticError("heralded no-click data needs N_AB1 at full efficiency > 0");
  if (!(eta_d > 0.0 && eta_d <= 1.0)) throw DomainError("eta_d outside (0, 1]");
  const double eta_0 = n_ab1_at_full / n_a;
  const double eta_x = eta_d / eta_0;
  NoClickData out;
  for (double n_ab1 : n_ab1_per_eta) {
    if (n_ab1 < 0.0 || n_ab1 > n_a) throw DomainError("coincidence count outside [0, N_A]");
    const double n0 = n_a - n_ab1 * eta_x;
    if (n0 < 0.0) {
      throw DataInconsistencyError("scaled coincidences exceed N_A (eta_x = " + std::to_string(eta_x) + ")");
    }
    out.freqs.push_back(n0 / n_a);
    out.trials.push_back(n_a);
  }
  out.set_binomial_sigma();
  return out;
}

NoClickData noclick_from_laser(std::span<const Timestamp> stream, std::uint64_t run_duration_ps,
                               const LaserWindows& w) {
  if (w.runs == 0 || w.window_ps == 0 || w.period_ps == 0) throw DomainError("laser gating needs runs, window, period > 0");
  if (w.window_ps > w.period_ps) throw DomainError("gate window longer than its period");
  if (w.start_ps + w.runs * w.period_ps > run_duration_ps) {
    throw DomainError("stream of " + std::to_string(run_duration_ps) + " ps is shorter than " +
                      std::to_string(w.runs) + " gates of period " + std::to_string(w.period_ps) + " ps");
  }
  if (!is_sorted_stream(stream)) throw InputError("laser stream is not sorted");
  std::uint64_t empty = 0;
  auto it = stream.begin();
  for (std::uint64_t k = 0; k < w.runs; ++k) {
    const Timestamp open = w.start_ps + k * w.period_ps;
    it = std::lower_bound(it, stream.end(), open);
    if (it == stream.end() || *it >= open + w.window_ps) ++empty;
  }
  NoClickData out;
  out.freqs.push_back(static_cast<double>(empty) / static_cast<double>(w.runs));
  out.trials.push_back(static_cast<double>(w.runs));
  out.set_binomial_sigma();
  return out;
}

NoClickData concat(std::span<const NoClickData> rows) {
  NoClickData out;
  bool all_sigma = true;
  std::vector<double> sigma;
  for (const auto& r : rows) {
    out.freqs.insert(out.freqs.end(), r.freqs.begin(), r.freqs.end());
    out.trials.insert(out.trials.end(), r.trials.begin(), r.trials.end());
    if (r.sigma) {
      sigma.insert(sigma.end(), r.sigma->begin(), r.sigma->end());
    } else {
      all_sigma = false;
    }
  }
  if (all_sigma) out.sigma = std::move(sigma);
  return out;
}

std::vector<double> monte_carlo_errors(const NoClickData& data, const EfficiencyLadder& ladder, int truncation,
                                       std::uint64_t trials, std::uint64_t seed, const EmOptions& options) {
  if (!data.sigma) throw InputError("Monte-Carlo errors need sigma for every no-click frequency");
  if (trials < 100) throw DomainError("Monte-Carlo errors need at least 100 trials");
  data.validate();
  const std::size_t cols = static_cast<std::size_t>(truncation) + 1;
  std::vector<std::vector<double>> samples(trials);
  EmOptions quiet = options;
  quiet.record_loglik = false;
  parallel_for(trials, [&](std::size_t i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    NoClickData perturbed = data;
    for (std::size_t nu = 0; nu < perturbed.freqs.size(); ++nu) {
      const double s = (*data.sigma)[nu];
      if (s > 0.0) {
        std::normal_distribution<double> noise(data.freqs[nu], s);
        perturbed.freqs[nu] = std::clamp(noise(rng), 0.0, 1.0);
      }
    }
    const auto r = em_reconstruct(perturbed, ladder, truncation, quiet);
    samples[i].assign(r.populations.probs().begin(), r.populations.probs().end());
  });

  // Welford updates: identical samples give exactly zero spread
  std::vector<double> mean(cols, 0.0), var(cols, 0.0);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    for (std::size_t n = 0; n < cols; ++n) {
      const double d = samples[k][n] - mean[n];
      mean[n] += d / static_cast<double>(k + 1);
      var[n] += d * (samples[k][n] - mean[n]);
    }
  }
  for (double& v : var) v = std::sqrt(v / static_cast<double>(trials - 1));
  return var;
}

void to_json(nlohmann::json& j, const EmResult& r) {
  j = nlohmann::json{{"populations", std::vector<double>(r.populations.probs().begin(), r.populations.probs().end())},
                     {"iterations", r.iterations},
                     {"converged", r.converged},
                     {"loglik", r.loglik}};
}

}  // namespace sppq
