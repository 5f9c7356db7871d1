#include "sppq/coincidence.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "sppq/errors.hpp"
#include "sppq/parallel.hpp"

namespace sppq {
namespace {

void require_sorted(std::span<const Timestamp> s, const char* name) {
  if (!is_sorted_stream(s)) throw InputError(std::string("stream ") + name + " is not sorted");
}

// Sign of (t_y - tau - t_x) against the centered window, compared on doubled
// values so odd window widths stay exact.
struct WindowTest {
  std::int64_t tau;
  std::int64_t width;

  std::int64_t twice_offset(Timestamp x, Timestamp y) const {
    return 2 * (static_cast<std::int64_t>(y) - tau - static_cast<std::int64_t>(x));
  }
  bool before(Timestamp x, Timestamp y) const { return twice_offset(x, y) < -width; }
  bool inside(Timestamp x, Timestamp y) const {
    const auto d = twice_offset(x, y);
    return d >= -width && d <= width;
  }
};

double rel_var(std::uint64_t n) { return 1.0 / static_cast<double>(std::max<std::uint64_t>(n, 1)); }

}  // namespace

void CoincConfig::validate() const {
  if (window_ps == 0) throw DomainError("coincidence window must be > 0");
  if (integration_time_ps == 0) throw DomainError("integration time must be > 0");
}

std::uint64_t count_pairs(std::span<const Timestamp> x, std::span<const Timestamp> y, std::uint64_t window_ps,
                          std::int64_t tau_ps) {
  require_sorted(x, "X");
  require_sorted(y, "Y");
  const WindowTest w{tau_ps, static_cast<std::int64_t>(window_ps)};
  std::uint64_t matches = 0;
  std::size_t j = 0;
  for (Timestamp tx : x) {
    while (j < y.size() && w.before(tx, y[j])) ++j;
    if (j == y.size()) break;
    if (w.inside(tx, y[j])) {
      ++matches;
      ++j;
    }
  }
  return matches;
}

namespace {

std::uint64_t count_triples_offset(std::span<const Timestamp> a, std::span<const Timestamp> b1,
                                   std::span<const Timestamp> b2, std::uint64_t window_ps, std::int64_t tau1_ps,
                                   std::int64_t tau2_ps) {
  require_sorted(a, "A");
  require_sorted(b1, "B1");
  require_sorted(b2, "B2");
  const auto width = static_cast<std::int64_t>(window_ps);
  const WindowTest w1{tau1_ps, width};
  const WindowTest w2{tau2_ps, width};
  std::uint64_t matches = 0;
  std::size_t j1 = 0;
  std::size_t j2 = 0;
  for (Timestamp ta : a) {
    while (j1 < b1.size() && w1.before(ta, b1[j1])) ++j1;
    while (j2 < b2.size() && w2.before(ta, b2[j2])) ++j2;
    if (j1 == b1.size() || j2 == b2.size()) break;
    if (w1.inside(ta, b1[j1]) && w2.inside(ta, b2[j2])) {
      ++matches;
      ++j1;
      ++j2;
    }
  }
  return matches;
}

}  // namespace

std::uint64_t count_triples(std::span<const Timestamp> a, std::span<const Timestamp> b1,
                            std::span<const Timestamp> b2, std::uint64_t window_ps, std::int64_t tau_ps) {
  return count_triples_offset(a, b1, b2, window_ps, 0, tau_ps);
}

CountSummary summarize(const TagSet& tags, const CoincConfig& cfg, std::int64_t tau_ps) {
  cfg.validate();
  const auto& d = cfg.channel_delays_ps;
  const auto da = d[index(Channel::A)];
  const auto d1 = d[index(Channel::B1)];
  const auto d2 = d[index(Channel::B2)];
  const auto& a = tags[Channel::A];
  const auto& b1 = tags[Channel::B1];
  const auto& b2 = tags[Channel::B2];

  CountSummary c;
  c.tau_ps = tau_ps;
  c.window_ps = cfg.window_ps;
  c.integration_time_ps = cfg.integration_time_ps;
  c.n_a = a.size();
  c.n_b1 = b1.size();
  c.n_b2 = b2.size();
  // Shifting channel k by d_k turns the condition on (y - tau - x) into one on
  // (y - (tau + d_x - d_y) - x).
  c.n_b1b2 = count_pairs(b1, b2, cfg.window_ps, tau_ps + d1 - d2);
  c.n_ab1 = count_pairs(a, b1, cfg.window_ps, da - d1);
  c.n_ab2 = count_pairs(a, b2, cfg.window_ps, tau_ps + da - d2);
  c.n_ab1b2 = count_triples_offset(a, b1, b2, cfg.window_ps, da - d1, tau_ps + da - d2);
  return c;
}

double g2_unconditioned(const CountSummary& c) {
  if (c.n_b1 == 0 || c.n_b2 == 0) throw UndefinedStatisticError("g2 needs non-zero singles on B1 and B2");
  if (c.window_ps == 0) throw UndefinedStatisticError("g2 needs a non-zero coincidence window");
  return static_cast<double>(c.n_b1b2) / (static_cast<double>(c.n_b1) * static_cast<double>(c.n_b2)) *
         (static_cast<double>(c.integration_time_ps) / static_cast<double>(c.window_ps));
}

double g2_conditional(const CountSummary& c) {
  if (c.n_ab1 == 0 || c.n_ab2 == 0) throw UndefinedStatisticError("conditional g2 needs non-zero A-B1 and A-B2 pairs");
  return static_cast<double>(c.n_a) * static_cast<double>(c.n_ab1b2) /
         (static_cast<double>(c.n_ab1) * static_cast<double>(c.n_ab2));
}

double g2_unconditioned_stderr(const CountSummary& c) {
  CountSummary floor = c;
  floor.n_b1b2 = std::max<std::uint64_t>(c.n_b1b2, 1);
  return g2_unconditioned(floor) * std::sqrt(rel_var(c.n_b1b2) + rel_var(c.n_b1) + rel_var(c.n_b2));
}

double g2_conditional_stderr(const CountSummary& c) {
  CountSummary floor = c;
  floor.n_ab1b2 = std::max<std::uint64_t>(c.n_ab1b2, 1);
  return g2_conditional(floor) * std::sqrt(rel_var(c.n_a) + rel_var(c.n_ab1b2) + rel_var(c.n_ab1) + rel_var(c.n_ab2));
}

std::vector<std::int64_t> DelaySweep::delays() const {
  if (tau_step_ps <= 0) throw DomainError("delay step must be > 0");
  if (tau_max_ps < tau_min_ps) throw DomainError("empty delay range");
  std::vector<std::int64_t> out;
  for (std::int64_t t = tau_min_ps; t <= tau_max_ps; t += tau_step_ps) out.push_back(t);
  return out;
}

std::vector<G2Point> g2_curve(const TagSet& tags, const CoincConfig& cfg, const DelaySweep& sweep, bool conditional) {
  cfg.validate();
  const auto taus = sweep.delays();
  for (const auto& s : tags.streams) require_sorted(s, "in tag set");
  std::vector<G2Point> out(taus.size());
  parallel_for(taus.size(), [&](std::size_t i) {
    G2Point& p = out[i];
    p.tau_ps = taus[i];
    p.counts = summarize(tags, cfg, taus[i]);
    try {
      if (conditional) {
        p.g2 = g2_conditional(p.counts);
        p.std_error = g2_conditional_stderr(p.counts);
      } else {
        p.g2 = g2_unconditioned(p.counts);
        p.std_error = g2_unconditioned_stderr(p.counts);
      }
    } catch (const UndefinedStatisticError&) {
      // too few counts at this delay; the rest of the curve is still usable
      p.g2 = p.std_error = std::numeric_limits<double>::quiet_NaN();
    }
  });
  return out;
}

double accidental_triple_rate(double r_ab1, double r_b2, double r_ab2, double r_b1, double window_s) {
  for (double v : {r_ab1, r_b2, r_ab2, r_b1, window_s}) {
    if (!(v >= 0.0)) throw DomainError("accidental rate inputs must be >= 0");
  }
  return window_s * r_ab1 * r_b2 + window_s * r_ab2 * r_b1;
}

double g2_accidental_offset(double r_a, double r_b1, double r_ab1, double r_b2, double r_ab2, double window_s) {
  if (!(r_ab1 > 0.0) || !(r_ab2 > 0.0)) {
    throw UndefinedStatisticError("accidental offset needs non-zero A-B1 and A-B2 rates");
  }
  return window_s * r_a * (r_b1 / r_ab1 + r_b2 / r_ab2);
}

CorrectedCounts subtract_background(const CountSummary& c, const std::array<double, kChannelCount>& dark_rates) {
  if (c.integration_time_ps == 0) throw UndefinedStatisticError("background subtraction needs the integration time");
  const double t = ps_to_seconds(c.integration_time_ps);
  const double dt = ps_to_seconds(c.window_ps);
  CorrectedCounts out;
  out.n_a = static_cast<double>(c.n_a) - dark_rates[index(Channel::A)] * t;
  out.n_b1 = static_cast<double>(c.n_b1) - dark_rates[index(Channel::B1)] * t;
  out.n_b2 = static_cast<double>(c.n_b2) - dark_rates[index(Channel::B2)] * t;
  const auto accidental = [&](std::uint64_t nx, std::uint64_t ny) {
    return (static_cast<double>(nx) / t) * (static_cast<double>(ny) / t) * dt * t;
  };
  out.n_b1b2 = static_cast<double>(c.n_b1b2) - accidental(c.n_b1, c.n_b2);
  out.n_ab1 = static_cast<double>(c.n_ab1) - accidental(c.n_a, c.n_b1);
  out.n_ab2 = static_cast<double>(c.n_ab2) - accidental(c.n_a, c.n_b2);
  return out;
}

void to_json(nlohmann::json& j, const CountSummary& c) {
  j = nlohmann::json{{"N_A", c.n_a},         {"N_B1", c.n_b1},           {"N_B2", c.n_b2},
                     {"N_B1B2", c.n_b1b2},   {"N_AB1", c.n_ab1},         {"N_AB2", c.n_ab2},
                     {"N_AB1B2", c.n_ab1b2}, {"tau_ps", c.tau_ps},       {"window_ps", c.window_ps},
                     {"integration_time_ps", c.integration_time_ps}};
}

}  // namespace sppq
