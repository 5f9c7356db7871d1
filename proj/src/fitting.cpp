#include "sppq/fitting.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sppq/errors.hpp"

namespace sppq {
namespace {

struct Normal {
  // JtWJ (symmetric 2x2) and JtW r
  double a00 = 0, a01 = 0, a11 = 0;
  double g0 = 0, g1 = 0;
  double chi2 = 0;
};

Normal accumulate(const DecaySeries& s, const std::vector<double>& err, double n0, double ell) {
  Normal m;
  for (std::size_t i = 0; i < s.counts.size(); ++i) {
    const double e = std::exp(-s.lengths_um[i] / ell);
    const double model = n0 * e;
    const double w = 1.0 / (err[i] * err[i]);
    const double r = s.counts[i] - model;
    const double d_n0 = e;
    const double d_ell = model * s.lengths_um[i] / (ell * ell);
    m.a00 += w * d_n0 * d_n0;
    m.a01 += w * d_n0 * d_ell;
    m.a11 += w * d_ell * d_ell;
    m.g0 += w * d_n0 * r;
    m.g1 += w * d_ell * r;
    m.chi2 += w * r * r;
  }
  return m;
}

double chi2_at(const DecaySeries& s, const std::vector<double>& err, double n0, double ell) {
  double c = 0.0;
  for (std::size_t i = 0; i < s.counts.size(); ++i) {
    const double r = (s.counts[i] - n0 * std::exp(-s.lengths_um[i] / ell)) / err[i];
    c += r * r;
  }
  return c;
}

[[noreturn]] void fail(const std::string& why, double n0, double ell, int it) {
  std::ostringstream os;
  os << "exponential fit failed: " << why << " (N0=" << n0 << ", ell=" << ell << ", iteration " << it << ")";
  throw FitError(os.str());
}

}  // namespace

void DecaySeries::validate() const {
  if (lengths_um.size() != counts.size()) throw InputError("lengths and counts differ in size");
  if (count_errors && count_errors->size() != counts.size()) throw InputError("errors and counts differ in size");
  if (counts.size() < 3) throw InputError("a decay fit needs at least 3 points");
  for (std::size_t i = 1; i < lengths_um.size(); ++i) {
    if (!(lengths_um[i] > lengths_um[i - 1])) throw InputError("lengths must be strictly increasing");
  }
  for (double c : counts) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw InputError("counts must be finite and >= 0");
  }
  if (count_errors) {
    for (double e : *count_errors) {
      if (!(e > 0.0)) throw InputError("count errors must be > 0");
    }
  }
}

DecayFit fit_exponential(const DecaySeries& s) {
  s.validate();
  std::vector<double> err(s.counts.size());
  for (std::size_t i = 0; i < s.counts.size(); ++i) {
    err[i] = s.count_errors ? (*s.count_errors)[i] : std::max(std::sqrt(s.counts[i]), 1.0);
  }

  // log-linear start over non-zero counts
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  int nonzero = 0;
  for (std::size_t i = 0; i < s.counts.size(); ++i) {
    if (s.counts[i] <= 0.0) continue;
    ++nonzero;
    const double x = s.lengths_um[i];
    const double y = std::log(s.counts[i]);
    const double w = s.counts[i];  // var(log N) ~ 1 / N
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
  }
  if (nonzero < 2) throw FitError("exponential fit needs at least two non-zero counts");
  const double det = sw * sxx - sx * sx;
  double slope = det != 0.0 ? (sw * sxy - sx * sy) / det : 0.0;
  double n0 = std::exp((sy - slope * sx) / sw);
  if (!(slope < 0.0)) slope = -1.0 / (s.lengths_um.back() - s.lengths_um.front() + 1.0);
  double ell = -1.0 / slope;

  double lambda = 1e-3;
  double chi2 = chi2_at(s, err, n0, ell);
  int it = 0;
  constexpr int kMaxIterations = 500;
  for (; it < kMaxIterations; ++it) {
    const Normal m = accumulate(s, err, n0, ell);
    bool stepped = false;
    double rel_change = 0.0;
    for (int tries = 0; tries < 60 && !stepped; ++tries) {
      const double b00 = m.a00 * (1.0 + lambda);
      const double b11 = m.a11 * (1.0 + lambda);
      const double d = b00 * b11 - m.a01 * m.a01;
      if (!(d > 0.0)) {
        lambda *= 10.0;
        continue;
      }
      const double dn0 = (b11 * m.g0 - m.a01 * m.g1) / d;
      const double dell = (b00 * m.g1 - m.a01 * m.g0) / d;
      const double trial_n0 = n0 + dn0;
      const double trial_ell = ell + dell;
      if (trial_ell > 0.0 && std::isfinite(trial_n0)) {
        const double trial_chi2 = chi2_at(s, err, trial_n0, trial_ell);
        if (trial_chi2 <= chi2) {
          rel_change = std::max(std::abs(dn0) / std::max(std::abs(n0), 1e-300), std::abs(dell) / ell);
          n0 = trial_n0;
          ell = trial_ell;
          const double improvement = chi2 - trial_chi2;
          chi2 = trial_chi2;
          lambda = std::max(lambda / 10.0, 1e-12);
          stepped = true;
          if (improvement <= 1e-15 * std::max(chi2, 1.0) && rel_change < 1e-12) rel_change = 0.0;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!stepped || rel_change < 1e-13) break;
  }
  if (!std::isfinite(n0) || !std::isfinite(ell) || !(ell > 0.0)) fail("non-finite optimum", n0, ell, it);

  const Normal m = accumulate(s, err, n0, ell);
  const double d = m.a00 * m.a11 - m.a01 * m.a01;
  if (!(d > 0.0)) fail("singular normal matrix", n0, ell, it);

  DecayFit out;
  out.n0 = n0;
  out.ell_um = ell;
  out.sigma_n0 = std::sqrt(m.a11 / d);
  out.sigma_ell = std::sqrt(m.a00 / d);
  out.chi2 = m.chi2;
  out.dof = static_cast<int>(s.counts.size()) - 2;
  out.iterations = it;
  return out;
}

void to_json(nlohmann::json& j, const DecayFit& f) {
  j = nlohmann::json{{"N0", f.n0},       {"ell_um", f.ell_um}, {"sigma_ell", f.sigma_ell},
                     {"sigma_N0", f.sigma_n0}, {"chi2", f.chi2}, {"dof", f.dof}};
}

DecaySeries decay_series_from_csv(std::string_view text) {
  DecaySeries s;
  std::vector<double> errors;
  bool header = false;
  int columns = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    const std::size_t offset = pos;
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line == "length_um,counts") {
        columns = 2;
      } else if (line == "length_um,counts,error") {
        columns = 3;
      } else {
        throw ParseError("expected header 'length_um,counts[,error]'", offset);
      }
      header = true;
      continue;
    }
    std::vector<double> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view f = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || f.empty()) {
        throw ParseError("bad number '" + std::string(f) + "'", offset + start);
      }
      fields.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (static_cast<int>(fields.size()) != columns) throw ParseError("wrong number of columns", offset);
    s.lengths_um.push_back(fields[0]);
    s.counts.push_back(fields[1]);
    if (columns == 3) errors.push_back(fields[2]);
  }
  if (!header) throw ParseError("missing header 'length_um,counts[,error]'", text.size());
  if (columns == 3) s.count_errors = std::move(errors);
  return s;
}

}  // namespace sppq
