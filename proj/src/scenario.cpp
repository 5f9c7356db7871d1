#include "sppq/scenario.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "sppq/errors.hpp"
#include "sppq/fitting.hpp"
#include "sppq/random.hpp"
#include "sppq/tag_io.hpp"

namespace sppq {
namespace {

using nlohmann::json;

// Strict reader over one JSON object: every key must be consumed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& child(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  void get(const char* key, T& out) {
    auto it = j_.find(key);
    if (it == j_.end()) return;
    seen_.insert(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError(field(key), "expected a boolean");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!it->is_number_integer() || (!it->is_number_unsigned() && it->get<std::int64_t>() < 0)) {
        throw ConfigError(field(key), "expected a non-negative integer");
      }
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError(field(key), "expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError(field(key), "expected a number");
    }
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(field(key), e.what());
    }
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.contains(item.key())) throw ConfigError(field(item.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

void check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

DetectorSpec parse_detector(const json& j, const std::string& path) {
  DetectorSpec d;
  ObjectReader r(j, path);
  r.get("efficiency", d.efficiency);
  r.get("dark_rate", d.dark_rate);
  r.get("jitter_sigma_ps", d.jitter_sigma_ps);
  r.get("dead_time_ps", d.dead_time_ps);
  r.finish();
  return d;
}

json detector_json(const DetectorSpec& d) {
  return {{"efficiency", d.efficiency},
          {"dark_rate", d.dark_rate},
          {"jitter_sigma_ps", d.jitter_sigma_ps},
          {"dead_time_ps", d.dead_time_ps}};
}

std::string_view parameter_name(SweepParameter p) {
  return p == SweepParameter::LengthUm ? "length_um" : "pol_angle_rad";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct PointResult {
  double value = 0.0;
  CountSummary counts;
  double g2 = std::numeric_limits<double>::quiet_NaN();
  double g2_err = std::numeric_limits<double>::quiet_NaN();
};

// Counts used as "signal" for decay and polarization curves: herald-B pairs
// for a heralded run, B singles for a laser run. Each count is divided by the
// live fraction 1 - R tau_dead of the detectors involved (non-paralyzable).
double signal_counts(const ChainSpec& chain, const CountSummary& c) {
  const double t = ps_to_seconds(c.integration_time_ps);
  auto live = [&](Channel ch, std::uint64_t n) {
    const double dead = ps_to_seconds(chain.detectors[index(ch)].dead_time_ps);
    return std::max(1.0 - static_cast<double>(n) / t * dead, 1e-3);
  };
  const double a = live(Channel::A, c.n_a);
  const double b1 = live(Channel::B1, c.n_b1);
  const double b2 = live(Channel::B2, c.n_b2);
  if (chain.mode == SourceMode::Heralded) {
    return static_cast<double>(c.n_ab1) / (a * b1) + static_cast<double>(c.n_ab2) / (a * b2);
  }
  return static_cast<double>(c.n_b1) / b1 + static_cast<double>(c.n_b2) / b2;
}

void g2_at(bool conditional, PointResult& p) {
  try {
    if (conditional) {
      p.g2 = g2_conditional(p.counts);
      p.g2_err = g2_conditional_stderr(p.counts);
    } else {
      p.g2 = g2_unconditioned(p.counts);
      p.g2_err = g2_unconditioned_stderr(p.counts);
    }
  } catch (const UndefinedStatisticError&) {
    // left as NaN; reported as null
  }
}

ChainSpec chain_at(const ScenarioConfig& cfg, std::optional<double> value) {
  ChainSpec c = cfg.chain;
  if (value) {
    if (cfg.sweep->parameter == SweepParameter::LengthUm) {
      c.waveguide.length_um = *value;
    } else {
      c.waveguide.pol_angle_rad = *value;
    }
  }
  return c;
}

void run_tomography(const ScenarioConfig& cfg, Manifest& m) {
  const TomographySettings& t = *cfg.tomography;
  const std::uint64_t seed = derive_seed(cfg.seed, "tomography");
  const std::size_t n = t.attenuations.size();
  CoincConfig coinc = cfg.coinc_config();

  std::vector<double> singles(n);
  NoClickData data;
  if (cfg.chain.mode == SourceMode::Heralded) {
    std::vector<double> n_a(n), n_ab1(n);
    for (std::size_t i = 0; i < n; ++i) {
      ChainSpec c = cfg.chain;
      c.attenuation = t.attenuations[i];
      const TagSet tags = simulate_chain(c, derive_seed(seed, static_cast<std::uint64_t>(i)));
      const CountSummary s = summarize(tags, coinc, 0);
      n_a[i] = static_cast<double>(s.n_a);
      n_ab1[i] = static_cast<double>(s.n_ab1);
      singles[i] = static_cast<double>(s.n_b1);
    }
    // per-herald normalization to the unattenuated run
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = n_ab1[i] * n_a[0] / n_a[i];
    data = noclick_from_heralded(n_a[0], scaled, t.eta_d, scaled[0]);
  } else {
    const LaserWindows& w = t.laser_windows;
    std::vector<NoClickData> rows;
    for (std::size_t i = 0; i < n; ++i) {
      ChainSpec c = cfg.chain;
      c.attenuation = t.attenuations[i];
      c.duration_s = ps_to_seconds(w.start_ps + w.runs * w.period_ps);
      const TagSet tags = simulate_chain(c, derive_seed(seed, static_cast<std::uint64_t>(i)));
      singles[i] = static_cast<double>(tags[Channel::B1].size());
      rows.push_back(noclick_from_laser(tags[Channel::B1], tags.duration_ps, w));
    }
    data = concat(rows);
  }
  data.set_binomial_sigma();
  const EfficiencyLadder ladder = EfficiencyLadder::from_singles(t.eta_d, singles, singles[0]);

  EmOptions opts;
  opts.epsilon = t.epsilon;
  opts.max_iters = t.max_iters;
  const EmResult result = em_reconstruct(data, ladder, t.n_t, opts);
  const std::vector<double> errors =
      monte_carlo_errors(data, ladder, t.n_t, t.mc_trials, derive_seed(seed, "monte-carlo"), opts);

  json out = result;
  out["errors"] = errors;
  out["etas"] = ladder.etas;
  m.write_artifact("tomography.json", out.dump(2) + "\n");

  std::ostringstream csv;
  csv << "eta,freq,trials,sigma\n";
  for (std::size_t i = 0; i < n; ++i) {
    csv << format_double(ladder.etas[i]) << ',' << format_double(data.freqs[i]) << ','
        << format_double(data.trials[i]) << ',' << format_double((*data.sigma)[i]) << '\n';
  }
  m.write_artifact("noclick.csv", csv.str());
}

}  // namespace

std::vector<double> SweepSpec::values() const {
  if (!(step > 0.0)) throw DomainError("sweep step must be > 0");
  if (!(stop >= start)) throw DomainError("sweep stop must be >= start");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

void ScenarioConfig::validate() const {
  check(schema_version == kSchemaVersion, "schema_version", "unsupported schema version");
  const SourceSpec& s = chain.source;
  check(s.pair_rate >= 0.0 && std::isfinite(s.pair_rate), "source.pair_rate", "must be finite and >= 0");
  check(s.laser_rate >= 0.0 && std::isfinite(s.laser_rate), "source.laser_rate", "must be finite and >= 0");
  check(s.double_pair_prob >= 0.0 && s.double_pair_prob <= 0.1, "source.double_pair_prob", "must lie in [0, 0.1]");
  const WaveguideSpec& w = chain.waveguide;
  check(w.length_um >= 0.0, "waveguide.length_um", "must be >= 0");
  check(w.prop_length_um > 0.0, "waveguide.prop_length_um", "must be > 0");
  check(in_unit(w.coupling_in), "waveguide.coupling_in", "must lie in [0, 1]");
  check(in_unit(w.coupling_out), "waveguide.coupling_out", "must lie in [0, 1]");
  check(std::isfinite(w.pol_angle_rad), "waveguide.pol_angle_rad", "must be finite");
  check(in_unit(chain.herald_transmission), "herald_transmission", "must lie in [0, 1]");
  check(in_unit(chain.splitter_ratio), "splitter_ratio", "must lie in [0, 1]");
  check(chain.duration_s > 0.0 && std::isfinite(chain.duration_s), "duration_s", "must be > 0");
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    const std::string p = "detectors." + std::string(channel_name(static_cast<Channel>(i)));
    const DetectorSpec& d = chain.detectors[i];
    check(in_unit(d.efficiency), p + ".efficiency", "must lie in [0, 1]");
    check(d.dark_rate >= 0.0, p + ".dark_rate", "must be >= 0");
    check(d.jitter_sigma_ps >= 0.0, p + ".jitter_sigma_ps", "must be >= 0");
  }
  if (sweep) {
    check(sweep->step > 0.0, "sweep.step", "must be > 0");
    check(sweep->stop >= sweep->start, "sweep.stop", "must be >= start (sweep would be empty)");
    if (sweep->parameter == SweepParameter::LengthUm) check(sweep->start >= 0.0, "sweep.start", "must be >= 0");
  }
  check(window_ps > 0, "coincidence.window_ps", "must be > 0");
  check(tau.tau_step_ps > 0, "coincidence.tau_step_ps", "must be > 0");
  check(tau.tau_max_ps >= tau.tau_min_ps, "coincidence.tau_max_ps", "must be >= tau_min_ps");
  if (tomography) {
    const TomographySettings& t = *tomography;
    check(t.eta_d > 0.0 && t.eta_d <= 1.0, "tomography.eta_d", "must lie in (0, 1]");
    check(t.n_t >= 0, "tomography.n_t", "must be >= 0");
    check(t.attenuations.size() > static_cast<std::size_t>(t.n_t), "tomography.attenuations",
          "needs more settings than n_t");
    check(!t.attenuations.empty() && t.attenuations.front() == 1.0, "tomography.attenuations",
          "first setting must be the unattenuated reference 1.0");
    for (double a : t.attenuations) check(a > 0.0 && a <= 1.0, "tomography.attenuations", "entries must lie in (0, 1]");
    check(t.epsilon > 0.0, "tomography.epsilon", "must be > 0");
    check(t.max_iters > 0, "tomography.max_iters", "must be > 0");
    check(t.mc_trials >= 100, "tomography.mc_trials", "must be >= 100");
    check(t.laser_windows.window_ps > 0 && t.laser_windows.window_ps <= t.laser_windows.period_ps,
          "tomography.laser_windows.window_ps", "must lie in (0, period_ps]");
    check(t.laser_windows.runs > 0, "tomography.laser_windows.runs", "must be > 0");
  }
  check(!output_dir.empty(), "output_dir", "must not be empty");
}

CoincConfig ScenarioConfig::coinc_config() const {
  CoincConfig c;
  c.window_ps = window_ps;
  c.channel_delays_ps = delays_ps;
  c.integration_time_ps = seconds_to_ps(chain.duration_s);
  return c;
}

bool ScenarioConfig::conditional() const {
  if (estimator == G2Estimator::Auto) return chain.mode == SourceMode::Heralded;
  return estimator == G2Estimator::Conditional;
}

ScenarioConfig ScenarioConfig::from_json(const json& j) {
  ScenarioConfig cfg;
  ObjectReader r(j, "");
  check(r.has("schema_version"), "schema_version", "missing");
  r.get("schema_version", cfg.schema_version);
  check(cfg.schema_version == kSchemaVersion, "schema_version",
        "unsupported schema version " + std::to_string(cfg.schema_version));

  std::string mode = "heralded";
  r.get("mode", mode);
  if (mode == "heralded") {
    cfg.chain.mode = SourceMode::Heralded;
  } else if (mode == "laser") {
    cfg.chain.mode = SourceMode::Laser;
  } else {
    throw ConfigError("mode", "expected 'heralded' or 'laser', got '" + mode + "'");
  }

  if (r.has("source")) {
    ObjectReader s(r.child("source"), "source");
    s.get("pair_rate", cfg.chain.source.pair_rate);
    s.get("double_pair_prob", cfg.chain.source.double_pair_prob);
    s.get("laser_rate", cfg.chain.source.laser_rate);
    s.finish();
  }
  if (r.has("waveguide")) {
    ObjectReader w(r.child("waveguide"), "waveguide");
    auto& wg = cfg.chain.waveguide;
    w.get("length_um", wg.length_um);
    w.get("prop_length_um", wg.prop_length_um);
    w.get("coupling_in", wg.coupling_in);
    w.get("coupling_out", wg.coupling_out);
    w.get("pol_angle_rad", wg.pol_angle_rad);
    w.finish();
  }
  if (r.has("sweep")) {
    ObjectReader s(r.child("sweep"), "sweep");
    SweepSpec sw;
    std::string param = "length_um";
    s.get("parameter", param);
    if (param == "length_um") {
      sw.parameter = SweepParameter::LengthUm;
    } else if (param == "pol_angle_rad") {
      sw.parameter = SweepParameter::PolAngleRad;
    } else {
      throw ConfigError("sweep.parameter", "expected 'length_um' or 'pol_angle_rad', got '" + param + "'");
    }
    s.get("start", sw.start);
    s.get("stop", sw.stop);
    s.get("step", sw.step);
    s.finish();
    cfg.sweep = sw;
  }
  r.get("herald_transmission", cfg.chain.herald_transmission);
  r.get("splitter_ratio", cfg.chain.splitter_ratio);
  if (r.has("detectors")) {
    ObjectReader d(r.child("detectors"), "detectors");
    for (std::size_t i = 0; i < kChannelCount; ++i) {
      const std::string name(channel_name(static_cast<Channel>(i)));
      if (d.has(name.c_str())) cfg.chain.detectors[i] = parse_detector(d.child(name.c_str()), "detectors." + name);
    }
    d.finish();
  }
  if (r.has("coincidence")) {
    ObjectReader c(r.child("coincidence"), "coincidence");
    c.get("window_ps", cfg.window_ps);
    c.get("delays_ps", cfg.delays_ps);
    c.get("tau_min_ps", cfg.tau.tau_min_ps);
    c.get("tau_max_ps", cfg.tau.tau_max_ps);
    c.get("tau_step_ps", cfg.tau.tau_step_ps);
    c.finish();
  }
  r.get("duration_s", cfg.chain.duration_s);
  std::string estimator = "auto";
  r.get("g2_estimator", estimator);
  if (estimator == "auto") {
    cfg.estimator = G2Estimator::Auto;
  } else if (estimator == "conditional") {
    cfg.estimator = G2Estimator::Conditional;
  } else if (estimator == "unconditioned") {
    cfg.estimator = G2Estimator::Unconditioned;
  } else {
    throw ConfigError("g2_estimator", "expected 'auto', 'conditional' or 'unconditioned', got '" + estimator + "'");
  }
  if (r.has("tomography")) {
    ObjectReader t(r.child("tomography"), "tomography");
    TomographySettings ts;
    t.get("eta_d", ts.eta_d);
    t.get("attenuations", ts.attenuations);
    t.get("n_t", ts.n_t);
    t.get("epsilon", ts.epsilon);
    t.get("max_iters", ts.max_iters);
    t.get("mc_trials", ts.mc_trials);
    if (t.has("laser_windows")) {
      ObjectReader w(t.child("laser_windows"), "tomography.laser_windows");
      w.get("window_ps", ts.laser_windows.window_ps);
      w.get("period_ps", ts.laser_windows.period_ps);
      w.get("runs", ts.laser_windows.runs);
      w.get("start_ps", ts.laser_windows.start_ps);
      w.finish();
    }
    t.finish();
    cfg.tomography = ts;
  }
  r.get("write_tags", cfg.write_tags);
  r.get("seed", cfg.seed);
  std::string dir = cfg.output_dir.string();
  r.get("output_dir", dir);
  cfg.output_dir = dir;
  r.finish();
  cfg.validate();
  return cfg;
}

json ScenarioConfig::to_json() const {
  const auto& c = chain;
  json j{{"schema_version", schema_version},
         {"mode", c.mode == SourceMode::Heralded ? "heralded" : "laser"},
         {"source",
          {{"pair_rate", c.source.pair_rate},
           {"double_pair_prob", c.source.double_pair_prob},
           {"laser_rate", c.source.laser_rate}}},
         {"waveguide",
          {{"length_um", c.waveguide.length_um},
           {"prop_length_um", c.waveguide.prop_length_um},
           {"coupling_in", c.waveguide.coupling_in},
           {"coupling_out", c.waveguide.coupling_out},
           {"pol_angle_rad", c.waveguide.pol_angle_rad}}},
         {"herald_transmission", c.herald_transmission},
         {"splitter_ratio", c.splitter_ratio},
         {"detectors",
          {{"A", detector_json(c.detectors[0])},
           {"B1", detector_json(c.detectors[1])},
           {"B2", detector_json(c.detectors[2])}}},
         {"coincidence",
          {{"window_ps", window_ps},
           {"delays_ps", delays_ps},
           {"tau_min_ps", tau.tau_min_ps},
           {"tau_max_ps", tau.tau_max_ps},
           {"tau_step_ps", tau.tau_step_ps}}},
         {"duration_s", c.duration_s},
         {"g2_estimator", estimator == G2Estimator::Auto          ? "auto"
                          : estimator == G2Estimator::Conditional ? "conditional"
                                                                  : "unconditioned"},
         {"write_tags", write_tags},
         {"seed", seed},
         {"output_dir", output_dir.string()}};
  if (sweep) {
    j["sweep"] = {{"parameter", parameter_name(sweep->parameter)},
                  {"start", sweep->start},
                  {"stop", sweep->stop},
                  {"step", sweep->step}};
  }
  if (tomography) {
    const auto& t = *tomography;
    j["tomography"] = {{"eta_d", t.eta_d},
                       {"attenuations", t.attenuations},
                       {"n_t", t.n_t},
                       {"epsilon", t.epsilon},
                       {"max_iters", t.max_iters},
                       {"mc_trials", t.mc_trials},
                       {"laser_windows",
                        {{"window_ps", t.laser_windows.window_ps},
                         {"period_ps", t.laser_windows.period_ps},
                         {"runs", t.laser_windows.runs},
                         {"start_ps", t.laser_windows.start_ps}}}};
  }
  return j;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

void Manifest::write_artifact(const std::string& relative, std::string_view contents) {
  const auto path = root_ / relative;
  std::filesystem::create_directories(path.parent_path());
  write_file(path, contents);
  artifacts_.push_back({{"path", relative}, {"bytes", contents.size()}, {"sha256", sha256_hex(contents)}});
}

void Manifest::stage(const std::string& name, const std::string& status, const std::string& detail) {
  json s{{"name", name}, {"status", status}};
  if (!detail.empty()) s["detail"] = detail;
  stages_.push_back(std::move(s));
}

void Manifest::set_field(const std::string& key, json value) { extra_[key] = std::move(value); }

json Manifest::to_json() const {
  json j = extra_;
  j["stages"] = stages_;
  j["artifacts"] = artifacts_;
  return j;
}

void Manifest::save() const {
  std::filesystem::create_directories(root_);
  write_file(root_ / "manifest.json", to_json().dump(2) + "\n");
}

std::string g2_curve_csv(const std::vector<G2Point>& curve, bool conditional) {
  std::ostringstream os;
  os << "tau_ps,g2,stderr,N_A,N_B1,N_B2,N_pairs,N_triples\n";
  for (const auto& p : curve) {
    const auto& c = p.counts;
    const std::uint64_t pairs = conditional ? c.n_ab1 + c.n_ab2 : c.n_b1b2;
    os << p.tau_ps << ',' << format_double(p.g2) << ',' << format_double(p.std_error) << ',' << c.n_a << ','
       << c.n_b1 << ',' << c.n_b2 << ',' << pairs << ',' << c.n_ab1b2 << '\n';
  }
  return os.str();
}

json run_scenario(const ScenarioConfig& cfg) {
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
  Manifest m(cfg.output_dir);
  json config = cfg.to_json();
  config.erase("output_dir");
  m.set_field("seed", cfg.seed);
  run_stage(m, "config", [&] { m.write_artifact("config.json", config.dump(2) + "\n"); });

  const CoincConfig coinc = cfg.coinc_config();
  std::vector<std::optional<double>> points;
  if (cfg.sweep) {
    for (double v : cfg.sweep->values()) points.emplace_back(v);
  } else {
    points.emplace_back(std::nullopt);
  }

  std::vector<PointResult> results(points.size());
  const std::uint64_t sim_seed = derive_seed(cfg.seed, "simulate");
  for (std::size_t i = 0; i < points.size(); ++i) {
    TagSet tags;
    const std::string suffix = cfg.sweep ? "_" + std::to_string(i) : "";
    run_stage(m, "simulate" + suffix, [&] {
      tags = simulate_chain(chain_at(cfg, points[i]), derive_seed(sim_seed, static_cast<std::uint64_t>(i)));
      if (cfg.write_tags) m.write_artifact("tags" + suffix + ".qtt", encode_tags(tags));
    });
    run_stage(m, "coincidence" + suffix, [&] {
      PointResult& p = results[i];
      p.value = points[i].value_or(0.0);
      p.counts = summarize(tags, coinc, 0);
      g2_at(cfg.conditional(), p);
      if (!cfg.sweep) {
        const auto curve = g2_curve(tags, coinc, cfg.tau, cfg.conditional());
        m.write_artifact("g2_curve.csv", g2_curve_csv(curve, cfg.conditional()));
      }
    });
  }

  run_stage(m, "summary", [&] {
    json arr = json::array();
    for (const auto& p : results) {
      json e{{"counts", p.counts}, {"g2_zero", number_or_null(p.g2)}, {"g2_zero_stderr", number_or_null(p.g2_err)}};
      if (cfg.sweep) e[std::string(parameter_name(cfg.sweep->parameter))] = p.value;
      arr.push_back(std::move(e));
    }
    m.write_artifact("counts.json", arr.dump(2) + "\n");
  });

  if (cfg.sweep && cfg.sweep->parameter == SweepParameter::LengthUm) {
    DecaySeries series;
    run_stage(m, "decay", [&] {
      std::ostringstream decay, g2;
      decay << "length_um,counts,error\n";
      g2 << "length_um,g2,stderr\n";
      for (const auto& p : results) {
        const double n = signal_counts(cfg.chain, p.counts);
        series.lengths_um.push_back(p.value);
        series.counts.push_back(n);
        decay << format_double(p.value) << ',' << format_double(n) << ',' << format_double(std::max(std::sqrt(n), 1.0))
              << '\n';
        g2 << format_double(p.value) << ',' << format_double(p.g2) << ',' << format_double(p.g2_err) << '\n';
      }
      m.write_artifact("decay.csv", decay.str());
      m.write_artifact("g2_vs_length.csv", g2.str());
    });
    run_stage(m, "fit", [&] {
      const DecayFit fit = fit_exponential(series);
      m.write_artifact("fit.json", json(fit).dump(2) + "\n");
    });
  }

  if (cfg.sweep && cfg.sweep->parameter == SweepParameter::PolAngleRad) {
    run_stage(m, "polarization", [&] {
      double peak = 0.0;
      for (const auto& p : results) peak = std::max(peak, signal_counts(cfg.chain, p.counts));
      if (!(peak > 0.0)) throw UndefinedStatisticError("no signal counts in the polarization sweep");
      std::ostringstream os;
      os << "theta_rad,normalized_rate,stderr,cos2\n";
      for (const auto& p : results) {
        const double n = signal_counts(cfg.chain, p.counts);
        const double c = std::cos(p.value);
        os << format_double(p.value) << ',' << format_double(n / peak) << ','
           << format_double(std::max(std::sqrt(n), 1.0) / peak) << ',' << format_double(c * c) << '\n';
      }
      m.write_artifact("polarization.csv", os.str());
    });
  }

  if (cfg.tomography) run_stage(m, "tomography", [&] { run_tomography(cfg, m); });

  m.save();
  return m.to_json();
}

}  // namespace sppq
