#include <cmath>
#include <numbers>

#include "sppq/errors.hpp"
#include "sppq/random.hpp"
#include "sppq/scenario.hpp"
#include "sppq/tag_io.hpp"

namespace sppq {
namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

// Bright heralded source with a well-coupled waveguide; accidentals are small.
ScenarioConfig heralded_preset() {
  ScenarioConfig c;
  c.chain.mode = SourceMode::Heralded;
  c.chain.source.pair_rate = 1e7;
  c.chain.herald_transmission = 0.3;
  c.chain.waveguide = WaveguideSpec{};
  c.chain.duration_s = 1.0;
  c.write_tags = false;
  return c;
}

// Heralding rate near 1e6 /s with a weak herald arm, so that accidentals put the
// heralded g2(0) floor near 0.23 at a 2 ns window.
ScenarioConfig calibrated_preset() {
  ScenarioConfig c = heralded_preset();
  c.chain.source.pair_rate = 6.2e7;
  c.chain.herald_transmission = 0.0308;
  c.chain.waveguide.coupling_in = 0.26;
  c.chain.waveguide.coupling_out = 0.26;
  return c;
}

ScenarioConfig laser_preset(double rate) {
  ScenarioConfig c;
  c.chain.mode = SourceMode::Laser;
  c.chain.source.laser_rate = rate;
  c.chain.duration_s = 1.0;
  c.write_tags = false;
  return c;
}

json read_json(const std::filesystem::path& p) { return json::parse(read_file(p)); }

class Reproduction {
 public:
  Reproduction(std::string figure, std::uint64_t seed, std::filesystem::path root)
      : figure_(std::move(figure)), seed_(seed), root_(std::move(root)), top_(root_) {
    top_.set_field("figure", figure_);
    top_.set_field("seed", seed_);
  }

  // Runs one preset under root/name; its artifacts join the top-level manifest.
  json run(const std::string& name, ScenarioConfig cfg) {
    cfg.seed = derive_seed(seed_, name);
    cfg.output_dir = root_ / name;
    json sub;
    try {
      sub = run_scenario(cfg);
    } catch (const StageError& e) {
      top_.stage(name + "/" + e.stage(), "failed", e.what());
      top_.save();
      throw;
    }
    for (const auto& s : sub["stages"]) top_.stage(name + "/" + s["name"].get<std::string>(), s["status"]);
    for (auto a : sub["artifacts"]) {
      a["path"] = name + "/" + a["path"].get<std::string>();
      artifacts_.push_back(std::move(a));
    }
    return read_json(root_ / name / "counts.json");
  }

  Manifest& top() { return top_; }
  json finish() {
    top_.set_field("runs", artifacts_);
    top_.save();
    return top_.to_json();
  }

 private:
  std::string figure_;
  std::uint64_t seed_;
  std::filesystem::path root_;
  Manifest top_;
  json artifacts_ = json::array();
};

void fig2a(Reproduction& r) {
  ScenarioConfig c = heralded_preset();
  c.sweep = SweepSpec{SweepParameter::PolAngleRad, 0.0, kPi, kPi / 12.0};
  r.run("polarization", c);
}

// Accidental-coincidence predictions from the measured rates of one heralded run.
json accidental_summary(const json& counts, double window_s) {
  const json& c = counts.at(0).at("counts");
  const double t = static_cast<double>(c["integration_time_ps"].get<std::uint64_t>()) * 1e-12;
  auto rate = [&](const char* k) { return static_cast<double>(c[k].get<std::uint64_t>()) / t; };
  const double r_a = rate("N_A"), r_b1 = rate("N_B1"), r_b2 = rate("N_B2");
  const double r_ab1 = rate("N_AB1"), r_ab2 = rate("N_AB2");
  json s{{"R_A", r_a},     {"R_B1", r_b1}, {"R_B2", r_b2},
         {"R_AB1", r_ab1}, {"R_AB2", r_ab2}, {"measured_g2c_zero", counts.at(0).at("g2_zero")},
         {"measured_g2c_zero_stderr", counts.at(0).at("g2_zero_stderr")},
         {"measured_triple_rate", rate("N_AB1B2")}};
  s["predicted_triple_rate"] = accidental_triple_rate(r_ab1, r_b2, r_ab2, r_b1, window_s);
  if (r_ab1 > 0.0 && r_ab2 > 0.0) {
    s["predicted_g2c_zero"] = g2_accidental_offset(r_a, r_b1, r_ab1, r_b2, r_ab2, window_s);
  }
  return s;
}

void fig2b(Reproduction& r) {
  ScenarioConfig source = calibrated_preset();
  source.chain.waveguide.length_um = 0.0;
  ScenarioConfig guide = calibrated_preset();
  const json cs = r.run("source", source);
  const json cw = r.run("waveguide", guide);
  r.run("laser", laser_preset(1.6e7));
  const double window_s = static_cast<double>(guide.window_ps) * 1e-12;
  const json summary{{"source", accidental_summary(cs, window_s)}, {"waveguide", accidental_summary(cw, window_s)}};
  r.top().write_artifact("summary.json", summary.dump(2) + "\n");
}

void fig2c(Reproduction& r) {
  // unconditioned B1-B2 statistics: heralded arm B without the herald, and the laser
  ScenarioConfig heralded = calibrated_preset();
  heralded.estimator = G2Estimator::Unconditioned;
  r.run("heralded", heralded);
  r.run("laser", laser_preset(1.6e7));
}

void fig3(Reproduction& r) {
  // moderate rates keep dead-time saturation at the short lengths small
  ScenarioConfig heralded = heralded_preset();
  heralded.chain.source.pair_rate = 1e6;
  heralded.chain.herald_transmission = 0.5;
  heralded.sweep = SweepSpec{};
  r.run("heralded", heralded);
  ScenarioConfig laser = laser_preset(1e6);
  laser.sweep = SweepSpec{};
  r.run("laser", laser);
}

void fig4(Reproduction& r) {
  ScenarioConfig heralded = heralded_preset();
  heralded.tomography = TomographySettings{};
  r.run("heralded", heralded);

  const TomographySettings t;
  const double window_s = static_cast<double>(t.laser_windows.window_ps) * 1e-12;
  ScenarioConfig laser = laser_preset(0.0);
  // |alpha|^2 = 1.2 photons per gate at the splitter
  laser.chain.source.laser_rate = 1.2 / (waveguide_survival(laser.chain.waveguide) * window_s);
  laser.chain.duration_s = ps_to_seconds(t.laser_windows.runs * t.laser_windows.period_ps);
  laser.tomography = t;
  r.run("laser", laser);
}

}  // namespace

std::vector<std::string> figure_names() { return {"fig2a", "fig2b", "fig2c", "fig3", "fig4"}; }

json reproduce(std::string_view figure, std::uint64_t seed, const std::filesystem::path& out_dir) {
  Reproduction r(std::string(figure), seed, out_dir);
  if (figure == "fig2a") {
    fig2a(r);
  } else if (figure == "fig2b") {
    fig2b(r);
  } else if (figure == "fig2c") {
    fig2c(r);
  } else if (figure == "fig3") {
    fig3(r);
  } else if (figure == "fig4") {
    fig4(r);
  } else {
    throw InputError("unknown figure '" + std::string(figure) + "' (expected fig2a, fig2b, fig2c, fig3 or fig4)");
  }
  return r.finish();
}

}  // namespace sppq
