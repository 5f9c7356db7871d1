// Command-line front end: simulate, analyze, reconstruct, fit and reproduce.

#include <complex>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sppq/coincidence.hpp"
#include "sppq/dispersion.hpp"
#include "sppq/errors.hpp"
#include "sppq/fitting.hpp"
#include "sppq/scenario.hpp"
#include "sppq/tag_io.hpp"
#include "sppq/tomography.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool is_csv(const fs::path& p) { return p.extension() == ".csv"; }

sppq::TagSet load_tags(const fs::path& p) { return is_csv(p) ? sppq::read_tags_csv(p) : sppq::read_tags(p); }

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    sppq::write_file(out, text);
  }
}

template <typename T>
std::vector<T> json_vector(const json& j, const char* key) {
  if (!j.contains(key)) throw sppq::InputError(std::string("missing '") + key + "'");
  return j.at(key).get<std::vector<T>>();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heralded single-plasmon simulation and analysis"};
  app.require_subcommand(1);
  std::string stage = "cli";

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run a scenario from a JSON config");
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  sim->add_option("--config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--seed", seed, "Override the master seed");
  sim->add_option("--out", out_dir, "Override the output directory");

  // g2
  auto* g2 = app.add_subcommand("g2", "g2(tau) from a time-tag file (.qtt or .csv)");
  std::string tags_path;
  std::uint64_t window_ps = 2000;
  std::int64_t tau_min = -20'000, tau_max = 20'000, tau_step = 500;
  std::vector<std::int64_t> delays{0, 0, 0};
  bool unconditioned = false;
  std::string g2_out = "g2";
  g2->add_option("--tags", tags_path, "Time-tag file")->required()->check(CLI::ExistingFile);
  g2->add_option("--window-ps", window_ps, "Full coincidence window");
  g2->add_option("--tau-min-ps", tau_min);
  g2->add_option("--tau-max-ps", tau_max);
  g2->add_option("--tau-step-ps", tau_step);
  g2->add_option("--delays-ps", delays, "Per-channel delays A,B1,B2")->expected(3)->delimiter(',');
  g2->add_flag("--unconditioned", unconditioned, "B1-B2 estimator instead of the heralded one");
  g2->add_option("--out", g2_out, "Output directory");

  // tomo
  auto* tomo = app.add_subcommand("tomo", "EM population reconstruction from no-click data");
  std::string tomo_in, tomo_out;
  int n_t = 6;
  double epsilon = 1e-8;
  std::uint64_t max_iters = 1'000'000;
  std::uint64_t mc_trials = 200;
  tomo->add_option("--input", tomo_in, "JSON {etas, freqs, trials[, sigma]}")->required()->check(CLI::ExistingFile);
  tomo->add_option("--n-t", n_t, "Photon-number truncation");
  tomo->add_option("--epsilon", epsilon);
  tomo->add_option("--max-iters", max_iters);
  tomo->add_option("--mc-trials", mc_trials, "Monte-Carlo error trials (0 disables)");
  tomo->add_option("--seed", seed);
  tomo->add_option("--out", tomo_out, "Output JSON (default stdout)");

  // fit
  auto* fit = app.add_subcommand("fit", "Exponential propagation-length fit");
  std::string fit_in, fit_out;
  fit->add_option("--input", fit_in, "CSV length_um,counts[,error]")->required()->check(CLI::ExistingFile);
  fit->add_option("--out", fit_out, "Output JSON (default stdout)");

  // dispersion
  auto* disp = app.add_subcommand("dispersion", "Stripe SPP wavevector and grating period");
  double wavelength = 808.0, width = 3.0, eps_re = std::numeric_limits<double>::quiet_NaN(), eps_im = 0.0;
  std::string material = "gold";
  int order = 1;
  std::string disp_out;
  disp->add_option("--wavelength-nm", wavelength);
  disp->add_option("--width-um", width, "Stripe width ('inf' for a flat interface)");
  auto* re_opt = disp->add_option("--eps-re", eps_re);
  disp->add_option("--eps-im", eps_im)->needs(re_opt);
  disp->add_option("--material", material)->check(CLI::IsMember({"gold"}))->excludes(re_opt);
  disp->add_option("--order", order)->check(CLI::PositiveNumber);
  disp->add_option("--out", disp_out);

  // reproduce
  auto* repro = app.add_subcommand("reproduce", "Desk-scale reproduction of one figure");
  std::string figure;
  std::uint64_t repro_seed = 1;
  std::string repro_out;
  repro->add_option("figure", figure)->required()->check(CLI::IsMember(sppq::figure_names()));
  repro->add_option("--seed", repro_seed);
  repro->add_option("--out", repro_out, "Output directory (default out/<figure>)");

  // convert
  auto* conv = app.add_subcommand("convert", "Convert time tags between .qtt and .csv");
  std::string conv_in, conv_out;
  conv->add_option("input", conv_in)->required()->check(CLI::ExistingFile);
  conv->add_option("output", conv_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      stage = "config";
      sppq::ScenarioConfig cfg = sppq::ScenarioConfig::from_json(json::parse(sppq::read_file(config_path)));
      if (sim->count("--seed")) cfg.seed = seed;
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      stage = "simulate";
      sppq::run_scenario(cfg);
      std::cout << (cfg.output_dir / "manifest.json").string() << '\n';
    } else if (*g2) {
      stage = "read_tags";
      const sppq::TagSet tags = load_tags(tags_path);
      stage = "g2";
      sppq::CoincConfig cfg;
      cfg.window_ps = window_ps;
      for (std::size_t i = 0; i < sppq::kChannelCount; ++i) cfg.channel_delays_ps[i] = delays[i];
      cfg.integration_time_ps = tags.duration_ps;
      const auto curve = sppq::g2_curve(tags, cfg, {tau_min, tau_max, tau_step}, !unconditioned);
      fs::create_directories(g2_out);
      sppq::write_file(fs::path(g2_out) / "g2.csv", sppq::g2_curve_csv(curve, !unconditioned));
      const json summary = sppq::summarize(tags, cfg, 0);
      sppq::write_file(fs::path(g2_out) / "summary.json", summary.dump(2) + "\n");
    } else if (*tomo) {
      stage = "read_input";
      const json in = json::parse(sppq::read_file(tomo_in));
      sppq::EfficiencyLadder ladder{json_vector<double>(in, "etas")};
      sppq::NoClickData data;
      data.freqs = json_vector<double>(in, "freqs");
      data.trials = json_vector<double>(in, "trials");
      if (in.contains("sigma")) {
        data.sigma = in.at("sigma").get<std::vector<double>>();
      } else {
        data.set_binomial_sigma();
      }
      stage = "tomography";
      sppq::EmOptions opts;
      opts.epsilon = epsilon;
      opts.max_iters = max_iters;
      const auto result = sppq::em_reconstruct(data, ladder, n_t, opts);
      json out = result;
      if (mc_trials > 0) out["errors"] = sppq::monte_carlo_errors(data, ladder, n_t, mc_trials, seed, opts);
      emit(out.dump(2) + "\n", tomo_out);
    } else if (*fit) {
      stage = "read_input";
      const auto series = sppq::decay_series_from_csv(sppq::read_file(fit_in));
      stage = "fit";
      emit(json(sppq::fit_exponential(series)).dump(2) + "\n", fit_out);
    } else if (*disp) {
      stage = "dispersion";
      sppq::StripeParams p;
      p.wavelength_nm = wavelength;
      p.width_um = width;
      p.eps_metal = disp->count("--eps-re") ? std::complex<double>(eps_re, eps_im) : sppq::gold_permittivity(wavelength);
      const json out{{"k_sp_per_um", sppq::spp_wavevector(p)},
                     {"period_nm", sppq::grating_period(p, order)},
                     {"eps_metal", {p.eps_metal.real(), p.eps_metal.imag()}}};
      emit(out.dump(2) + "\n", disp_out);
    } else if (*repro) {
      stage = "reproduce " + figure;
      const fs::path out = repro_out.empty() ? fs::path("out") / figure : fs::path(repro_out);
      sppq::reproduce(figure, repro_seed, out);
      std::cout << (out / "manifest.json").string() << '\n';
    } else if (*conv) {
      stage = "convert";
      const sppq::TagSet tags = load_tags(conv_in);
      if (is_csv(conv_out)) {
        sppq::write_tags_csv(conv_out, tags);
      } else {
        sppq::write_tags(conv_out, tags);
      }
    }
  } catch (const sppq::StageError& e) {
    std::cerr << "error [" << e.stage() << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error [" << stage << "]: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
