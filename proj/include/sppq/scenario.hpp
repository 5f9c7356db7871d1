#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sppq/coincidence.hpp"
#include "sppq/errors.hpp"
#include "sppq/pipeline.hpp"
#include "sppq/tomography.hpp"

namespace sppq {

inline constexpr int kSchemaVersion = 1;

/// Parameter stepped across a sweep.
enum class SweepParameter { LengthUm, PolAngleRad };

struct SweepSpec {
  SweepParameter parameter = SweepParameter::LengthUm;
  double start = 5.0;
  double stop = 30.0;
  double step = 2.5;

  std::vector<double> values() const;
};

/// Which g2 estimator a run reports. Auto is conditional for heralded runs and
/// unconditioned for laser runs.
enum class G2Estimator { Auto, Conditional, Unconditioned };

struct TomographySettings {
  double eta_d = kDefaultDetectionEfficiency;
  std::vector<double> attenuations{1.0, 0.8, 0.64, 0.5, 0.4, 0.3, 0.2, 0.1};
  int n_t = 6;
  double epsilon = 1e-8;
  std::uint64_t max_iters = 1'000'000;
  std::uint64_t mc_trials = 100;
  LaserWindows laser_windows;
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  ChainSpec chain;
  std::optional<SweepSpec> sweep;
  std::uint64_t window_ps = 2000;
  std::array<std::int64_t, kChannelCount> delays_ps{};
  DelaySweep tau;
  G2Estimator estimator = G2Estimator::Auto;
  std::optional<TomographySettings> tomography;
  bool write_tags = true;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";

  /// Throws ConfigError naming the offending field.
  void validate() const;
  CoincConfig coinc_config() const;
  bool conditional() const;

  /// Strict parse: unknown keys and a wrong schema_version are rejected.
  static ScenarioConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Failure inside one stage of a run; the stage name is kept for the exit message.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Records artifacts and stage outcomes of a run and writes manifest.json.
class Manifest {
 public:
  explicit Manifest(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }

  /// Writes `contents` to root/relative and records its SHA-256.
  void write_artifact(const std::string& relative, std::string_view contents);
  void stage(const std::string& name, const std::string& status, const std::string& detail = {});
  void set_field(const std::string& key, nlohmann::json value);

  nlohmann::json to_json() const;
  void save() const;

 private:
  std::filesystem::path root_;
  nlohmann::json artifacts_ = nlohmann::json::array();
  nlohmann::json stages_ = nlohmann::json::array();
  nlohmann::json extra_ = nlohmann::json::object();
};

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Runs `body` as a named stage: success and failure are recorded in the
/// manifest, and any error is rethrown as StageError after the manifest is saved.
template <typename Fn>
void run_stage(Manifest& m, const std::string& name, Fn&& body) {
  try {
    body();
    m.stage(name, "ok");
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    m.stage(name, "failed", e.what());
    m.save();
    throw StageError(name, e.what());
  }
}

/// Simulates, analyzes, reconstructs and fits as the config requests, writing
/// every artifact under cfg.output_dir. Returns the manifest.
nlohmann::json run_scenario(const ScenarioConfig& cfg);

/// Names accepted by reproduce().
std::vector<std::string> figure_names();

/// Desk-scale reproduction of one figure into `out_dir`. Throws InputError for
/// an unknown figure.
nlohmann::json reproduce(std::string_view figure, std::uint64_t seed, const std::filesystem::path& out_dir);

/// Plot-ready CSV of a g2 curve. N_pairs is AB1 + AB2 for a conditional curve
/// and B1B2 otherwise.
std::string g2_curve_csv(const std::vector<G2Point>& curve, bool conditional);

}  // namespace sppq
