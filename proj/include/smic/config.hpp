#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smic/censoring.hpp"
#include "smic/ground.hpp"
#include "smic/inference.hpp"

namespace smic {

/// Configuration rejection; the message lists every offending field path.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ChainConfig {
  long long steps = 200000;
  long long burn_in = 50000;
  std::optional<std::size_t> fixed_n;
  long long trace_stride = 0;
};

enum class ConfigFitFamily { Homogeneous, HarmonicExponential, Weibull, Gamma };

struct FitConfig {
  ConfigFitFamily family = ConfigFitFamily::Homogeneous;
  std::string input;
  double elevation = 1.0;
  double frequency = 0.0;
  double t0 = 0.0;
  double horizon = 1.0;
  std::vector<double> piece_breaks;
  std::optional<double> init_rate;
  std::optional<double> init_shape;
  std::optional<std::vector<double>> init_deltas;
};

struct ConditionConfig {
  std::string input;
};

/// Renewal-panel experiment: start-time histograms of the mark kernel at a
/// fixed observation time across four (rate modulation, renewal density)
/// combinations.
struct PanelsConfig {
  double amplitude = 1.6;
  double elevation = 1.3;
  double frequency = 0.0;  // filled with 2*pi by the experiment defaults
  double t0 = -0.2;
  double horizon = 1.0;
  double x = 1.0;
  std::size_t samples = 200000;
  std::size_t bins = 100;
  double level_constant = 0.4;
  double step_break = 0.4;
  std::vector<double> step_levels = {0.4, 0.1};
};

/// Peak-conditioning experiment: conditional chains for the same data under
/// a regular (log_gamma < 0) and a clustered (log_gamma > 0) ground model.
struct PeakConfig {
  std::vector<Mark> data;
  double log_gamma_regular = -1.2;
  double log_gamma_clustered = 1.2;
  double hist_lo = 0.45;
  double hist_hi = 0.85;
  std::size_t bins = 100;
};

/// Density-comparison settings for the misspecification experiment.
struct MisspecConfig {
  double eval_time = 0.6;
  double length_max = 4.0;
  double length_step = 0.02;
};

struct AppConfig {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  int threads = 1;

  std::optional<SemiMarkovKernel> kernel;
  std::optional<RenewalDensity> renewal;
  std::optional<GroundModel> ground;
  ChainConfig chain;
  std::optional<FitConfig> fit;
  std::optional<ConditionConfig> condition;
  std::optional<PanelsConfig> panels;
  std::optional<PeakConfig> peak;
  std::optional<MisspecConfig> misspec;

  /// Normalised JSON echo of the model portion of the configuration
  /// (runtime fields seed/out/threads stripped), embedded in manifests.
  std::string echo_json;
};

AppConfig parse_config_json(const std::string& text);
AppConfig parse_config_file(const std::filesystem::path& path);

/// Deep-merge two JSON documents (override wins on scalar conflicts,
/// objects merge recursively). Used to lay user configuration over
/// experiment defaults.
std::string merge_config_json(const std::string& base, const std::string& override_text);

}  // namespace smic
