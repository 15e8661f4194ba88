#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smic/config.hpp"
#include "smic/inference.hpp"

namespace smic {

struct ExperimentResult {
  std::filesystem::path out_dir;
  std::vector<std::string> outputs;  // file names written, manifest excluded
  std::optional<FitReport> fit;
};

/// Built-in configuration (JSON text) for a named experiment; user
/// configuration is merged on top of this. Names: misspec, renewal-panels,
/// peak-conditional.
std::string default_experiment_config(const std::string& name);

/// Simulate ground points, censor each one through the mark kernel, write
/// marks.csv.
ExperimentResult run_simulate(const AppConfig& config);

/// Fit the configured family to a marks CSV, write fit_report.json.
ExperimentResult run_fit(const AppConfig& config);

/// Conditional chain for a marks CSV under the configured ground model,
/// write chain.csv.
ExperimentResult run_condition(const AppConfig& config);

/// Simulate from a harmonic-rate model, fit a homogeneous Weibull family,
/// write the dataset, the fit report, and a true-vs-fitted density table.
ExperimentResult run_misspec(const AppConfig& config);

/// Start-time histograms of the mark kernel at a fixed observation time for
/// four modulation/renewal combinations (panel_a..panel_d.csv).
ExperimentResult run_renewal_panels(const AppConfig& config);

/// Conditional-chain histograms under regular and clustered ground models
/// (conditional_regular.csv, conditional_clustered.csv).
ExperimentResult run_peak_conditional(const AppConfig& config);

/// Dispatch by experiment name (see default_experiment_config).
ExperimentResult run_experiment(const std::string& name, const AppConfig& config);

}  // namespace smic
