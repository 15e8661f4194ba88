#include "smic/experiments.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "smic/csv.hpp"
#include "smic/parallel.hpp"
#include "smic/version.hpp"

namespace smic {

namespace {

using nlohmann::json;

std::filesystem::path require_out_dir(const AppConfig& config) {
  if (!config.out_dir) throw ConfigError("an output directory is required (--out)");
  std::filesystem::path dir(*config.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::uint64_t require_seed(const AppConfig& config) {
  if (!config.seed) throw ConfigError("a seed is required (--seed)");
  return *config.seed;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Config echo + library version + seed; output paths never enter, so a rerun
// into a different directory produces identical bytes.
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const AppConfig& config, std::vector<std::string> outputs) {
  std::sort(outputs.begin(), outputs.end());
  json manifest;
  manifest["command"] = command;
  manifest["version"] = kVersion;
  if (config.seed) manifest["seed"] = *config.seed;
  manifest["config"] =
      config.echo_json.empty() ? json::object() : json::parse(config.echo_json);
  manifest["outputs"] = outputs;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

json fit_report_json(const FitReport& report) {
  json params;
  params["family"] = to_string(report.family);
  if (report.family == FitFamily::HarmonicExponential) {
    params["amplitude"] = report.rate;
    if (const Harmonic* h = report.params.kernel.rate_fn().harmonic()) {
      params["elevation"] = h->elevation;
      params["frequency"] = h->frequency;
    }
  } else {
    params["shape"] = report.shape;
    params["rate"] = report.rate;
  }
  params["delta"] = report.deltas;
  params["t0"] = report.params.renewal.t0();
  params["horizon"] = report.params.renewal.horizon();
  params["breaks"] = report.params.renewal.interior_breakpoints();
  json doc;
  doc["params"] = params;
  doc["loglik"] = report.loglik;
  doc["iters"] = report.iters;
  doc["active_constraints"] = report.active_constraints;
  return doc;
}

MhOptions mh_options(const ChainConfig& chain) {
  MhOptions options;
  options.n_steps = chain.steps;
  options.burn_in = chain.burn_in;
  options.fixed_n = chain.fixed_n;
  options.trace_stride = chain.trace_stride;
  return options;
}

FitFamily to_fit_family(ConfigFitFamily family) {
  switch (family) {
    case ConfigFitFamily::HarmonicExponential:
      return FitFamily::HarmonicExponential;
    case ConfigFitFamily::Gamma:
      return FitFamily::Gamma;
    default:
      return FitFamily::Weibull;
  }
}

MleSpec mle_spec(const FitConfig& fit) {
  MleSpec spec;
  spec.family = to_fit_family(fit.family);
  spec.elevation = fit.elevation;
  spec.frequency = fit.frequency;
  spec.t0 = fit.t0;
  spec.horizon = fit.horizon;
  spec.piece_breaks = fit.piece_breaks;
  spec.init_rate = fit.init_rate;
  spec.init_shape = fit.init_shape;
  spec.init_deltas = fit.init_deltas;
  return spec;
}

// Ground configuration plus one mark per point, streams 1 (ground) and
// 2 (marks) of the master seed.
std::vector<std::pair<double, Mark>> simulate_marked_dataset(const AppConfig& config,
                                                             std::uint64_t seed,
                                                             MhResult* ground_out = nullptr) {
  if (!config.kernel || !config.renewal || !config.ground)
    throw ConfigError("simulate needs kernel, renewal, and ground blocks");
  const CensoringModel model(*config.kernel, *config.renewal);
  RngStream ground_rng = RngStream::derive(seed, 1);
  MhResult ground = sample_mh(*config.ground, mh_options(config.chain), ground_rng);

  RngStream mark_rng = RngStream::derive(seed, 2);
  std::vector<std::pair<double, Mark>> marks;
  marks.reserve(ground.config.size());
  for (double x : ground.config.points()) marks.emplace_back(x, model.sample_mark(x, mark_rng));
  if (ground_out) *ground_out = std::move(ground);
  return marks;
}

}  // namespace

std::string default_experiment_config(const std::string& name) {
  const double two_pi = 2.0 * std::numbers::pi;
  json config;
  if (name == "misspec") {
    config["kernel"] = {{"family", "harmonic_exponential"},
                        {"amplitude", 1.0},
                        {"elevation", 1.6},
                        {"frequency", two_pi}};
    config["renewal"] = {{"t0", -0.2}, {"horizon", 1.0}, {"level", 0.6}};
    config["ground"] = {{"window", {0.0, 1.0}},
                        {"beta", 400.0},
                        {"log_gamma", 0.0},
                        {"radius", 0.1}};
    config["chain"] = {{"steps", 200000}, {"burn_in", 50000}};
    config["fit"] = {{"family", "weibull"}, {"t0", -0.2}, {"horizon", 1.0}};
    config["misspec"] = {{"eval_time", 0.6}, {"length_max", 4.0}, {"length_step", 0.02}};
  } else if (name == "renewal-panels") {
    config["panels"] = {{"amplitude", 1.6},
                        {"elevation", 1.3},
                        {"frequency", two_pi},
                        {"t0", -0.2},
                        {"horizon", 1.0},
                        {"x", 1.0},
                        {"samples", 200000},
                        {"bins", 100},
                        {"level_constant", 0.4},
                        {"step_break", 0.4},
                        {"step_levels", {0.4, 0.1}}};
  } else if (name == "peak-conditional") {
    config["ground"] = {{"window", {0.0, 1.0}},
                        {"beta", {{"breaks", {0.81, 0.85}}, {"levels", {3.0, 5.0, 3.0}}}},
                        {"log_gamma", 0.0},
                        {"radius", 0.1}};
    config["chain"] = {{"steps", 600000}, {"burn_in", 100000}};
    config["peak"] = {{"data", {{0.45, 0.4}, {0.51, 0.0}, {0.58, 0.0}}},
                      {"log_gamma_regular", -1.2},
                      {"log_gamma_clustered", 1.2},
                      {"hist_lo", 0.45},
                      {"hist_hi", 0.85},
                      {"bins", 100}};
  } else {
    throw ConfigError("unknown experiment '" + name +
                      "' (expected misspec, renewal-panels, or peak-conditional)");
  }
  return config.dump(2);
}

ExperimentResult run_simulate(const AppConfig& config) {
  const auto dir = require_out_dir(config);
  const auto seed = require_seed(config);
  MhResult ground;
  const auto marks = simulate_marked_dataset(config, seed, &ground);

  ExperimentResult result;
  result.out_dir = dir;
  write_marks_csv(dir / "marks.csv", marks);
  result.outputs.push_back("marks.csv");
  write_points_csv(dir / "ground_points.csv", ground.config.points());
  result.outputs.push_back("ground_points.csv");
  if (!ground.trace.empty()) {
    write_ground_trace_csv(dir / "ground_trace.csv", ground.trace);
    result.outputs.push_back("ground_trace.csv");
  }
  write_manifest(dir, "simulate", config, result.outputs);
  return result;
}

ExperimentResult run_fit(const AppConfig& config) {
  const auto dir = require_out_dir(config);
  if (!config.fit) throw ConfigError("fit needs a fit block");
  const FitConfig& fit = *config.fit;
  if (fit.input.empty()) throw ConfigError("fit.input is required");
  const IntervalSet data = read_interval_set_csv(fit.input);

  ExperimentResult result;
  result.out_dir = dir;
  json report;
  if (fit.family == ConfigFitFamily::Homogeneous) {
    const HomogeneousFit hom = fit_homogeneous(data);
    report["params"] = {{"family", "homogeneous"}, {"rate", hom.rate}, {"delta", hom.delta}};
    report["loglik"] = homogeneous_log_likelihood(hom.rate, hom.delta, data);
    report["iters"] = 0;
    report["active_constraints"] = json::array();
  } else {
    FitReport fitted = fit_mle(data, mle_spec(fit));
    report = fit_report_json(fitted);
    result.fit = std::move(fitted);
  }
  write_text(dir / "fit_report.json", report.dump(2) + "\n");
  result.outputs.push_back("fit_report.json");
  write_manifest(dir, "fit", config, result.outputs);
  return result;
}

ExperimentResult run_condition(const AppConfig& config) {
  const auto dir = require_out_dir(config);
  const auto seed = require_seed(config);
  if (!config.condition) throw ConfigError("condition needs a condition block");
  if (!config.ground) throw ConfigError("condition needs a ground block");
  if (config.condition->input.empty()) throw ConfigError("condition.input is required");
  const IntervalSet data = read_interval_set_csv(config.condition->input);

  const long long stride = config.chain.trace_stride > 0 ? config.chain.trace_stride : 1;
  const long long burn_in = config.chain.burn_in;
  std::vector<std::pair<long long, std::vector<double>>> rows;
  RngStream rng = RngStream::derive(seed, 3);
  sample_conditional(*config.ground, data, config.chain.steps, burn_in, rng,
                     [&](long long step, const ConditionalChainState& state) {
                       if ((step - burn_in - 1) % stride == 0)
                         rows.emplace_back(step, state.positions);
                     });

  std::ofstream out(dir / "chain.csv", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (dir / "chain.csv").string());
  out << "step";
  for (std::size_t j = 1; j <= data.interval_count(); ++j) out << ",x_" << j;
  out << "\n";
  for (const auto& [step, positions] : rows) {
    out << step;
    for (double value : positions) out << "," << format_double(value);
    out << "\n";
  }
  out.close();

  ExperimentResult result;
  result.out_dir = dir;
  result.outputs.push_back("chain.csv");
  write_manifest(dir, "condition", config, result.outputs);
  return result;
}

ExperimentResult run_misspec(const AppConfig& config) {
  const auto dir = require_out_dir(config);
  const auto seed = require_seed(config);
  if (!config.fit || !config.misspec)
    throw ConfigError("the misspec experiment needs fit and misspec blocks");
  const auto marks = simulate_marked_dataset(config, seed);

  std::vector<Mark> observed;
  observed.reserve(marks.size());
  for (const auto& [x, mark] : marks) observed.push_back(mark);
  FitReport fitted = fit_mle(IntervalSet(std::move(observed)), mle_spec(*config.fit));

  ExperimentResult result;
  result.out_dir = dir;
  write_marks_csv(dir / "marks.csv", marks);
  result.outputs.push_back("marks.csv");
  write_text(dir / "fit_report.json", fit_report_json(fitted).dump(2) + "\n");
  result.outputs.push_back("fit_report.json");

  // True vs fitted sojourn density at the evaluation time, over a length
  // grid; the true column at l = 0 is the harmonic rate there.
  const MisspecConfig& curve = *config.misspec;
  const SemiMarkovKernel& truth = *config.kernel;
  std::ofstream out(dir / "survival_time_density.csv", std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot write " + (dir / "survival_time_density.csv").string());
  out << "true_density,fitted_density\n";
  const auto n_rows = static_cast<std::size_t>(
      std::floor(curve.length_max / curve.length_step + 0.5));
  for (std::size_t i = 0; i <= n_rows; ++i) {
    const double l = static_cast<double>(i) * curve.length_step;
    out << format_double(truth.density(curve.eval_time, l)) << ","
        << format_double(fitted.params.kernel.density(0.0, l)) << "\n";
  }
  out.close();
  result.outputs.push_back("survival_time_density.csv");

  result.fit = std::move(fitted);
  write_manifest(dir, "experiment misspec", config, result.outputs);
  return result;
}

ExperimentResult run_renewal_panels(const AppConfig& config) {
  const auto dir = require_out_dir(config);
  const auto seed = require_seed(config);
  if (!config.panels) throw ConfigError("the renewal-panels experiment needs a panels block");
  const PanelsConfig& p = *config.panels;
  if (p.step_levels.size() != 2)
    throw ConfigError("panels.step_levels: expected exactly two levels");

  const SemiMarkovKernel constant_rate =
      SemiMarkovKernel::harmonic_exponential(p.amplitude, p.elevation, 0.0);
  const SemiMarkovKernel harmonic_rate =
      SemiMarkovKernel::harmonic_exponential(p.amplitude, p.elevation, p.frequency);
  const RenewalDensity constant_renewal =
      RenewalDensity::constant(p.t0, p.horizon, p.level_constant);
  const RenewalDensity step_renewal(
      p.t0, {{p.t0, p.step_break, p.step_levels[0]},
             {p.step_break, p.horizon, p.step_levels[1]}});

  struct Panel {
    const char* file;
    const SemiMarkovKernel* kernel;
    const RenewalDensity* renewal;
  };
  const Panel panels[] = {{"panel_a.csv", &constant_rate, &constant_renewal},
                          {"panel_b.csv", &constant_rate, &step_renewal},
                          {"panel_c.csv", &harmonic_rate, &constant_renewal},
                          {"panel_d.csv", &harmonic_rate, &step_renewal}};
  for (const Panel& panel : panels) {
    const double bound = delta_upper_bound(*panel.kernel);
    if (panel.renewal->max_level() > bound)
      throw ConfigError("renewal level " + format_double(panel.renewal->max_level()) +
                        " exceeds the atom-probability bound " + format_double(bound));
  }

  Histogram histograms[4];
  parallel_for(4, config.threads, [&](std::size_t i) {
    const Panel& panel = panels[i];
    const CensoringModel model(*panel.kernel, *panel.renewal);
    RngStream rng = RngStream::derive(seed, 10 + i);
    std::vector<double> starts;
    starts.reserve(p.samples);
    for (std::size_t s = 0; s < p.samples; ++s)
      starts.push_back(model.sample_interval(p.x, rng).start);
    histograms[i] = make_histogram(starts, p.t0, p.x, p.bins);
  });

  ExperimentResult result;
  result.out_dir = dir;
  for (std::size_t i = 0; i < 4; ++i) {
    write_histogram_csv(dir / panels[i].file, histograms[i]);
    result.outputs.push_back(panels[i].file);
  }
  write_manifest(dir, "experiment renewal-panels", config, result.outputs);
  return result;
}

ExperimentResult run_peak_conditional(const AppConfig& config) {
  const auto dir = require_out_dir(config);
  const auto seed = require_seed(config);
  if (!config.peak) throw ConfigError("the peak-conditional experiment needs a peak block");
  if (!config.ground) throw ConfigError("the peak-conditional experiment needs a ground block");
  const PeakConfig& peak = *config.peak;
  const GroundModel& base = *config.ground;
  const IntervalSet data(peak.data);

  const double log_gammas[2] = {peak.log_gamma_regular, peak.log_gamma_clustered};
  Histogram histograms[2];
  parallel_for(2, config.threads, [&](std::size_t i) {
    const GroundModel model(base.window_lo(), base.window_hi(), base.beta_fn(),
                            log_gammas[i], base.radius());
    RngStream rng = RngStream::derive(seed, 20 + i);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(
        std::max<long long>(0, config.chain.steps - config.chain.burn_in)));
    sample_conditional(model, data, config.chain.steps, config.chain.burn_in, rng,
                       [&](long long, const ConditionalChainState& state) {
                         for (double value : state.positions) values.push_back(value);
                       });
    histograms[i] = make_histogram(values, peak.hist_lo, peak.hist_hi, peak.bins);
  });

  ExperimentResult result;
  result.out_dir = dir;
  const char* files[2] = {"conditional_regular.csv", "conditional_clustered.csv"};
  for (std::size_t i = 0; i < 2; ++i) {
    write_histogram_csv(dir / files[i], histograms[i]);
    result.outputs.push_back(files[i]);
  }
  write_manifest(dir, "experiment peak-conditional", config, result.outputs);
  return result;
}

ExperimentResult run_experiment(const std::string& name, const AppConfig& config) {
  if (name == "misspec") return run_misspec(config);
  if (name == "renewal-panels") return run_renewal_panels(config);
  if (name == "peak-conditional") return run_peak_conditional(config);
  throw ConfigError("unknown experiment '" + name +
                    "' (expected misspec, renewal-panels, or peak-conditional)");
}

}  // namespace smic
