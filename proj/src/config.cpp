#include "smic/config.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace smic {

namespace {

using nlohmann::json;

// Collects offending field paths so one parse reports every problem at once.
struct ErrorSink {
  std::vector<std::string> errors;

  void add(const std::string& path, const std::string& what) {
    errors.push_back(path + ": " + what);
  }
  void raise_if_any() const {
    if (errors.empty()) return;
    std::ostringstream msg;
    msg << "invalid configuration (" << errors.size() << " problem"
        << (errors.size() == 1 ? "" : "s") << "):";
    for (const auto& e : errors) msg << "\n  - " << e;
    throw ConfigError(msg.str());
  }
};

double require_number(const json& node, const std::string& path, ErrorSink& sink,
                      double fallback = 0.0) {
  if (!node.is_number()) {
    sink.add(path, "expected a number");
    return fallback;
  }
  return node.get<double>();
}

std::optional<double> optional_number(const json& parent, const char* key,
                                      const std::string& path, ErrorSink& sink) {
  if (!parent.contains(key)) return std::nullopt;
  return require_number(parent.at(key), path + "." + key, sink);
}

std::vector<double> require_number_array(const json& node, const std::string& path,
                                         ErrorSink& sink) {
  std::vector<double> out;
  if (!node.is_array()) {
    sink.add(path, "expected an array of numbers");
    return out;
  }
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number()) {
      sink.add(path + "[" + std::to_string(i) + "]", "expected a number");
      return out;
    }
    out.push_back(node[i].get<double>());
  }
  return out;
}

// A parameter of a kernel: a plain number, or an object
// {"harmonic": {"amplitude", "elevation", "frequency"}}.
std::optional<TimeFunction> parse_time_function(const json& node, const std::string& path,
                                                ErrorSink& sink) {
  if (node.is_number()) return TimeFunction(node.get<double>());
  if (node.is_object() && node.contains("harmonic")) {
    const json& h = node.at("harmonic");
    Harmonic harmonic;
    harmonic.amplitude = require_number(h.value("amplitude", json(1.0)),
                                        path + ".harmonic.amplitude", sink, 1.0);
    harmonic.elevation = require_number(h.value("elevation", json(1.0)),
                                        path + ".harmonic.elevation", sink, 1.0);
    harmonic.frequency = require_number(h.value("frequency", json(0.0)),
                                        path + ".harmonic.frequency", sink, 0.0);
    return TimeFunction(harmonic);
  }
  sink.add(path, "expected a number or {\"harmonic\": {...}}");
  return std::nullopt;
}

std::optional<SemiMarkovKernel> parse_kernel(const json& node, const std::string& path,
                                             ErrorSink& sink) {
  if (!node.is_object() || !node.contains("family")) {
    sink.add(path, "expected an object with a 'family' key");
    return std::nullopt;
  }
  const std::string family = node.at("family").is_string()
                                 ? node.at("family").get<std::string>()
                                 : std::string();
  try {
    if (family == "harmonic_exponential") {
      const double amplitude =
          require_number(node.value("amplitude", json()), path + ".amplitude", sink);
      const double elevation =
          require_number(node.value("elevation", json(1.0)), path + ".elevation", sink, 1.0);
      const double frequency =
          require_number(node.value("frequency", json(0.0)), path + ".frequency", sink, 0.0);
      if (!sink.errors.empty()) return std::nullopt;
      return SemiMarkovKernel::harmonic_exponential(amplitude, elevation, frequency);
    }
    if (family == "gamma" || family == "weibull") {
      if (!node.contains("shape") || !node.contains("rate")) {
        sink.add(path, "family '" + family + "' needs 'shape' and 'rate'");
        return std::nullopt;
      }
      auto shape = parse_time_function(node.at("shape"), path + ".shape", sink);
      auto rate = parse_time_function(node.at("rate"), path + ".rate", sink);
      if (!shape || !rate) return std::nullopt;
      return family == "gamma" ? SemiMarkovKernel::gamma(*shape, *rate)
                               : SemiMarkovKernel::weibull(*shape, *rate);
    }
  } catch (const std::invalid_argument& e) {
    sink.add(path, e.what());
    return std::nullopt;
  }
  sink.add(path + ".family",
           "unknown family '" + family +
               "' (expected gamma, weibull, or harmonic_exponential)");
  return std::nullopt;
}

std::optional<RenewalDensity> parse_renewal(const json& node, const std::string& path,
                                            ErrorSink& sink) {
  if (!node.is_object()) {
    sink.add(path, "expected an object");
    return std::nullopt;
  }
  if (!node.contains("t0")) {
    sink.add(path + ".t0", "required");
    return std::nullopt;
  }
  const double t0 = require_number(node.at("t0"), path + ".t0", sink);
  try {
    if (node.contains("pieces")) {
      const json& pieces_node = node.at("pieces");
      if (!pieces_node.is_array()) {
        sink.add(path + ".pieces", "expected an array of {start, end, level}");
        return std::nullopt;
      }
      std::vector<RenewalPiece> pieces;
      for (std::size_t i = 0; i < pieces_node.size(); ++i) {
        const std::string at = path + ".pieces[" + std::to_string(i) + "]";
        const json& p = pieces_node[i];
        if (!p.is_object()) {
          sink.add(at, "expected an object {start, end, level}");
          return std::nullopt;
        }
        RenewalPiece piece;
        piece.start = require_number(p.value("start", json()), at + ".start", sink);
        piece.end = require_number(p.value("end", json()), at + ".end", sink);
        piece.level = require_number(p.value("level", json()), at + ".level", sink);
        pieces.push_back(piece);
      }
      if (!sink.errors.empty()) return std::nullopt;
      return RenewalDensity(t0, std::move(pieces));
    }
    if (node.contains("horizon") && node.contains("level")) {
      const double horizon = require_number(node.at("horizon"), path + ".horizon", sink);
      const double level = require_number(node.at("level"), path + ".level", sink);
      return RenewalDensity::constant(t0, horizon, level);
    }
  } catch (const std::invalid_argument& e) {
    sink.add(path, e.what());
    return std::nullopt;
  }
  sink.add(path, "needs either 'pieces' or 'horizon' + 'level'");
  return std::nullopt;
}

std::optional<GroundModel> parse_ground(const json& node, const std::string& path,
                                        ErrorSink& sink) {
  if (!node.is_object()) {
    sink.add(path, "expected an object");
    return std::nullopt;
  }
  const json window = node.value("window", json::array());
  if (!window.is_array() || window.size() != 2 || !window[0].is_number() ||
      !window[1].is_number()) {
    sink.add(path + ".window", "expected [lo, hi]");
    return std::nullopt;
  }
  double log_gamma = 0.0;
  if (node.contains("log_gamma"))
    log_gamma = require_number(node.at("log_gamma"), path + ".log_gamma", sink);
  const double radius =
      require_number(node.value("radius", json(0.0)), path + ".radius", sink, 0.0);

  std::optional<StepFunction> beta;
  if (node.contains("beta")) {
    const json& b = node.at("beta");
    if (b.is_number()) {
      beta = StepFunction(b.get<double>());
    } else if (b.is_object() && b.contains("levels")) {
      std::vector<double> breaks =
          require_number_array(b.value("breaks", json::array()), path + ".beta.breaks", sink);
      std::vector<double> levels =
          require_number_array(b.at("levels"), path + ".beta.levels", sink);
      if (sink.errors.empty()) {
        try {
          beta = StepFunction(std::move(breaks), std::move(levels));
        } catch (const std::invalid_argument& e) {
          sink.add(path + ".beta", e.what());
        }
      }
    } else {
      sink.add(path + ".beta", "expected a number or {breaks, levels}");
    }
  } else {
    sink.add(path + ".beta", "required");
  }
  if (!beta || !sink.errors.empty()) return std::nullopt;
  try {
    return GroundModel(window[0].get<double>(), window[1].get<double>(), *beta, log_gamma,
                       radius);
  } catch (const std::invalid_argument& e) {
    sink.add(path, e.what());
    return std::nullopt;
  }
}

ChainConfig parse_chain(const json& node, const std::string& path, ErrorSink& sink) {
  ChainConfig chain;
  if (!node.is_object()) {
    sink.add(path, "expected an object");
    return chain;
  }
  if (node.contains("steps"))
    chain.steps = static_cast<long long>(require_number(node.at("steps"), path + ".steps", sink));
  if (node.contains("burn_in"))
    chain.burn_in =
        static_cast<long long>(require_number(node.at("burn_in"), path + ".burn_in", sink));
  if (node.contains("fixed_n"))
    chain.fixed_n =
        static_cast<std::size_t>(require_number(node.at("fixed_n"), path + ".fixed_n", sink));
  if (node.contains("trace_stride"))
    chain.trace_stride = static_cast<long long>(
        require_number(node.at("trace_stride"), path + ".trace_stride", sink));
  if (chain.steps < 0 || chain.burn_in < 0 || chain.burn_in > chain.steps)
    sink.add(path, "need 0 <= burn_in <= steps");
  return chain;
}

std::optional<FitConfig> parse_fit(const json& node, const std::string& path,
                                   ErrorSink& sink) {
  if (!node.is_object()) {
    sink.add(path, "expected an object");
    return std::nullopt;
  }
  FitConfig fit;
  const std::string family = node.value("family", std::string("homogeneous"));
  if (family == "homogeneous")
    fit.family = ConfigFitFamily::Homogeneous;
  else if (family == "harmonic_exponential")
    fit.family = ConfigFitFamily::HarmonicExponential;
  else if (family == "weibull")
    fit.family = ConfigFitFamily::Weibull;
  else if (family == "gamma")
    fit.family = ConfigFitFamily::Gamma;
  else
    sink.add(path + ".family", "unknown family '" + family + "'");
  fit.input = node.value("input", std::string());
  fit.elevation =
      require_number(node.value("elevation", json(1.0)), path + ".elevation", sink, 1.0);
  fit.frequency =
      require_number(node.value("frequency", json(0.0)), path + ".frequency", sink, 0.0);
  fit.t0 = require_number(node.value("t0", json(0.0)), path + ".t0", sink, 0.0);
  fit.horizon = require_number(node.value("horizon", json(1.0)), path + ".horizon", sink, 1.0);
  if (node.contains("breaks"))
    fit.piece_breaks = require_number_array(node.at("breaks"), path + ".breaks", sink);
  fit.init_rate = optional_number(node, "init_rate", path, sink);
  fit.init_shape = optional_number(node, "init_shape", path, sink);
  if (node.contains("init_deltas"))
    fit.init_deltas = require_number_array(node.at("init_deltas"), path + ".init_deltas", sink);
  if (fit.family != ConfigFitFamily::Homogeneous && !(fit.horizon > fit.t0))
    sink.add(path, "horizon must exceed t0");
  return fit;
}

std::vector<Mark> parse_marks_array(const json& node, const std::string& path,
                                    ErrorSink& sink) {
  std::vector<Mark> marks;
  if (!node.is_array()) {
    sink.add(path, "expected an array of [a, l] pairs");
    return marks;
  }
  for (std::size_t i = 0; i < node.size(); ++i) {
    const json& entry = node[i];
    const std::string at = path + "[" + std::to_string(i) + "]";
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
        !entry[1].is_number()) {
      sink.add(at, "expected [a, l]");
      continue;
    }
    Mark mark{entry[0].get<double>(), entry[1].get<double>()};
    if (!(mark.length >= 0.0)) sink.add(at, "length must be >= 0");
    marks.push_back(mark);
  }
  return marks;
}

AppConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("invalid configuration: expected a JSON object");
  ErrorSink sink;
  AppConfig config;

  if (doc.contains("seed")) {
    const json& seed = doc.at("seed");
    if (seed.is_number_unsigned() ||
        (seed.is_number_integer() && seed.get<long long>() >= 0))
      config.seed = seed.get<std::uint64_t>();
    else
      sink.add("seed", "expected a nonnegative integer");
  }
  if (doc.contains("out")) {
    if (doc.at("out").is_string())
      config.out_dir = doc.at("out").get<std::string>();
    else
      sink.add("out", "expected a string");
  }
  if (doc.contains("threads")) {
    config.threads = static_cast<int>(require_number(doc.at("threads"), "threads", sink, 1));
    if (config.threads < 1) sink.add("threads", "must be >= 1");
  }

  if (doc.contains("kernel")) config.kernel = parse_kernel(doc.at("kernel"), "kernel", sink);
  if (doc.contains("renewal"))
    config.renewal = parse_renewal(doc.at("renewal"), "renewal", sink);
  if (doc.contains("ground")) config.ground = parse_ground(doc.at("ground"), "ground", sink);
  if (doc.contains("chain")) config.chain = parse_chain(doc.at("chain"), "chain", sink);
  if (doc.contains("fit")) config.fit = parse_fit(doc.at("fit"), "fit", sink);
  if (doc.contains("condition")) {
    if (doc.at("condition").is_object()) {
      ConditionConfig cond;
      cond.input = doc.at("condition").value("input", std::string());
      config.condition = cond;
    } else {
      sink.add("condition", "expected an object");
    }
  }

  if (doc.contains("panels")) {
    const json& p = doc.at("panels");
    if (!p.is_object()) {
      sink.add("panels", "expected an object");
    } else {
      PanelsConfig panels;
      panels.amplitude =
          require_number(p.value("amplitude", json(panels.amplitude)), "panels.amplitude",
                         sink, panels.amplitude);
      panels.elevation =
          require_number(p.value("elevation", json(panels.elevation)), "panels.elevation",
                         sink, panels.elevation);
      panels.frequency =
          require_number(p.value("frequency", json(panels.frequency)), "panels.frequency",
                         sink, panels.frequency);
      panels.t0 = require_number(p.value("t0", json(panels.t0)), "panels.t0", sink, panels.t0);
      panels.horizon = require_number(p.value("horizon", json(panels.horizon)),
                                      "panels.horizon", sink, panels.horizon);
      panels.x = require_number(p.value("x", json(panels.x)), "panels.x", sink, panels.x);
      panels.samples = static_cast<std::size_t>(require_number(
          p.value("samples", json(static_cast<double>(panels.samples))), "panels.samples",
          sink, static_cast<double>(panels.samples)));
      panels.bins = static_cast<std::size_t>(
          require_number(p.value("bins", json(static_cast<double>(panels.bins))),
                         "panels.bins", sink, static_cast<double>(panels.bins)));
      panels.level_constant =
          require_number(p.value("level_constant", json(panels.level_constant)),
                         "panels.level_constant", sink, panels.level_constant);
      panels.step_break = require_number(p.value("step_break", json(panels.step_break)),
                                         "panels.step_break", sink, panels.step_break);
      if (p.contains("step_levels"))
        panels.step_levels =
            require_number_array(p.at("step_levels"), "panels.step_levels", sink);
      if (panels.step_levels.size() != 2)
        sink.add("panels.step_levels", "expected exactly two levels");
      config.panels = panels;
    }
  }

  if (doc.contains("peak")) {
    const json& p = doc.at("peak");
    if (!p.is_object()) {
      sink.add("peak", "expected an object");
    } else {
      PeakConfig peak;
      if (p.contains("data")) peak.data = parse_marks_array(p.at("data"), "peak.data", sink);
      peak.log_gamma_regular =
          require_number(p.value("log_gamma_regular", json(peak.log_gamma_regular)),
                         "peak.log_gamma_regular", sink, peak.log_gamma_regular);
      peak.log_gamma_clustered =
          require_number(p.value("log_gamma_clustered", json(peak.log_gamma_clustered)),
                         "peak.log_gamma_clustered", sink, peak.log_gamma_clustered);
      peak.hist_lo = require_number(p.value("hist_lo", json(peak.hist_lo)), "peak.hist_lo",
                                    sink, peak.hist_lo);
      peak.hist_hi = require_number(p.value("hist_hi", json(peak.hist_hi)), "peak.hist_hi",
                                    sink, peak.hist_hi);
      peak.bins = static_cast<std::size_t>(
          require_number(p.value("bins", json(static_cast<double>(peak.bins))), "peak.bins",
                         sink, static_cast<double>(peak.bins)));
      config.peak = peak;
    }
  }

  if (doc.contains("misspec")) {
    const json& m = doc.at("misspec");
    if (!m.is_object()) {
      sink.add("misspec", "expected an object");
    } else {
      MisspecConfig misspec;
      misspec.eval_time = require_number(m.value("eval_time", json(misspec.eval_time)),
                                         "misspec.eval_time", sink, misspec.eval_time);
      misspec.length_max = require_number(m.value("length_max", json(misspec.length_max)),
                                          "misspec.length_max", sink, misspec.length_max);
      misspec.length_step = require_number(m.value("length_step", json(misspec.length_step)),
                                           "misspec.length_step", sink, misspec.length_step);
      config.misspec = misspec;
    }
  }

  sink.raise_if_any();

  // Echo without the runtime fields, key-sorted, so manifests are stable
  // across output directories and thread counts.
  json echo = doc;
  echo.erase("seed");
  echo.erase("out");
  echo.erase("threads");
  config.echo_json = echo.dump(2);
  return config;
}

}  // namespace

AppConfig parse_config_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return parse_config(doc);
}

AppConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_json(buffer.str());
}

std::string merge_config_json(const std::string& base, const std::string& override_text) {
  json merged;
  try {
    merged = json::parse(base);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid base configuration: ") + e.what());
  }
  json over;
  try {
    over = json::parse(override_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  merged.merge_patch(over);
  return merged.dump(2);
}

}  // namespace smic
