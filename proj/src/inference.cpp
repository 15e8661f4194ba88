#include "smic/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace smic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Nelder-Mead on a dense objective. Standard reflection/expansion/contraction
// coefficients; converged when both the simplex f-spread and its diameter
// collapse. Returns the evaluation count through `evals`.
struct NelderMeadResult {
  std::vector<double> x;
  double f = kInf;
  long long evals = 0;
  bool converged = false;
};

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, double step_scale,
                             long long max_evals, double f_tol, double x_tol) {
  const std::size_t d = x0.size();
  NelderMeadResult result;
  std::vector<std::vector<double>> simplex(d + 1, x0);
  std::vector<double> values(d + 1);
  for (std::size_t i = 0; i < d; ++i) {
    const double step = step_scale * std::max(std::abs(x0[i]), 0.1);
    simplex[i + 1][i] += step;
  }
  for (std::size_t i = 0; i <= d; ++i) {
    values[i] = f(simplex[i]);
    ++result.evals;
  }

  std::vector<std::size_t> order(d + 1);
  std::vector<double> centroid(d), trial(d), trial2(d);
  while (result.evals < max_evals) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front(), worst = order.back();
    const std::size_t second_worst = order[d > 0 ? d - 1 : 0];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
    const double spread = values[worst] - values[best];
    if (spread <= f_tol * (std::abs(values[best]) + f_tol) && diameter <= x_tol) {
      result.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < d; ++j) centroid[j] += simplex[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(d);

    auto blend = [&](std::vector<double>& out, double coef) {
      for (std::size_t j = 0; j < d; ++j)
        out[j] = centroid[j] + coef * (simplex[worst][j] - centroid[j]);
    };

    blend(trial, -1.0);  // reflection
    const double f_reflect = f(trial);
    ++result.evals;
    if (f_reflect < values[best]) {
      blend(trial2, -2.0);  // expansion
      const double f_expand = f(trial2);
      ++result.evals;
      if (f_expand < f_reflect) {
        simplex[worst] = trial2;
        values[worst] = f_expand;
      } else {
        simplex[worst] = trial;
        values[worst] = f_reflect;
      }
    } else if (f_reflect < values[second_worst]) {
      simplex[worst] = trial;
      values[worst] = f_reflect;
    } else {
      const bool outside = f_reflect < values[worst];
      blend(trial2, outside ? -0.5 : 0.5);  // contraction
      const double f_contract = f(trial2);
      ++result.evals;
      if (f_contract < std::min(f_reflect, values[worst])) {
        simplex[worst] = trial2;
        values[worst] = f_contract;
      } else {
        // Shrink towards the best vertex.
        for (std::size_t i = 0; i <= d; ++i) {
          if (i == best) continue;
          for (std::size_t j = 0; j < d; ++j)
            simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
          values[i] = f(simplex[i]);
          ++result.evals;
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= d; ++i)
    if (values[i] < values[best]) best = i;
  result.x = simplex[best];
  result.f = values[best];
  return result;
}

// ---------------------------------------------------------------------------

std::vector<RenewalPiece> pieces_from_levels(double t0, double horizon,
                                             const std::vector<double>& breaks,
                                             const std::vector<double>& levels) {
  std::vector<RenewalPiece> pieces;
  double cursor = t0;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    const double end = j < breaks.size() ? breaks[j] : horizon;
    pieces.push_back({cursor, end, levels[j]});
    cursor = end;
  }
  return pieces;
}

SemiMarkovKernel kernel_for(const MleSpec& spec, double shape, double rate) {
  switch (spec.family) {
    case FitFamily::HarmonicExponential:
      return SemiMarkovKernel::harmonic_exponential(rate, spec.elevation, spec.frequency);
    case FitFamily::Weibull:
      return SemiMarkovKernel::weibull(shape, rate);
    case FitFamily::Gamma:
      return SemiMarkovKernel::gamma(shape, rate);
  }
  throw std::logic_error("kernel_for: unknown family");
}

}  // namespace

IntervalSet::IntervalSet(std::vector<Mark> marks) : marks_(std::move(marks)) {
  for (const Mark& mark : marks_) {
    if (!(mark.length >= 0.0) || !std::isfinite(mark.length) || !std::isfinite(mark.start))
      throw std::invalid_argument("IntervalSet: marks need finite start and length >= 0");
  }
}

std::vector<Mark> IntervalSet::atoms() const {
  std::vector<Mark> out;
  for (const Mark& m : marks_)
    if (m.is_atom()) out.push_back(m);
  return out;
}

std::vector<Mark> IntervalSet::intervals() const {
  std::vector<Mark> out;
  for (const Mark& m : marks_)
    if (!m.is_atom()) out.push_back(m);
  return out;
}

std::size_t IntervalSet::atom_count() const {
  std::size_t n = 0;
  for (const Mark& m : marks_)
    if (m.is_atom()) ++n;
  return n;
}

double IntervalSet::total_interval_length() const {
  double sum = 0.0;
  for (const Mark& m : marks_) sum += m.length;
  return sum;
}

double delta_upper_bound(const SemiMarkovKernel& kernel) {
  switch (kernel.family()) {
    case KernelFamily::HarmonicExponential:
      return kernel.rate_fn().harmonic()->min_value();
    case KernelFamily::Gamma:
    case KernelFamily::Weibull: {
      if (!kernel.shape_fn().is_constant() || !kernel.rate_fn().is_constant())
        throw std::invalid_argument(
            "delta_upper_bound: needs constant parameters outside the "
            "harmonic_exponential family");
      return 1.0 / kernel.mean_sojourn(0.0);
    }
  }
  throw std::logic_error("delta_upper_bound: unknown family");
}

double log_likelihood(const CensoringParams& params, const IntervalSet& data) {
  const CensoringModel model(params.kernel, params.renewal);
  double ll = 0.0;
  for (const Mark& mark : data.marks()) {
    if (mark.is_atom()) {
      const double w = model.atom_probability(mark.start);
      if (!(w > 0.0)) return kNegInf;
      ll += std::log(w);
    } else {
      const double m = params.renewal(mark.start);
      if (!(m > 0.0)) return kNegInf;
      const double g = params.kernel.density(mark.start, mark.length);
      if (!(g > 0.0)) return kNegInf;
      ll += std::log(m) + std::log(g);
    }
  }
  return ll;
}

double homogeneous_log_likelihood(double rate, double delta, const IntervalSet& data) {
  if (!(rate > 0.0)) throw std::domain_error("homogeneous_log_likelihood: rate <= 0");
  if (!(delta >= 0.0) || delta > rate)
    throw std::domain_error("homogeneous_log_likelihood: need 0 <= delta <= rate");
  const double n = static_cast<double>(data.size());
  const double m = static_cast<double>(data.atom_count());
  const double total_length = data.total_interval_length();
  double ll = 0.0;
  if (m > 0) {
    const double w = 1.0 - delta / rate;
    if (!(w > 0.0)) return kNegInf;
    ll += m * std::log(w);
  }
  if (n > m) {
    if (!(delta > 0.0)) return kNegInf;
    ll += (n - m) * (std::log(delta) + std::log(rate));
  }
  ll -= rate * total_length;
  return ll;
}

HomogeneousFit fit_homogeneous(const IntervalSet& data) {
  const std::size_t n = data.size();
  const std::size_t m = data.atom_count();
  if (n == 0) throw std::invalid_argument("fit_homogeneous: empty data");
  if (n == m)
    throw std::invalid_argument(
        "fit_homogeneous: degenerate data, every mark is an atom so the rate is "
        "unidentified");
  const double total_length = data.total_interval_length();
  if (!(total_length > 0.0))
    throw std::invalid_argument("fit_homogeneous: intervals have zero total length");
  HomogeneousFit fit;
  fit.rate = 2.0 * static_cast<double>(n - m) / total_length;
  fit.delta = static_cast<double>(n - m) * fit.rate / static_cast<double>(n);
  return fit;
}

const char* to_string(FitFamily family) {
  switch (family) {
    case FitFamily::HarmonicExponential:
      return "harmonic_exponential";
    case FitFamily::Weibull:
      return "weibull";
    case FitFamily::Gamma:
      return "gamma";
  }
  return "unknown";
}

FitReport fit_mle(const IntervalSet& data, const MleSpec& spec,
                  const OptimizerConfig& optimizer) {
  if (!(spec.horizon > spec.t0))
    throw std::invalid_argument("fit_mle: horizon must exceed t0");
  for (double b : spec.piece_breaks)
    if (!(b > spec.t0) || !(b < spec.horizon))
      throw std::invalid_argument("fit_mle: piece break outside (t0, horizon)");
  if (!std::is_sorted(spec.piece_breaks.begin(), spec.piece_breaks.end()))
    throw std::invalid_argument("fit_mle: piece breaks must be sorted");
  if (data.size() == 0) throw std::invalid_argument("fit_mle: empty data");

  const std::size_t n_pieces = spec.piece_breaks.size() + 1;
  const bool has_shape = spec.family != FitFamily::HarmonicExponential;
  const std::size_t dim = (has_shape ? 2 : 1) + n_pieces;

  // Parameter vector: [shape,] rate, delta_1..delta_J.
  const auto unpack = [&](const std::vector<double>& p, double& shape, double& rate,
                          std::vector<double>& deltas) {
    std::size_t at = 0;
    shape = has_shape ? p[at++] : 1.0;
    rate = p[at++];
    deltas.assign(p.begin() + static_cast<std::ptrdiff_t>(at), p.end());
  };

  const auto bound_for = [&](double shape, double rate) {
    switch (spec.family) {
      case FitFamily::HarmonicExponential:
        return Harmonic{rate, spec.elevation, spec.frequency}.min_value();
      case FitFamily::Weibull:
        return rate / std::tgamma(1.0 + 1.0 / shape);
      case FitFamily::Gamma:
        return rate / shape;
    }
    return 0.0;
  };

  // Constraint slacks, all required strictly positive inside the barrier.
  const auto slacks = [&](double shape, double rate, const std::vector<double>& deltas,
                          std::vector<double>& out) {
    out.clear();
    out.push_back(rate);                      // rate > 0
    if (has_shape)
      out.push_back(spec.family == FitFamily::Gamma ? shape - 1.0 : shape);
    const double bound = bound_for(shape, rate);
    for (double d : deltas) {
      out.push_back(d);                       // delta >= 0
      out.push_back(bound - d);               // delta <= feasibility cap
    }
  };

  const auto loglik_at = [&](double shape, double rate, const std::vector<double>& deltas) {
    const CensoringParams params{
        kernel_for(spec, shape, rate),
        RenewalDensity(spec.t0,
                       pieces_from_levels(spec.t0, spec.horizon, spec.piece_breaks, deltas))};
    return log_likelihood(params, data);
  };

  double shape_buffer, rate_buffer;
  std::vector<double> delta_buffer, slack_buffer;
  double barrier_mu = optimizer.barrier_stages.empty() ? 0.0
                                                       : optimizer.barrier_stages.front();
  const auto objective = [&](const std::vector<double>& p) {
    unpack(p, shape_buffer, rate_buffer, delta_buffer);
    slacks(shape_buffer, rate_buffer, delta_buffer, slack_buffer);
    double barrier = 0.0;
    for (double s : slack_buffer) {
      if (!(s > 0.0)) return kInf;
      barrier -= std::log(s);
    }
    const double ll = loglik_at(shape_buffer, rate_buffer, delta_buffer);
    if (!std::isfinite(ll)) return kInf;
    return -ll + barrier_mu * barrier;
  };

  // Initial point: homogeneous fit projected strictly inside the feasible
  // region. When the data are all atoms the homogeneous fit is undefined;
  // fall back to unit scale.
  double rate0 = 1.0, delta0 = 0.25;
  if (data.interval_count() > 0) {
    const HomogeneousFit h = fit_homogeneous(data);
    rate0 = h.rate;
    delta0 = h.delta;
  }
  double shape_init = spec.init_shape.value_or(spec.family == FitFamily::Gamma ? 1.5 : 1.0);
  double rate_init;
  switch (spec.family) {
    case FitFamily::HarmonicExponential:
      rate_init = spec.init_rate.value_or(rate0 / spec.elevation);
      break;
    case FitFamily::Weibull:
      rate_init = spec.init_rate.value_or(rate0);
      break;
    case FitFamily::Gamma:
      rate_init = spec.init_rate.value_or(shape_init * rate0);
      break;
    default:
      rate_init = rate0;
      break;
  }
  std::vector<double> deltas_init =
      spec.init_deltas.value_or(std::vector<double>(n_pieces, delta0));
  if (deltas_init.size() != n_pieces)
    throw std::invalid_argument("fit_mle: init_deltas size must match the piece count");
  {
    const double cap = bound_for(shape_init, rate_init);
    if (!(cap > 0.0))
      throw std::invalid_argument("fit_mle: initial kernel admits no positive delta");
    for (double& d : deltas_init) d = std::clamp(d, 0.05 * cap, 0.8 * cap);
  }

  std::vector<double> x;
  if (has_shape) x.push_back(shape_init);
  x.push_back(rate_init);
  x.insert(x.end(), deltas_init.begin(), deltas_init.end());
  if (x.size() != dim) throw std::logic_error("fit_mle: parameter packing mismatch");

  // Barrier continuation: re-run Nelder-Mead from the previous optimum with
  // a decreasing barrier weight.
  long long used = 0;
  bool last_converged = false;
  const long long stage_budget = std::max<long long>(
      200, optimizer.max_iters /
               static_cast<long long>(std::max<std::size_t>(optimizer.barrier_stages.size(), 1)));
  for (std::size_t stage = 0; stage < optimizer.barrier_stages.size(); ++stage) {
    barrier_mu = optimizer.barrier_stages[stage];
    const long long budget = std::min(stage_budget, optimizer.max_iters - used);
    if (budget <= 0) break;
    NelderMeadResult run = nelder_mead(objective, x, stage == 0 ? 0.25 : 0.05, budget,
                                       optimizer.f_tol, optimizer.x_tol);
    x = run.x;
    used += run.evals;
    last_converged = run.converged;
  }
  if (!last_converged) {
    std::ostringstream msg;
    msg << "fit_mle: iteration budget of " << optimizer.max_iters
        << " exhausted before the final barrier stage converged (used " << used << ")";
    throw std::runtime_error(msg.str());
  }

  double shape_hat, rate_hat;
  std::vector<double> deltas_hat;
  unpack(x, shape_hat, rate_hat, deltas_hat);

  FitReport report{
      {kernel_for(spec, shape_hat, rate_hat),
       RenewalDensity(spec.t0,
                      pieces_from_levels(spec.t0, spec.horizon, spec.piece_breaks,
                                         deltas_hat))},
      0.0,
      used,
      {},
      spec.family,
      shape_hat,
      rate_hat,
      deltas_hat};
  report.loglik = log_likelihood(report.params, data);

  const double cap = bound_for(shape_hat, rate_hat);
  const auto near = [](double slack, double scale) {
    return slack <= 1e-3 * std::max(scale, 1e-12);
  };
  for (std::size_t j = 0; j < deltas_hat.size(); ++j) {
    std::ostringstream name;
    name << "delta[" << j << "]";
    if (near(deltas_hat[j], cap)) report.active_constraints.push_back(name.str() + ">=0");
    if (near(cap - deltas_hat[j], cap))
      report.active_constraints.push_back(name.str() + "<=bound");
  }
  if (spec.family == FitFamily::Gamma && near(shape_hat - 1.0, 1.0))
    report.active_constraints.push_back("shape>=1");
  return report;
}

double conditional_log_density(const GroundModel& model,
                               const ConditionalChainState& state,
                               const IntervalSet& data) {
  const std::vector<Mark> intervals = data.intervals();
  if (state.positions.size() != intervals.size())
    throw std::invalid_argument(
        "conditional_log_density: one position per censored interval required");
  std::vector<double> points;
  points.reserve(data.size());
  for (const Mark& atom : data.atoms()) points.push_back(atom.start);
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const double x = state.positions[i];
    if (!(x >= intervals[i].start) || !(x <= intervals[i].start + intervals[i].length))
      return kNegInf;
    points.push_back(x);
  }
  std::sort(points.begin(), points.end());
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i] == points[i - 1]) return kNegInf;  // null set of tied points
  return log_density_unnorm(model, PointConfiguration(points));
}

ConditionalChainState sample_conditional(const GroundModel& model,
                                         const IntervalSet& data, long long n_steps,
                                         long long burn_in, RngStream& rng,
                                         const ConditionalObserver& observer) {
  if (n_steps < 0 || burn_in < 0 || (n_steps > 0 && burn_in > n_steps))
    throw std::invalid_argument("sample_conditional: need 0 <= burn_in <= n_steps");
  const std::vector<Mark> intervals = data.intervals();
  const std::size_t k = intervals.size();

  ConditionalChainState state;
  state.positions.resize(k);
  for (std::size_t i = 0; i < k; ++i)
    state.positions[i] = intervals[i].start + 0.5 * intervals[i].length;
  if (k == 0) return state;

  // The midpoint start can sit on a vanishing-intensity stretch; retry with
  // uniform draws before giving up.
  if (!std::isfinite(conditional_log_density(model, state, data))) {
    bool feasible = false;
    for (int attempt = 0; attempt < 1000 && !feasible; ++attempt) {
      for (std::size_t i = 0; i < k; ++i)
        state.positions[i] =
            rng.uniform(intervals[i].start, intervals[i].start + intervals[i].length);
      feasible = std::isfinite(conditional_log_density(model, state, data));
    }
    if (!feasible)
      throw std::runtime_error(
          "sample_conditional: found no starting configuration with positive "
          "density inside the intervals");
  }

  PointConfiguration config;
  for (const Mark& atom : data.atoms()) config.insert(atom.start);
  std::vector<std::size_t> index_of(k);
  for (std::size_t i = 0; i < k; ++i) index_of[i] = config.insert(state.positions[i]);
  // Inserts shift later indices; rebuild the map once.
  for (std::size_t i = 0; i < k; ++i) {
    const auto& pts = config.points();
    index_of[i] = static_cast<std::size_t>(
        std::lower_bound(pts.begin(), pts.end(), state.positions[i]) - pts.begin());
  }

  for (long long step = 1; step <= n_steps; ++step) {
    const std::size_t i = k == 1 ? 0 : rng.index(k);
    const double proposal =
        rng.uniform(intervals[i].start, intervals[i].start + intervals[i].length);
    if (!config.contains(proposal)) {
      const double numer =
          papangelou_ratio_excluding(model, config, index_of[i], proposal);
      const double denom =
          papangelou_ratio_excluding(model, config, index_of[i], state.positions[i]);
      const double accept = denom > 0.0 ? numer / denom : (numer > 0.0 ? 2.0 : 0.0);
      if (rng.uniform() < accept) {
        config.erase(index_of[i]);
        const std::size_t new_index = config.insert(proposal);
        state.positions[i] = proposal;
        // Re-localise every tracked index after the structural change.
        const auto& pts = config.points();
        for (std::size_t j = 0; j < k; ++j)
          index_of[j] = static_cast<std::size_t>(
              std::lower_bound(pts.begin(), pts.end(), state.positions[j]) - pts.begin());
        (void)new_index;
      }
    }
    if (observer && step > burn_in) observer(step, state);
  }
  return state;
}

}  // namespace smic
