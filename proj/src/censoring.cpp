#include "smic/censoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "smic/quadrature.hpp"

namespace smic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Half of pi, for quarter-period knots of harmonic rates.
const double kHalfPi = std::asin(1.0);

}  // namespace

CensoringModel::CensoringModel(SemiMarkovKernel kernel_y, RenewalDensity renewal,
                               double quad_tol)
    : kernel_y_(std::move(kernel_y)), renewal_(std::move(renewal)), quad_tol_(quad_tol) {
  if (!(quad_tol_ > 0))
    throw std::invalid_argument("CensoringModel: quadrature tolerance must be positive");
}

double CensoringModel::effective_lower(double x) const {
  // Truncate the integration range where the sojourn survival has decayed
  // to numerical zero; keeps deep-past starts (t0 far below x) cheap.
  const double t0 = renewal_.t0();
  if (!(x > t0)) return t0;
  const double rate_floor = std::max(kernel_y_.min_rate(t0, x), 1e-9);
  double span;
  switch (kernel_y_.family()) {
    case KernelFamily::Gamma: {
      const double k_max = kernel_y_.shape_fn().range(t0, x).second;
      span = (45.0 + 12.0 * k_max) / rate_floor;
      break;
    }
    case KernelFamily::Weibull: {
      const double k_min = kernel_y_.shape_fn().range(t0, x).first;
      span = k_min > 0 ? std::pow(45.0, 1.0 / k_min) / rate_floor : x - t0;
      break;
    }
    case KernelFamily::HarmonicExponential:
    default:
      span = 45.0 / rate_floor;
      break;
  }
  return std::max(t0, x - span);
}

std::vector<double> CensoringModel::knots(double lo, double hi) const {
  std::vector<double> result;
  for (double b : renewal_.interior_breakpoints())
    if (b > lo && b < hi) result.push_back(b);
  const Harmonic* h = kernel_y_.rate_fn().harmonic();
  if (h != nullptr && h->frequency != 0.0) {
    // Quarter-period landmarks of the rate modulation, so each panel holds
    // at most one monotone arc of the oscillation.
    const double step = kHalfPi / std::abs(h->frequency);
    double k = std::ceil(lo / step);
    for (double t = k * step; t < hi; t += step)
      if (t > lo) result.push_back(t);
  }
  return result;
}

double CensoringModel::normalizer(double x) const {
  const double t0 = renewal_.t0();
  if (!(x > t0)) return 0.0;
  const double lo = effective_lower(x);
  const auto integrand = [&](double s) {
    const double m = renewal_(s);
    return m > 0.0 ? m * kernel_y_.survival(s, x - s) : 0.0;
  };
  return integrate(integrand, lo, x, quad_tol_, knots(lo, x));
}

double CensoringModel::atom_probability(double x) const { return 1.0 - normalizer(x); }

double CensoringModel::age_excess_cdf(double t, double age_bound,
                                      double excess_bound) const {
  const double t0 = renewal_.t0();
  if (!(t >= t0)) throw std::domain_error("age_excess_cdf: t precedes t0");
  const double age_cap = t - t0;
  if (!(age_bound >= 0.0) || age_bound > age_cap * (1.0 + 1e-12) + 1e-12)
    throw std::domain_error("age_excess_cdf: age bound outside [0, t - t0]");
  if (!(excess_bound >= 0.0))
    throw std::domain_error("age_excess_cdf: excess bound must be nonnegative");

  // Start from the distribution of the opening phase alone, then remove
  // the mass where the straddling phase is longer than allowed: phases
  // starting within the age window must survive past t + excess, earlier
  // ones merely past t.
  double value = kernel_y_.cdf(t0, age_cap);
  const auto survival_beyond = [&](double s, double limit) {
    const double m = renewal_(s);
    return m > 0.0 ? m * kernel_y_.survival(s, limit - s) : 0.0;
  };
  const double recent_lo = t - age_bound;
  if (t > recent_lo) {
    const auto f = [&](double s) { return survival_beyond(s, t + excess_bound); };
    const double lo = std::max(recent_lo, effective_lower(t + excess_bound));
    if (t > lo) value -= integrate(f, lo, t, quad_tol_, knots(lo, t));
  }
  if (recent_lo > t0) {
    const auto f = [&](double s) { return survival_beyond(s, t); };
    const double lo = std::max(t0, effective_lower(t));
    if (recent_lo > lo)
      value -= integrate(f, lo, recent_lo, quad_tol_, knots(lo, recent_lo));
  }
  // The opening phase contributes a point mass at age exactly t - t0.
  if (age_bound >= age_cap * (1.0 - 1e-12) - 1e-12) {
    value += kernel_y_.cdf(t0, age_cap + excess_bound) - kernel_y_.cdf(t0, age_cap);
  }
  return std::clamp(value, 0.0, 1.0);
}

double CensoringModel::interval_density(double x, double a, double l) const {
  if (!(l >= 0.0)) throw std::domain_error("interval_density: negative length");
  if (!(a <= x)) throw std::domain_error("interval_density: start after x");
  if (a < renewal_.t0() || a + l < x) return 0.0;
  const double d = normalizer(x);
  if (!(d > 0.0)) return 0.0;
  const double m = renewal_(a);
  return m > 0.0 ? m * kernel_y_.density(a, l) / d : 0.0;
}

double CensoringModel::marginal_start_density(double x, double a) const {
  if (a < renewal_.t0() || a > x)
    throw std::domain_error("marginal_start_density: start outside [t0, x]");
  const double d = normalizer(x);
  if (!(d > 0.0)) return 0.0;
  const double m = renewal_(a);
  return m > 0.0 ? m * kernel_y_.survival(a, x - a) / d : 0.0;
}

double CensoringModel::conditional_length_density(double x, double a, double l) const {
  if (!(a <= x)) throw std::domain_error("conditional_length_density: start after x");
  if (!(l >= x - a))
    throw std::domain_error("conditional_length_density: length below x - a");
  const double surv = kernel_y_.survival(a, x - a);
  if (!(surv > 0.0)) return 0.0;
  return kernel_y_.density(a, l) / surv;
}

Mark CensoringModel::sample_mark(double x, RngStream& rng) const {
  const double w = atom_probability(x);
  if (rng.uniform() < w) return Mark{x, 0.0};
  return sample_interval(x, rng);
}

Mark CensoringModel::sample_interval(double x, RngStream& rng) const {
  const double t0 = renewal_.t0();
  if (!(x > t0))
    throw std::domain_error("sample_interval: no renewal mass before x");

  // Piece-weighted uniform proposal for the start, thinned by the survival
  // factor; this reproduces the start marginal exactly.
  const auto& pieces = renewal_.pieces();
  std::vector<double> weights(pieces.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const double lo = std::max(pieces[i].start, t0);
    const double hi = std::min(pieces[i].end, x);
    if (hi > lo) weights[i] = pieces[i].level * (hi - lo);
    total += weights[i];
  }
  if (!(total > 0.0))
    throw std::domain_error("sample_interval: renewal density vanishes on [t0, x]");

  double a = x;
  bool accepted = false;
  for (std::uint64_t attempt = 0; attempt < max_rejections_; ++attempt) {
    double u = rng.uniform() * total;
    std::size_t piece = 0;
    while (piece + 1 < pieces.size() && u >= weights[piece]) {
      u -= weights[piece];
      ++piece;
    }
    const double lo = std::max(pieces[piece].start, t0);
    const double hi = std::min(pieces[piece].end, x);
    a = rng.uniform(lo, hi);
    if (rng.uniform() < kernel_y_.survival(a, x - a)) {
      accepted = true;
      break;
    }
  }
  if (!accepted) {
    std::ostringstream msg;
    msg << "sample_interval: rejection budget of " << max_rejections_
        << " exhausted at x = " << x
        << "; the survival acceptance probability is vanishing there";
    throw std::runtime_error(msg.str());
  }

  // Length given the start: memoryless shift for exponential-type sojourns,
  // the conditional quantile otherwise.
  double l;
  if (kernel_y_.family() == KernelFamily::HarmonicExponential ||
      kernel_y_.shape(a) == 1.0) {
    l = (x - a) + rng.exponential(kernel_y_.rate(a));
  } else {
    const double lower = kernel_y_.cdf(a, x - a);
    l = kernel_y_.quantile(a, lower + rng.uniform() * (1.0 - lower));
  }
  return Mark{a, l};
}

}  // namespace smic
