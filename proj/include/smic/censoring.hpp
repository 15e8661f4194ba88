#pragma once

#include <cstdint>
#include <vector>

#include "smic/kernel.hpp"
#include "smic/rng.hpp"
#include "smic/semi_markov.hpp"

namespace smic {

/// Reported mark for one ground point: the interval [start, start + length].
/// length == 0 encodes an exactly observed point (an atom).
struct Mark {
  double start = 0.0;
  double length = 0.0;

  bool is_atom() const { return length == 0.0; }
};

/// Mark distribution of a point observed at time x inside the stationary
/// censoring mechanism: with the atom probability the point is reported
/// exactly; otherwise it is absorbed into a censored interval that started
/// at a <= x with density renewal(a) * density_Y(a, .) and covers x.
///
/// The censored phase started before t0 is excluded by construction, which
/// truncates every integral below at t0.
class CensoringModel {
 public:
  CensoringModel(SemiMarkovKernel kernel_y, RenewalDensity renewal,
                 double quad_tol = 1e-8);

  double t0() const { return renewal_.t0(); }
  const SemiMarkovKernel& kernel_y() const { return kernel_y_; }
  const RenewalDensity& renewal_density() const { return renewal_; }

  /// Probability that some censored interval covers x:
  /// integral over [t0, x] of survival_Y(s, x - s) * renewal(s) ds.
  double normalizer(double x) const;

  /// Atom probability w_x = 1 - normalizer(x). For x <= t0 this is 1.
  double atom_probability(double x) const;

  /// Joint distribution function P(age <= age_bound, excess <= excess_bound)
  /// of the censored phase straddling time t, for the process started at t0.
  /// The age is capped at t - t0; the initial phase contributes a point mass
  /// there, included once age_bound reaches the cap.
  double age_excess_cdf(double t, double age_bound, double excess_bound) const;

  /// Joint density of a censored mark (start a, length l) for a point at x,
  /// with respect to Lebesgue measure on the support a in [t0, x],
  /// l >= x - a. Zero outside the support; domain error for l < 0 or a > x.
  double interval_density(double x, double a, double l) const;

  /// Marginal density of the interval start; domain error outside [t0, x].
  double marginal_start_density(double x, double a) const;

  /// Density of the interval length given the start a: the sojourn density
  /// at (a, l) conditioned on exceeding x - a. Domain error if l < x - a.
  double conditional_length_density(double x, double a, double l) const;

  /// Draw a mark for a point at x: an atom with probability w_x, otherwise
  /// a censored interval from sample_interval.
  Mark sample_mark(double x, RngStream& rng) const;

  /// Draw from the censored branch only. The start is drawn by rejection
  /// (piece-weighted uniform proposal, accepted with the survival factor)
  /// and is exact; the length is drawn from the conditional sojourn law,
  /// by a memoryless shift for exponential-type kernels and through the
  /// quantile function otherwise.
  Mark sample_interval(double x, RngStream& rng) const;

 private:
  double effective_lower(double x) const;
  std::vector<double> knots(double lo, double hi) const;

  SemiMarkovKernel kernel_y_;
  RenewalDensity renewal_;
  double quad_tol_;
  std::uint64_t max_rejections_ = 1'000'000;
};

}  // namespace smic
