#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "smic/rng.hpp"

namespace smic {

/// Harmonic modulation amplitude * (elevation + sin(frequency * x)).
/// With elevation >= 1 the value never goes negative, and with
/// frequency == 0 it degenerates to the constant amplitude * elevation.
struct Harmonic {
  double amplitude = 1.0;
  double elevation = 1.0;
  double frequency = 0.0;

  double operator()(double x) const;

  /// Exact infimum over all x (amplitude * (elevation - 1) when the
  /// modulation actually oscillates, the constant value otherwise).
  double min_value() const;
  double max_value() const;
};

/// Scalar kernel parameter that may vary with the jump time: a constant,
/// a harmonic modulation, or an arbitrary callable. Only the first two
/// forms are serialisable to configuration files.
class TimeFunction {
 public:
  TimeFunction(double constant);  // NOLINT: implicit by design
  TimeFunction(const Harmonic& harmonic);  // NOLINT: implicit by design
  static TimeFunction custom(std::function<double(double)> fn);

  double operator()(double x) const;
  bool is_constant() const { return kind_ == Kind::Constant; }
  bool is_harmonic() const { return kind_ == Kind::Harmonics; }
  double constant_value() const;
  const Harmonic* harmonic() const;

  /// (min, max) over [x_lo, x_hi]; exact for constant and harmonic forms,
  /// a dense grid scan for custom callables.
  std::pair<double, double> range(double x_lo, double x_hi, int scan_points = 4096) const;

 private:
  enum class Kind { Constant, Harmonics, Custom };
  Kind kind_ = Kind::Constant;
  double value_ = 0.0;
  Harmonic harmonic_{};
  std::function<double(double)> fn_;
};

enum class KernelFamily { Gamma, Weibull, HarmonicExponential };

const char* to_string(KernelFamily family);

/// Upper envelope coeff * elapsed^power for a conditional intensity after a
/// given jump, valid for every elapsed time >= 0.
struct HazardEnvelope {
  double coeff = 0.0;
  double power = 0.0;

  double operator()(double elapsed) const;
  bool is_constant() const { return power == 0.0; }
  /// The envelope as a number; only meaningful when is_constant().
  double constant_value() const;
};

/// Outcome of checking a kernel against the regularity bounds that rule out
/// explosion of the jump chain: rate bounded above, and shape either >= 1
/// (Gamma), or constant / in [1, k_bound] (Weibull).
struct KernelValidation {
  bool ok = true;
  std::string message;
  double rate_min = 0.0;
  double rate_max = 0.0;
  double shape_min = 0.0;
  double shape_max = 0.0;
  bool shape_constant = false;
  double c_bound = 0.0;
  double k_bound = 0.0;
};

/// Sojourn-time law for one phase of the alternating process. The law of
/// the time spent in a phase entered at jump time x has density
/// density(x, tau) in the elapsed time tau; conditioning on the entry time
/// is what makes the process non-homogeneous.
class SemiMarkovKernel {
 public:
  static SemiMarkovKernel gamma(TimeFunction shape, TimeFunction rate);
  static SemiMarkovKernel weibull(TimeFunction shape, TimeFunction rate);
  /// Exponential sojourn whose rate is frozen at the phase entry time x:
  /// rate(x) = amplitude * (elevation + sin(frequency * x)). Requires
  /// amplitude > 0 and elevation >= 1 so the rate stays nonnegative.
  static SemiMarkovKernel harmonic_exponential(double amplitude, double elevation,
                                               double frequency);

  KernelFamily family() const { return family_; }
  double shape(double x) const { return shape_(x); }
  double rate(double x) const { return rate_(x); }
  const TimeFunction& shape_fn() const { return shape_; }
  const TimeFunction& rate_fn() const { return rate_; }

  /// Density of the sojourn in a phase entered at x, at elapsed time tau.
  double density(double x, double tau) const;
  /// Distribution function of the sojourn; cdf(x, 0) == 0 always.
  double cdf(double x, double tau) const;
  /// 1 - cdf, computed without cancellation for deep tails.
  double survival(double x, double tau) const;

  /// Conditional intensity of the phase-ending jump at time t given the
  /// phase started at last_jump: density / survival of the elapsed time.
  /// Returns 0 once the survival has decayed below 1e-300, where the ratio
  /// is no longer representable.
  double hazard(double last_jump, double t) const;

  /// Envelope dominating hazard(last_jump, last_jump + tau) for all tau.
  /// Constant for Gamma (the frozen rate) and for the harmonic-exponential
  /// family; proportional to tau^(shape-1) for Weibull.
  HazardEnvelope hazard_bound(double last_jump) const;

  /// Inverse of cdf(x, .) at probability p. Closed form except for the
  /// Gamma family, which brackets and bisects the cdf to within 1e-10 in
  /// probability. Returns +inf for p == 1 or a degenerate zero rate.
  double quantile(double x, double p) const;

  double sample_sojourn(double x, RngStream& rng) const;

  /// Expected sojourn for a phase entered at x.
  double mean_sojourn(double x) const;

  /// Smallest rate over entry times in [lo, hi]; exact for constant and
  /// harmonic rates.
  double min_rate(double lo, double hi) const;

  /// Check the explosion-ruling bounds over entry times in [x_lo, x_hi].
  /// Omitted bounds default to the observed extrema, so this also reports
  /// the tightest constants that make the kernel admissible.
  KernelValidation validate(double x_lo, double x_hi,
                            std::optional<double> c_bound = std::nullopt,
                            std::optional<double> k_bound = std::nullopt) const;

 private:
  SemiMarkovKernel(KernelFamily family, TimeFunction shape, TimeFunction rate);

  KernelFamily family_;
  TimeFunction shape_;
  TimeFunction rate_;
};

}  // namespace smic
