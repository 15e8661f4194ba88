#include "smic/kernel.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace smic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Below this survival probability the hazard ratio density/survival is no
// longer representable and is reported as 0.
constexpr double kSurvivalFloor = 1e-300;

void require_nonnegative_elapsed(double tau, const char* where) {
  if (!(tau >= 0)) {
    std::ostringstream msg;
    msg << where << ": elapsed time must be nonnegative, got " << tau;
    throw std::domain_error(msg.str());
  }
}

}  // namespace

double Harmonic::operator()(double x) const {
  return amplitude * (elevation + std::sin(frequency * x));
}

double Harmonic::min_value() const {
  if (frequency == 0.0) return amplitude * elevation;
  return amplitude * (elevation - 1.0);
}

double Harmonic::max_value() const {
  if (frequency == 0.0) return amplitude * elevation;
  return amplitude * (elevation + 1.0);
}

TimeFunction::TimeFunction(double constant) : kind_(Kind::Constant), value_(constant) {}

TimeFunction::TimeFunction(const Harmonic& harmonic)
    : kind_(Kind::Harmonics), harmonic_(harmonic) {}

TimeFunction TimeFunction::custom(std::function<double(double)> fn) {
  if (!fn) throw std::invalid_argument("TimeFunction::custom: empty callable");
  TimeFunction f(0.0);
  f.kind_ = Kind::Custom;
  f.fn_ = std::move(fn);
  return f;
}

double TimeFunction::operator()(double x) const {
  switch (kind_) {
    case Kind::Constant:
      return value_;
    case Kind::Harmonics:
      return harmonic_(x);
    case Kind::Custom:
      return fn_(x);
  }
  return value_;
}

double TimeFunction::constant_value() const {
  if (kind_ != Kind::Constant)
    throw std::logic_error("TimeFunction: not a constant");
  return value_;
}

const Harmonic* TimeFunction::harmonic() const {
  return kind_ == Kind::Harmonics ? &harmonic_ : nullptr;
}

std::pair<double, double> TimeFunction::range(double x_lo, double x_hi,
                                              int scan_points) const {
  if (!(x_lo <= x_hi))
    throw std::domain_error("TimeFunction::range: empty interval");
  switch (kind_) {
    case Kind::Constant:
      return {value_, value_};
    case Kind::Harmonics: {
      // Exact: once the phase c x sweeps a full period the sine attains
      // both extremes; for shorter spans check the endpoints and the
      // interior critical points of the sine.
      const Harmonic& h = harmonic_;
      if (h.frequency == 0.0) {
        const double v = h.amplitude * h.elevation;
        return {v, v};
      }
      const double pi = 2.0 * std::asin(1.0);
      const double y_lo = std::min(h.frequency * x_lo, h.frequency * x_hi);
      const double y_hi = std::max(h.frequency * x_lo, h.frequency * x_hi);
      double smin, smax;
      if (y_hi - y_lo >= 2.0 * pi) {
        smin = -1.0;
        smax = 1.0;
      } else {
        smin = std::min(std::sin(y_lo), std::sin(y_hi));
        smax = std::max(std::sin(y_lo), std::sin(y_hi));
        const double k0 = std::ceil((y_lo - 0.5 * pi) / pi);
        for (double y = 0.5 * pi + k0 * pi; y <= y_hi; y += pi) {
          const double s = std::sin(y);
          smin = std::min(smin, s);
          smax = std::max(smax, s);
        }
      }
      return {h.amplitude * (h.elevation + smin), h.amplitude * (h.elevation + smax)};
    }
    case Kind::Custom: {
      double lo = kInf, hi = -kInf;
      const int n = std::max(scan_points, 2);
      for (int i = 0; i < n; ++i) {
        const double x = x_lo + (x_hi - x_lo) * i / (n - 1);
        const double v = fn_(x);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      return {lo, hi};
    }
  }
  return {value_, value_};
}

const char* to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gamma:
      return "gamma";
    case KernelFamily::Weibull:
      return "weibull";
    case KernelFamily::HarmonicExponential:
      return "harmonic_exponential";
  }
  return "unknown";
}

double HazardEnvelope::operator()(double elapsed) const {
  require_nonnegative_elapsed(elapsed, "HazardEnvelope");
  if (power == 0.0) return coeff;
  return coeff * std::pow(elapsed, power);
}

double HazardEnvelope::constant_value() const {
  if (!is_constant())
    throw std::logic_error("HazardEnvelope: envelope is not constant");
  return coeff;
}

SemiMarkovKernel::SemiMarkovKernel(KernelFamily family, TimeFunction shape,
                                   TimeFunction rate)
    : family_(family), shape_(std::move(shape)), rate_(std::move(rate)) {}

SemiMarkovKernel SemiMarkovKernel::gamma(TimeFunction shape, TimeFunction rate) {
  if (shape.is_constant() && !(shape.constant_value() >= 1.0))
    throw std::invalid_argument("gamma kernel: shape must be >= 1");
  if (rate.is_constant() && !(rate.constant_value() > 0.0))
    throw std::invalid_argument("gamma kernel: rate must be positive");
  return SemiMarkovKernel(KernelFamily::Gamma, std::move(shape), std::move(rate));
}

SemiMarkovKernel SemiMarkovKernel::weibull(TimeFunction shape, TimeFunction rate) {
  if (shape.is_constant() && !(shape.constant_value() > 0.0))
    throw std::invalid_argument("weibull kernel: shape must be positive");
  if (rate.is_constant() && !(rate.constant_value() > 0.0))
    throw std::invalid_argument("weibull kernel: rate must be positive");
  return SemiMarkovKernel(KernelFamily::Weibull, std::move(shape), std::move(rate));
}

SemiMarkovKernel SemiMarkovKernel::harmonic_exponential(double amplitude,
                                                        double elevation,
                                                        double frequency) {
  if (!(amplitude > 0.0))
    throw std::invalid_argument("harmonic_exponential kernel: amplitude must be positive");
  if (!(elevation >= 1.0))
    throw std::invalid_argument(
        "harmonic_exponential kernel: elevation must be >= 1 so the rate stays "
        "nonnegative");
  Harmonic h{amplitude, elevation, frequency};
  return SemiMarkovKernel(KernelFamily::HarmonicExponential, TimeFunction(1.0),
                          TimeFunction(h));
}

double SemiMarkovKernel::density(double x, double tau) const {
  require_nonnegative_elapsed(tau, "density");
  const double lam = rate(x);
  switch (family_) {
    case KernelFamily::Gamma: {
      const double k = shape(x);
      if (!(lam > 0)) return 0.0;
      if (k == 1.0) return lam * std::exp(-lam * tau);
      if (tau == 0.0) return k > 1.0 ? 0.0 : kInf;
      return std::exp(k * std::log(lam) + (k - 1.0) * std::log(tau) - lam * tau -
                      std::lgamma(k));
    }
    case KernelFamily::Weibull: {
      const double k = shape(x);
      if (!(lam > 0)) return 0.0;
      if (tau == 0.0) {
        if (k == 1.0) return lam;
        return k > 1.0 ? 0.0 : kInf;
      }
      const double u = lam * tau;
      return k * lam * std::pow(u, k - 1.0) * std::exp(-std::pow(u, k));
    }
    case KernelFamily::HarmonicExponential:
      if (!(lam > 0)) return 0.0;
      return lam * std::exp(-lam * tau);
  }
  return 0.0;
}

double SemiMarkovKernel::cdf(double x, double tau) const {
  require_nonnegative_elapsed(tau, "cdf");
  const double lam = rate(x);
  if (!(lam > 0)) return 0.0;
  switch (family_) {
    case KernelFamily::Gamma:
      return boost::math::gamma_p(shape(x), lam * tau);
    case KernelFamily::Weibull:
      return -std::expm1(-std::pow(lam * tau, shape(x)));
    case KernelFamily::HarmonicExponential:
      return -std::expm1(-lam * tau);
  }
  return 0.0;
}

double SemiMarkovKernel::survival(double x, double tau) const {
  require_nonnegative_elapsed(tau, "survival");
  const double lam = rate(x);
  if (!(lam > 0)) return 1.0;
  switch (family_) {
    case KernelFamily::Gamma:
      return boost::math::gamma_q(shape(x), lam * tau);
    case KernelFamily::Weibull:
      return std::exp(-std::pow(lam * tau, shape(x)));
    case KernelFamily::HarmonicExponential:
      return std::exp(-lam * tau);
  }
  return 1.0;
}

double SemiMarkovKernel::hazard(double last_jump, double t) const {
  if (!(t >= last_jump))
    throw std::domain_error("hazard: evaluation time precedes the last jump");
  const double tau = t - last_jump;
  const double surv = survival(last_jump, tau);
  if (surv < kSurvivalFloor) return 0.0;
  switch (family_) {
    case KernelFamily::Gamma:
      return density(last_jump, tau) / surv;
    case KernelFamily::Weibull: {
      // density / survival collapses to the closed form; evaluating it
      // directly keeps the ratio exact where the two exponentials would
      // otherwise round.
      const double k = shape(last_jump);
      const double lam = rate(last_jump);
      if (!(lam > 0)) return 0.0;
      if (tau == 0.0) {
        if (k == 1.0) return lam;
        return k > 1.0 ? 0.0 : kInf;
      }
      return k * lam * std::pow(lam * tau, k - 1.0);
    }
    case KernelFamily::HarmonicExponential:
      return rate(last_jump);
  }
  return 0.0;
}

HazardEnvelope SemiMarkovKernel::hazard_bound(double last_jump) const {
  switch (family_) {
    case KernelFamily::Gamma:
      // With shape >= 1 the hazard increases towards the frozen rate.
      return {rate(last_jump), 0.0};
    case KernelFamily::Weibull: {
      const double k = shape(last_jump);
      const double lam = rate(last_jump);
      return {k * std::pow(lam, k), k - 1.0};
    }
    case KernelFamily::HarmonicExponential:
      return {rate(last_jump), 0.0};
  }
  return {0.0, 0.0};
}

double SemiMarkovKernel::quantile(double x, double p) const {
  if (!(p >= 0.0) || p > 1.0)
    throw std::domain_error("quantile: probability must lie in [0, 1]");
  const double lam = rate(x);
  if (p == 0.0) return 0.0;
  if (!(lam > 0) || p == 1.0) return kInf;
  switch (family_) {
    case KernelFamily::Gamma: {
      const double k = shape(x);
      if (k == 1.0) return -std::log1p(-p) / lam;
      // Bracket, then bisect the cdf to within 1e-10 in probability. The
      // cdf is strictly increasing so plain bisection is robust at any
      // shape the validation admits.
      double hi = std::max(k, 1.0) / lam;
      for (int i = 0; i < 400 && cdf(x, hi) < p; ++i) hi *= 2.0;
      double lo = 0.0;
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double c = cdf(x, mid);
        if (std::abs(c - p) <= 1e-10) return mid;
        if (c < p)
          lo = mid;
        else
          hi = mid;
        if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
      }
      return 0.5 * (lo + hi);
    }
    case KernelFamily::Weibull: {
      const double k = shape(x);
      return std::pow(-std::log1p(-p), 1.0 / k) / lam;
    }
    case KernelFamily::HarmonicExponential:
      return -std::log1p(-p) / lam;
  }
  return kInf;
}

double SemiMarkovKernel::sample_sojourn(double x, RngStream& rng) const {
  return quantile(x, rng.uniform());
}

double SemiMarkovKernel::mean_sojourn(double x) const {
  const double lam = rate(x);
  if (!(lam > 0)) return kInf;
  switch (family_) {
    case KernelFamily::Gamma:
      return shape(x) / lam;
    case KernelFamily::Weibull:
      return std::tgamma(1.0 + 1.0 / shape(x)) / lam;
    case KernelFamily::HarmonicExponential:
      return 1.0 / lam;
  }
  return kInf;
}

double SemiMarkovKernel::min_rate(double lo, double hi) const {
  return rate_.range(lo, hi).first;
}

KernelValidation SemiMarkovKernel::validate(double x_lo, double x_hi,
                                            std::optional<double> c_bound,
                                            std::optional<double> k_bound) const {
  KernelValidation report;
  const auto [rmin, rmax] = rate_.range(x_lo, x_hi);
  const auto [smin, smax] = shape_.range(x_lo, x_hi);
  report.rate_min = rmin;
  report.rate_max = rmax;
  report.shape_min = smin;
  report.shape_max = smax;
  report.shape_constant = shape_.is_constant();
  report.c_bound = c_bound.value_or(rmax);
  report.k_bound = k_bound.value_or(smax);

  std::ostringstream msg;
  const double tol = 1e-12 * std::max(1.0, std::abs(report.c_bound));
  switch (family_) {
    case KernelFamily::Gamma:
      if (!(smin >= 1.0))
        msg << "gamma shape dips below 1 (min " << smin << "); ";
      if (!(rmin > 0.0)) msg << "gamma rate is not positive (min " << rmin << "); ";
      if (rmax > report.c_bound + tol)
        msg << "gamma rate exceeds the bound " << report.c_bound << " (max " << rmax
            << "); ";
      break;
    case KernelFamily::Weibull:
      if (!(rmin > 0.0)) msg << "weibull rate is not positive (min " << rmin << "); ";
      if (rmax > report.c_bound + tol)
        msg << "weibull rate exceeds the bound " << report.c_bound << " (max " << rmax
            << "); ";
      if (report.shape_constant) {
        if (!(smin > 0.0)) msg << "weibull shape is not positive; ";
      } else if (!(smin >= 1.0 && smax <= report.k_bound + tol)) {
        msg << "varying weibull shape must stay within [1, " << report.k_bound
            << "] (observed [" << smin << ", " << smax << "]); ";
      }
      break;
    case KernelFamily::HarmonicExponential: {
      const Harmonic* h = rate_.harmonic();
      if (h == nullptr) {
        msg << "harmonic_exponential kernel lost its harmonic rate; ";
      } else {
        if (!(h->amplitude > 0.0)) msg << "amplitude must be positive; ";
        if (!(h->elevation >= 1.0)) msg << "elevation must be >= 1; ";
      }
      break;
    }
  }
  report.message = msg.str();
  report.ok = report.message.empty();
  return report;
}

}  // namespace smic
