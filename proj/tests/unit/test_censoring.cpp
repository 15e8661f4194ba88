#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "smic/censoring.hpp"
#include "support.hpp"

using smic::CensoringModel;
using smic::Mark;
using smic::RenewalDensity;
using smic::RngStream;
using smic::SemiMarkovKernel;

namespace {

const double kTwoPi = 2.0 * std::numbers::pi;

// Homogeneous reference: exponential censored phase with constant rate
// alpha, constant renewal level delta, window start t0 deep in the past.
CensoringModel homogeneous_model(double alpha, double delta, double t0, double horizon) {
  return CensoringModel(SemiMarkovKernel::harmonic_exponential(alpha, 1.0, 0.0),
                        RenewalDensity::constant(t0, horizon, delta));
}

// The model used throughout for non-homogeneous checks: harmonic rate
// lambda(a) = 1.6 + sin(2 pi a) frozen at the interval start, constant
// renewal level 0.6 on [-0.2, 1).
CensoringModel harmonic_model() {
  return CensoringModel(SemiMarkovKernel::harmonic_exponential(1.0, 1.6, kTwoPi),
                        RenewalDensity::constant(-0.2, 1.0, 0.6));
}

}  // namespace

TEST_SUITE_BEGIN("censoring");

TEST_CASE("atom probability reduces to the homogeneous closed form") {
  const double alpha = 2.0, delta = 1.0, t0 = -30.0;
  const auto model = homogeneous_model(alpha, delta, t0, 1.0);
  for (double x : {0.0, 0.3, 0.9}) {
    const double exact =
        1.0 - delta / alpha * (1.0 - std::exp(-alpha * (x - t0)));
    CHECK(std::abs(model.atom_probability(x) - exact) < 1e-6);
    // Deep past: the truncation term is invisible.
    CHECK(std::abs(model.atom_probability(x) - (1.0 - delta / alpha)) < 1e-6);
  }
}

TEST_CASE("atom probability is one with no renewal mass or at the window start") {
  const auto empty = CensoringModel(SemiMarkovKernel::gamma(1.0, 2.0),
                                    RenewalDensity::constant(0.0, 1.0, 0.0));
  CHECK(empty.atom_probability(0.7) == 1.0);

  const auto model = harmonic_model();
  CHECK(model.atom_probability(-0.2) == 1.0);
  CHECK(model.atom_probability(-5.0) == 1.0);
}

TEST_CASE("atom probability against an independent integral") {
  const auto model = harmonic_model();
  const auto& kernel = model.kernel_y();
  for (double x : {0.1, 0.5, 0.9}) {
    const double covered = testsupport::integrate(
        [&](double s) { return 0.6 * kernel.survival(s, x - s); }, -0.2, x, 1e-12);
    CHECK(model.atom_probability(x) == doctest::Approx(1.0 - covered).epsilon(1e-9));
  }
}

TEST_CASE("age and excess distribution endpoints") {
  // Deep past: the opening phase at t0 has surely ended, so the mass at
  // (0, 0) is exactly the atom probability.
  const auto deep = homogeneous_model(2.0, 1.0, -30.0, 1.0);
  CHECK(std::abs(deep.age_excess_cdf(0.5, 0.0, 0.0) - deep.atom_probability(0.5)) < 1e-8);

  // Close to the window start the opening phase may still straddle t; its
  // survival is exactly the gap between the two accountings.
  const auto model = harmonic_model();
  const double t = 0.5;
  const double opening = model.kernel_y().survival(model.t0(), t - model.t0());
  CHECK(model.age_excess_cdf(t, 0.0, 0.0) ==
        doctest::Approx(model.atom_probability(t) - opening).epsilon(1e-8));

  // Age capped at t - t0 and a huge excess exhaust all the mass.
  CHECK(model.age_excess_cdf(t, t - model.t0(), 1e3) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("age and excess distribution is monotone in both arguments") {
  const auto model = harmonic_model();
  const double t = 0.6;
  double previous = 0.0;
  for (double z : {0.0, 0.1, 0.3, 0.8, 2.0, 5.0}) {
    const double value = model.age_excess_cdf(t, 0.4, z);
    CHECK(value >= previous - 1e-12);
    previous = value;
  }
  previous = 0.0;
  for (double a : {0.0, 0.2, 0.4, 0.6, 0.8}) {
    const double value = model.age_excess_cdf(t, a, 1.0);
    CHECK(value >= previous - 1e-12);
    previous = value;
  }
}

TEST_CASE("age and excess distribution reduces to the homogeneous product form") {
  const double alpha = 1.0, delta = 0.5, t0 = -40.0;
  const auto model = homogeneous_model(alpha, delta, t0, 2.0);
  const double t = 1.0;
  for (double x : {0.2, 0.6, 1.5}) {
    for (double z : {0.1, 0.5, 2.0}) {
      const double exact = (1.0 - delta / alpha) +
                           delta / alpha * (1.0 - std::exp(-alpha * x)) *
                               (1.0 - std::exp(-alpha * z));
      CHECK(std::abs(model.age_excess_cdf(t, x, z) - exact) < 1e-6);
    }
  }
}

TEST_CASE("interval density matches the homogeneous closed form") {
  const double alpha = 2.0, delta = 1.0, t0 = -3.0;
  const auto model = homogeneous_model(alpha, delta, t0, 1.0);
  const double x = 0.7;
  // q_x(a, l) = alpha^2 exp(-alpha l) / (1 - exp(-alpha (x - t0))),
  // independent of both a and delta on the support.
  const double denom = 1.0 - std::exp(-alpha * (x - t0));
  for (double a : {-2.0, -0.5, 0.3}) {
    for (double offset : {0.0, 0.4, 1.3}) {
      const double l = (x - a) + offset;
      const double exact = alpha * alpha * std::exp(-alpha * l) / denom;
      CHECK(model.interval_density(x, a, l) == doctest::Approx(exact).epsilon(1e-7));
    }
  }
}

TEST_CASE("interval density integrates to one over its support") {
  const auto model = harmonic_model();
  const auto& kernel = model.kernel_y();
  const double x = 0.6;
  const double total = testsupport::integrate(
      [&](double a) {
        // Inner integral over lengths l >= x - a, truncated far into the tail.
        const double rate = kernel.rate(a);
        const double cap = (x - a) + 45.0 / rate;
        return testsupport::integrate(
            [&](double l) { return model.interval_density(x, a, l); }, x - a, cap, 1e-10);
      },
      model.t0(), x, 1e-8);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("interval density is finite at the corner a = x, l = 0") {
  const auto model = harmonic_model();
  const double value = model.interval_density(0.5, 0.5, 0.0);
  CHECK(std::isfinite(value));
  CHECK(value > 0.0);
}

TEST_CASE("interval density factorizes into start marginal and length conditional") {
  const auto model = harmonic_model();
  const double x = 0.8;
  for (double a : {-0.1, 0.2, 0.5, 0.79}) {
    for (double offset : {0.0, 0.3, 1.1}) {
      const double l = (x - a) + offset;
      const double joint = model.interval_density(x, a, l);
      const double product =
          model.marginal_start_density(x, a) * model.conditional_length_density(x, a, l);
      CHECK(joint == doctest::Approx(product).epsilon(1e-12));
    }
  }
}

TEST_CASE("start marginal reduces to a shifted exponential in the homogeneous case") {
  const double alpha = 2.0, delta = 1.0, t0 = -30.0;
  const auto model = homogeneous_model(alpha, delta, t0, 1.0);
  const double x = 0.7;
  for (double a : {-10.0, -2.0, -0.5, 0.0, 0.5, 0.69}) {
    const double exact = alpha * std::exp(-alpha * (x - a));
    CHECK(std::abs(model.marginal_start_density(x, a) - exact) < 1e-6);
  }
}

TEST_CASE("start marginal integrates to one") {
  const auto model = harmonic_model();
  const double x = 0.6;
  const double total = testsupport::integrate(
      [&](double a) { return model.marginal_start_density(x, a); }, model.t0(), x, 1e-10);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("start marginal jumps by the renewal ratio across a level break") {
  // Renewal level drops 0.4 -> 0.1 at the break; the survival factor is
  // continuous there, so the density ratio approaches 4.
  const auto kernel = SemiMarkovKernel::harmonic_exponential(1.6, 1.3, kTwoPi);
  const CensoringModel model(
      kernel, RenewalDensity(-0.2, {{-0.2, 0.4, 0.4}, {0.4, 1.0, 0.1}}));
  const double x = 1.0, eps = 1e-9;
  const double left = model.marginal_start_density(x, 0.4 - eps);
  const double right = model.marginal_start_density(x, 0.4 + eps);
  CHECK(left / right == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("length conditional at a fixed point") {
  const auto model = homogeneous_model(1.0, 0.5, -10.0, 2.0);
  // Exponential rate 1, start 0.5 observed at 1.0: a length of 0.7 exceeds
  // the mandatory 0.5 by 0.2, so the conditional density is exp(-0.2).
  CHECK(model.conditional_length_density(1.0, 0.5, 0.7) ==
        doctest::Approx(std::exp(-0.2)).epsilon(1e-10));
}

TEST_CASE("length conditional integrates to one") {
  const auto model = harmonic_model();
  const double x = 0.7;
  for (double a : {-0.1, 0.3, 0.65}) {
    const double rate = model.kernel_y().rate(a);
    const double total = testsupport::integrate(
        [&](double l) { return model.conditional_length_density(x, a, l); }, x - a,
        (x - a) + 45.0 / rate, 1e-10);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("sampled interval lengths are memoryless beyond the mandatory part") {
  // For exponential-type kernels the residual l - (x - a) given the start a
  // is exponential with the frozen rate, so its probability transform is
  // uniform no matter how a varies.
  const auto model = harmonic_model();
  const double x = 0.8;
  RngStream rng(21);
  std::vector<double> pit;
  const int n = 10000;
  pit.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Mark mark = model.sample_interval(x, rng);
    const double rate = model.kernel_y().rate(mark.start);
    const double residual = mark.length - (x - mark.start);
    pit.push_back(-std::expm1(-rate * residual));
  }
  const double stat = testsupport::ks_statistic(
      std::move(pit), [](double u) { return std::min(1.0, std::max(0.0, u)); });
  CHECK(stat < testsupport::ks_critical(n));
}

TEST_CASE("sampled starts follow the marginal start density") {
  const auto model = harmonic_model();
  const double x = 1.0;
  RngStream rng(22);
  const int n = 100000, bins = 50;
  std::vector<int> counts(bins, 0);
  const double lo = model.t0(), width = (x - lo) / bins;
  for (int i = 0; i < n; ++i) {
    const Mark mark = model.sample_interval(x, rng);
    int bin = static_cast<int>((mark.start - lo) / width);
    if (bin == bins) --bin;
    ++counts[bin];
  }
  double chi2 = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double p = testsupport::integrate(
        [&](double a) { return model.marginal_start_density(x, a); }, lo + b * width,
        lo + (b + 1) * width, 1e-10);
    const double expected = n * p;
    chi2 += (counts[b] - expected) * (counts[b] - expected) / expected;
  }
  CHECK(chi2 < testsupport::chi_squared_quantile(bins - 1, 1.0 - 1e-3));
}

TEST_CASE("atom fraction of sampled marks matches the atom probability") {
  const auto model = harmonic_model();
  const double x = 0.5;
  RngStream rng(23);
  const int n = 40000;
  int atoms = 0;
  for (int i = 0; i < n; ++i)
    if (model.sample_mark(x, rng).is_atom()) ++atoms;
  const double w = model.atom_probability(x);
  const double se = std::sqrt(w * (1.0 - w) / n);
  CHECK(std::abs(static_cast<double>(atoms) / n - w) < 3.0 * se);
}

TEST_CASE("marks at the window start are always atoms") {
  const auto model = harmonic_model();
  RngStream rng(24);
  for (int i = 0; i < 100; ++i) {
    const Mark mark = model.sample_mark(model.t0(), rng);
    CHECK(mark.is_atom());
    CHECK(mark.start == model.t0());
  }
}

TEST_CASE("domain errors outside the supported region") {
  const auto model = harmonic_model();
  CHECK_THROWS_AS(model.interval_density(0.5, 0.6, 0.2), std::domain_error);
  CHECK_THROWS_AS(model.interval_density(0.5, 0.3, -0.1), std::domain_error);
  CHECK_THROWS_AS(model.marginal_start_density(0.5, -0.3), std::domain_error);
  CHECK_THROWS_AS(model.conditional_length_density(0.5, 0.3, 0.1), std::domain_error);
  CHECK_THROWS_AS([&] { RngStream rng(1); return model.sample_interval(-0.2, rng); }(),
                  std::domain_error);
  CHECK_THROWS_AS(model.age_excess_cdf(0.5, 2.0, 0.1), std::domain_error);
  CHECK_THROWS_AS(model.age_excess_cdf(0.5, 0.1, -1.0), std::domain_error);
  CHECK_THROWS_AS(model.age_excess_cdf(-0.5, 0.0, 0.0), std::domain_error);
}

TEST_CASE("interval density vanishes off the support but inside the domain") {
  const auto model = harmonic_model();
  // Start before t0, or a length too short to reach x.
  CHECK(model.interval_density(0.5, -0.5, 1.5) == 0.0);
  CHECK(model.interval_density(0.5, 0.2, 0.1) == 0.0);
}

TEST_SUITE_END();
