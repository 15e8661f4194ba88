#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smic/censoring.hpp"
#include "smic/ground.hpp"

namespace smic {

/// Observed data: a finite list of marks, atoms (length 0) mixed with
/// censored intervals (length > 0), in file order.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<Mark> marks);

  const std::vector<Mark>& marks() const { return marks_; }
  std::vector<Mark> atoms() const;
  std::vector<Mark> intervals() const;
  std::size_t size() const { return marks_.size(); }
  std::size_t atom_count() const;
  std::size_t interval_count() const { return size() - atom_count(); }
  double total_interval_length() const;

 private:
  std::vector<Mark> marks_;
};

/// Parameters of the censoring mechanism: the censored-phase kernel and the
/// renewal density of cycle completions (whose support fixes t0 and the
/// horizon).
struct CensoringParams {
  SemiMarkovKernel kernel;
  RenewalDensity renewal;
};

/// Largest renewal level for which atom probabilities stay nonnegative:
/// the rate infimum for the harmonic-exponential family (the constant rate
/// when the modulation is flat), 1 / mean sojourn for constant-parameter
/// Gamma and Weibull kernels.
double delta_upper_bound(const SemiMarkovKernel& kernel);

/// Log-likelihood of the marks: atoms contribute log w_a, censored
/// intervals log renewal(a) + log density_Y(a, l). -inf when a start falls
/// where the renewal density vanishes or an atom probability is
/// nonpositive.
double log_likelihood(const CensoringParams& params, const IntervalSet& data);

/// Closed form for the homogeneous exponential model started in the
/// infinite past: with m atoms among n marks and total interval length L,
/// m log(1 - delta/rate) + (n - m)(log delta + log rate) - rate * L.
double homogeneous_log_likelihood(double rate, double delta, const IntervalSet& data);

struct HomogeneousFit {
  double rate = 0.0;
  double delta = 0.0;
};

/// Exact maximiser of the homogeneous closed form:
/// rate = 2(n - m) / L, delta = (n - m) rate / n. Degenerate-data error
/// when the data contain no intervals.
HomogeneousFit fit_homogeneous(const IntervalSet& data);

enum class FitFamily { HarmonicExponential, Weibull, Gamma };

const char* to_string(FitFamily family);

/// What to fit: the kernel family (harmonic-exponential frees the
/// amplitude with elevation/frequency held fixed; Weibull and Gamma free
/// constant shape and rate) plus the renewal-density pieces on
/// [t0, horizon) split at piece_breaks. Initial values default to the
/// homogeneous fit projected strictly inside the feasible region.
struct MleSpec {
  FitFamily family = FitFamily::Weibull;
  double elevation = 1.0;
  double frequency = 0.0;
  double t0 = 0.0;
  double horizon = 1.0;
  std::vector<double> piece_breaks;
  std::optional<double> init_rate;
  std::optional<double> init_shape;
  std::optional<std::vector<double>> init_deltas;
};

struct OptimizerConfig {
  long long max_iters = 10000;
  double f_tol = 1e-10;
  double x_tol = 1e-9;
  /// Log-barrier continuation weights, largest first.
  std::vector<double> barrier_stages = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
};

struct FitReport {
  CensoringParams params;
  double loglik = 0.0;
  long long iters = 0;
  std::vector<std::string> active_constraints;
  FitFamily family = FitFamily::Weibull;
  double shape = 1.0;
  double rate = 0.0;
  std::vector<double> deltas;
};

/// Maximum-likelihood fit by Nelder-Mead with a log-barrier continuation
/// keeping iterates strictly feasible (rates and shapes positive, each
/// delta in [0, delta_upper_bound]). Error if the iteration budget is
/// exhausted before the final barrier stage converges.
FitReport fit_mle(const IntervalSet& data, const MleSpec& spec,
                  const OptimizerConfig& optimizer = {});

/// Positions of the censored points, one per interval of the data set, in
/// data order; atoms are pinned at their reported times.
struct ConditionalChainState {
  std::vector<double> positions;
};

/// log of the unnormalised conditional density of the latent points given
/// the marks: the ground density evaluated at atoms + positions, restricted
/// to each position lying in its own interval. -inf off the support (or on
/// the null set where two points coincide).
double conditional_log_density(const GroundModel& model,
                               const ConditionalChainState& state,
                               const IntervalSet& data);

using ConditionalObserver =
    std::function<void(long long step, const ConditionalChainState&)>;

/// Metropolis sampler for the conditional law: each step redraws one
/// censored point uniformly inside its own interval and accepts by the
/// Papangelou ratio against the configuration of atoms plus the other
/// censored points. A zero-length chain returns the initial state.
ConditionalChainState sample_conditional(const GroundModel& model,
                                         const IntervalSet& data, long long n_steps,
                                         long long burn_in, RngStream& rng,
                                         const ConditionalObserver& observer = {});

}  // namespace smic
