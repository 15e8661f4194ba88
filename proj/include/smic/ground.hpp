#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "smic/rng.hpp"

namespace smic {

/// Right-continuous step function: levels[i] on [breaks[i-1], breaks[i]),
/// with breaks[-1] = -inf and breaks[n] = +inf implied.
class StepFunction {
 public:
  StepFunction(double constant);  // NOLINT: implicit by design
  StepFunction(std::vector<double> breaks, std::vector<double> levels);

  double operator()(double x) const;
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<double>& levels() const { return levels_; }
  double max_level() const;
  double integral(double lo, double hi) const;

 private:
  std::vector<double> breaks_;
  std::vector<double> levels_;
};

/// Area-interaction point process on an open interval window: unnormalised
/// density prod_i beta(x_i) * gamma^(-|union of radius-r balls, clipped to
/// the window|) with gamma parameterised on the log scale. log_gamma > 0
/// rewards overlap (clustering), log_gamma < 0 penalises it (regularity),
/// log_gamma == 0 is the inhomogeneous Poisson process with intensity beta.
class GroundModel {
 public:
  GroundModel(double window_lo, double window_hi, StepFunction beta, double log_gamma,
              double radius);

  double window_lo() const { return lo_; }
  double window_hi() const { return hi_; }
  double window_length() const { return hi_ - lo_; }
  double log_gamma() const { return log_gamma_; }
  double radius() const { return radius_; }
  const StepFunction& beta_fn() const { return beta_; }

  /// Intensity at x; zero outside the open window.
  double beta(double x) const;
  double beta_integral() const;

 private:
  double lo_, hi_;
  StepFunction beta_;
  double log_gamma_;
  double radius_;
};

/// Finite set of distinct points, kept sorted ascending.
class PointConfiguration {
 public:
  PointConfiguration() = default;
  explicit PointConfiguration(std::vector<double> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  double operator[](std::size_t i) const { return points_[i]; }
  const std::vector<double>& points() const { return points_; }
  bool contains(double t) const;

  /// Insert keeping order; duplicate values are an error.
  std::size_t insert(double t);
  /// Remove by index, returning the removed value.
  double erase(std::size_t index);

 private:
  std::vector<double> points_;
};

/// Length of the window covered by the union of radius-r balls around the
/// points (exact sweep over the sorted configuration).
double coverage_length(const GroundModel& model, const PointConfiguration& config);

/// log of the unnormalised density; -inf when any point sits where beta
/// vanishes (or outside the window).
double log_density_unnorm(const GroundModel& model, const PointConfiguration& config);

/// Papangelou conditional intensity ratio density(config + t) / density(config)
/// = beta(t) * gamma^(-newly covered length). Only the nearest neighbour on
/// each side can shrink the new ball's contribution, so this is O(log n).
/// t must not already belong to the configuration.
double papangelou_ratio(const GroundModel& model, const PointConfiguration& config,
                        double t);

/// Same ratio with config[skip] treated as absent; lets Metropolis moves
/// evaluate removals without mutating the configuration.
double papangelou_ratio_excluding(const GroundModel& model,
                                  const PointConfiguration& config, std::size_t skip,
                                  double t);

struct MhOptions {
  long long n_steps = 0;
  long long burn_in = 0;
  /// When set, the chain fixes the point count and uses shift moves only;
  /// otherwise birth/death/shift moves with the probabilities below.
  std::optional<std::size_t> fixed_n;
  /// Record a trace row every trace_stride steps (0 disables the trace).
  long long trace_stride = 0;
  double p_birth = 0.35;
  double p_death = 0.35;
};

struct MhTraceRow {
  long long step = 0;
  std::size_t n_points = 0;
  double coverage = 0.0;
  double log_density = 0.0;
};

struct MhResult {
  PointConfiguration config;
  std::vector<MhTraceRow> trace;
  long long accepted = 0;
};

using MhObserver = std::function<void(long long step, const PointConfiguration&)>;

/// Metropolis-Hastings sampler for the ground model. Birth proposes a
/// uniform point in the window, death a uniform existing point, shift
/// redraws one point uniformly; acceptance ratios use the Papangelou
/// intensity so the area-interaction density is the invariant law. The
/// observer, when given, sees the state after every post-burn-in step.
MhResult sample_mh(const GroundModel& model, const MhOptions& options, RngStream& rng,
                   PointConfiguration init = {}, const MhObserver& observer = {});

/// log interaction weight of exactly the given subset, recovered from the
/// density by inclusion-exclusion over sub-subsets (2^n terms, n <= 12).
/// For the area-interaction density this vanishes whenever the subset
/// contains two points farther apart than twice the radius.
double interaction_log_phi(const GroundModel& model, const PointConfiguration& subset);

/// Consistency of the factorisation: sum of interaction_log_phi over all
/// subsets minus log_density_unnorm of the full configuration. Zero up to
/// floating-point noise. Requires size <= 12.
double hammersley_clifford_check(const GroundModel& model,
                                 const PointConfiguration& config);

}  // namespace smic
