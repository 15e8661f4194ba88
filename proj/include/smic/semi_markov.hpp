#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "smic/kernel.hpp"
#include "smic/rng.hpp"

namespace smic {

/// One entry of the jump chain: the state entered and the entry time.
/// State 1 is the censored phase (kernel Y), state 0 the observed phase
/// (kernel Z); phases strictly alternate starting from state 1.
struct Jump {
  int state = 1;
  double time = 0.0;
};

/// Jump chain restricted to [t0, t1]; jumps.front() == {1, t0} always, and
/// the final phase extends past t1 without a recorded end.
struct Trajectory {
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<Jump> jumps;

  /// State occupied at time t (last entry at or before t wins, so a
  /// zero-length phase at exactly t is skipped over).
  int state_at(double t) const;
};

struct SimulateOptions {
  std::uint64_t max_jumps = 10'000'000;
};

/// Simulate the alternating chain: from a phase entered at time x, the
/// sojourn is drawn from that phase's kernel conditioned on x.
Trajectory simulate(const SemiMarkovKernel& kernel_y, const SemiMarkovKernel& kernel_z,
                    double t0, double t1, RngStream& rng,
                    const SimulateOptions& options = {});

/// Completed cycles by time t: the number of re-entries into the censored
/// phase at or before t (the boundary jump counts). Domain error outside
/// [t0, t1].
std::size_t count_cycles(const Trajectory& trajectory, double t);

struct RenewalPiece {
  double start = 0.0;
  double end = 0.0;
  double level = 0.0;
};

/// Nonnegative step function on [t0, horizon), zero outside. Used both for
/// renewal densities of cycle completions and for thinning targets.
class RenewalDensity {
 public:
  RenewalDensity(double t0, std::vector<RenewalPiece> pieces);
  static RenewalDensity constant(double t0, double horizon, double level);

  double t0() const { return t0_; }
  double horizon() const;
  double operator()(double t) const;
  double max_level() const;
  /// Exact integral over [lo, hi] of the step function.
  double integral(double lo, double hi) const;
  const std::vector<RenewalPiece>& pieces() const { return pieces_; }
  std::vector<double> interior_breakpoints() const;

 private:
  double t0_ = 0.0;
  std::vector<RenewalPiece> pieces_;
};

struct RenewalEstimate {
  std::vector<double> grid;
  std::vector<double> mean;       // estimate of E[cycles by t]
  std::vector<double> density;    // centred finite differences of mean
  std::vector<double> std_error;  // Monte Carlo standard error of mean
  std::size_t n_replicates = 0;
};

/// Monte Carlo estimate of the expected cycle count over a time grid, one
/// independent stream per replicate. Results do not depend on the thread
/// count.
RenewalEstimate estimate_renewal(const SemiMarkovKernel& kernel_y,
                                 const SemiMarkovKernel& kernel_z, double t0,
                                 std::vector<double> grid, std::size_t n_replicates,
                                 std::uint64_t seed, int threads = 1,
                                 const SimulateOptions& options = {});

/// Piecewise-constant Monte Carlo estimate of the jump (renewal) density of
/// the single-phase process driven by kernel_y alone, on n_bins equal bins
/// over [t0, t1].
RenewalDensity estimate_pure_renewal_density(const SemiMarkovKernel& kernel_y, double t0,
                                             double t1, std::size_t n_bins,
                                             std::size_t n_replicates, std::uint64_t seed,
                                             int threads = 1,
                                             const SimulateOptions& options = {});

struct RenewalValidity {
  double max_level = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// For a harmonic-exponential censored-phase kernel, every target level at
/// or below the rate infimum is dominated by the pure jump density, so the
/// thinning construction below is guaranteed to work. Reports that bound.
RenewalValidity validate_renewal_density(const RenewalDensity& target,
                                         const SemiMarkovKernel& kernel_y);

/// Build a trajectory whose cycle completions follow the target density, by
/// thinning the pure single-phase process: a pure jump at time x survives
/// with probability target(x) / m_tilde(x); surviving jumps re-enter the
/// censored phase and the next pure jump closes it. m_tilde evaluates the
/// pure process's jump density (typically estimate_pure_renewal_density).
/// Unless the harmonic-exponential bound certifies domination analytically,
/// target <= m_tilde is checked on a grid and a violation is an error.
Trajectory thin_to_renewal_density(const SemiMarkovKernel& kernel_y,
                                   const RenewalDensity& target,
                                   const std::function<double(double)>& m_tilde,
                                   double t0, double t1, RngStream& rng,
                                   const SimulateOptions& options = {});

}  // namespace smic
