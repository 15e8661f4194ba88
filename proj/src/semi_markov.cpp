#include "smic/semi_markov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "smic/parallel.hpp"

namespace smic {

namespace {

[[noreturn]] void throw_explosion(const char* where, double t0, double t1,
                                  std::uint64_t limit, const SemiMarkovKernel& kernel_y) {
  const auto check = kernel_y.validate(t0, t1);
  std::ostringstream msg;
  msg << where << ": jump budget of " << limit << " exhausted on [" << t0 << ", " << t1
      << "]. A bounded rate rules this out (censored-phase rate range [" << check.rate_min
      << ", " << check.rate_max << "], shape range [" << check.shape_min << ", "
      << check.shape_max << "]); check the kernel validation: "
      << (check.ok ? "bounds hold, the horizon may simply be too long"
                   : check.message);
  throw std::runtime_error(msg.str());
}

}  // namespace

int Trajectory::state_at(double t) const {
  if (jumps.empty() || !(t >= t0) || !(t <= t1))
    throw std::domain_error("state_at: time outside [t0, t1]");
  auto it = std::upper_bound(jumps.begin(), jumps.end(), t,
                             [](double value, const Jump& j) { return value < j.time; });
  return std::prev(it)->state;
}

Trajectory simulate(const SemiMarkovKernel& kernel_y, const SemiMarkovKernel& kernel_z,
                    double t0, double t1, RngStream& rng,
                    const SimulateOptions& options) {
  if (!(t1 >= t0)) throw std::domain_error("simulate: t1 must be >= t0");
  Trajectory traj;
  traj.t0 = t0;
  traj.t1 = t1;
  traj.jumps.push_back({1, t0});
  int state = 1;
  double now = t0;
  while (true) {
    if (traj.jumps.size() >= options.max_jumps)
      throw_explosion("simulate", t0, t1, options.max_jumps, kernel_y);
    const SemiMarkovKernel& kernel = state == 1 ? kernel_y : kernel_z;
    const double next = now + kernel.sample_sojourn(now, rng);
    if (!(next <= t1)) break;
    state = 1 - state;
    traj.jumps.push_back({state, next});
    now = next;
  }
  return traj;
}

std::size_t count_cycles(const Trajectory& trajectory, double t) {
  if (trajectory.jumps.empty() || !(t >= trajectory.t0) || !(t <= trajectory.t1))
    throw std::domain_error("count_cycles: time outside [t0, t1]");
  const auto& jumps = trajectory.jumps;
  auto it = std::upper_bound(jumps.begin(), jumps.end(), t,
                             [](double value, const Jump& j) { return value < j.time; });
  const std::size_t last = static_cast<std::size_t>(it - jumps.begin()) - 1;
  // Phases alternate starting in state 1, so among indices 1..last exactly
  // the even ones re-enter the censored phase.
  return last / 2;
}

RenewalDensity::RenewalDensity(double t0, std::vector<RenewalPiece> pieces)
    : t0_(t0), pieces_(std::move(pieces)) {
  double cursor = t0_;
  for (const auto& piece : pieces_) {
    if (piece.start != cursor)
      throw std::invalid_argument(
          "RenewalDensity: pieces must tile [t0, horizon) without gaps");
    if (!(piece.end > piece.start))
      throw std::invalid_argument("RenewalDensity: empty or inverted piece");
    if (!(piece.level >= 0.0) || !std::isfinite(piece.level))
      throw std::invalid_argument("RenewalDensity: levels must be finite and >= 0");
    cursor = piece.end;
  }
}

RenewalDensity RenewalDensity::constant(double t0, double horizon, double level) {
  if (!(horizon > t0))
    throw std::invalid_argument("RenewalDensity: horizon must exceed t0");
  return RenewalDensity(t0, {{t0, horizon, level}});
}

double RenewalDensity::horizon() const { return pieces_.empty() ? t0_ : pieces_.back().end; }

double RenewalDensity::operator()(double t) const {
  if (pieces_.empty() || t < t0_ || t >= pieces_.back().end) return 0.0;
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double value, const RenewalPiece& p) {
                               return value < p.end;
                             });
  return it->level;
}

double RenewalDensity::max_level() const {
  double level = 0.0;
  for (const auto& piece : pieces_) level = std::max(level, piece.level);
  return level;
}

double RenewalDensity::integral(double lo, double hi) const {
  if (!(hi > lo)) return 0.0;
  double sum = 0.0;
  for (const auto& piece : pieces_) {
    const double a = std::max(lo, piece.start);
    const double b = std::min(hi, piece.end);
    if (b > a) sum += piece.level * (b - a);
  }
  return sum;
}

std::vector<double> RenewalDensity::interior_breakpoints() const {
  std::vector<double> breaks;
  for (std::size_t i = 1; i < pieces_.size(); ++i) breaks.push_back(pieces_[i].start);
  return breaks;
}

RenewalEstimate estimate_renewal(const SemiMarkovKernel& kernel_y,
                                 const SemiMarkovKernel& kernel_z, double t0,
                                 std::vector<double> grid, std::size_t n_replicates,
                                 std::uint64_t seed, int threads,
                                 const SimulateOptions& options) {
  if (grid.empty()) throw std::invalid_argument("estimate_renewal: empty grid");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("estimate_renewal: grid must be sorted");
  if (!(grid.front() >= t0))
    throw std::invalid_argument("estimate_renewal: grid must start at or after t0");
  if (n_replicates == 0)
    throw std::invalid_argument("estimate_renewal: need at least one replicate");

  const double t1 = grid.back();
  std::vector<std::vector<double>> counts(n_replicates);
  parallel_for(n_replicates, threads, [&](std::size_t r) {
    RngStream rng = RngStream::derive(seed, r);
    const Trajectory traj = simulate(kernel_y, kernel_z, t0, t1, rng, options);
    std::vector<double> row(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g)
      row[g] = static_cast<double>(count_cycles(traj, grid[g]));
    counts[r] = std::move(row);
  });

  RenewalEstimate estimate;
  estimate.grid = std::move(grid);
  estimate.n_replicates = n_replicates;
  const std::size_t n_grid = estimate.grid.size();
  estimate.mean.assign(n_grid, 0.0);
  estimate.std_error.assign(n_grid, 0.0);
  // Fixed-order reduction over replicate index keeps the result identical
  // for any thread count.
  for (std::size_t r = 0; r < n_replicates; ++r)
    for (std::size_t g = 0; g < n_grid; ++g) estimate.mean[g] += counts[r][g];
  for (double& v : estimate.mean) v /= static_cast<double>(n_replicates);
  for (std::size_t r = 0; r < n_replicates; ++r)
    for (std::size_t g = 0; g < n_grid; ++g) {
      const double d = counts[r][g] - estimate.mean[g];
      estimate.std_error[g] += d * d;
    }
  for (double& v : estimate.std_error)
    v = n_replicates > 1
            ? std::sqrt(v / (static_cast<double>(n_replicates - 1) *
                             static_cast<double>(n_replicates)))
            : 0.0;

  estimate.density.assign(n_grid, 0.0);
  for (std::size_t g = 0; g < n_grid; ++g) {
    const std::size_t a = g == 0 ? 0 : g - 1;
    const std::size_t b = g + 1 < n_grid ? g + 1 : g;
    const double dt = estimate.grid[b] - estimate.grid[a];
    estimate.density[g] = dt > 0 ? (estimate.mean[b] - estimate.mean[a]) / dt : 0.0;
  }
  return estimate;
}

RenewalDensity estimate_pure_renewal_density(const SemiMarkovKernel& kernel_y, double t0,
                                             double t1, std::size_t n_bins,
                                             std::size_t n_replicates, std::uint64_t seed,
                                             int threads, const SimulateOptions& options) {
  if (!(t1 > t0))
    throw std::invalid_argument("estimate_pure_renewal_density: horizon must exceed t0");
  if (n_bins == 0 || n_replicates == 0)
    throw std::invalid_argument("estimate_pure_renewal_density: need bins and replicates");

  const double width = (t1 - t0) / static_cast<double>(n_bins);
  const std::size_t workers =
      threads <= 1 ? 1 : std::min<std::size_t>(static_cast<std::size_t>(threads),
                                               n_replicates);
  // Integer bin counts commute under addition, so merging per-worker
  // partials in worker order is exact and thread-count independent.
  std::vector<std::vector<std::uint64_t>> partial(workers,
                                                  std::vector<std::uint64_t>(n_bins, 0));
  parallel_for(n_replicates, static_cast<int>(workers), [&](std::size_t r) {
    RngStream rng = RngStream::derive(seed, r);
    auto& bins = partial[r % workers];
    double now = t0;
    std::uint64_t jumps = 0;
    while (true) {
      if (++jumps > options.max_jumps)
        throw_explosion("estimate_pure_renewal_density", t0, t1, options.max_jumps,
                        kernel_y);
      now += kernel_y.sample_sojourn(now, rng);
      if (!(now <= t1)) break;
      std::size_t idx = static_cast<std::size_t>((now - t0) / width);
      if (idx >= n_bins) idx = n_bins - 1;
      ++bins[idx];
    }
  });

  std::vector<RenewalPiece> pieces(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    std::uint64_t count = 0;
    for (std::size_t w = 0; w < workers; ++w) count += partial[w][b];
    pieces[b].start = t0 + width * static_cast<double>(b);
    pieces[b].end = b + 1 == n_bins ? t1 : t0 + width * static_cast<double>(b + 1);
    pieces[b].level =
        static_cast<double>(count) / (static_cast<double>(n_replicates) * width);
  }
  return RenewalDensity(t0, std::move(pieces));
}

RenewalValidity validate_renewal_density(const RenewalDensity& target,
                                         const SemiMarkovKernel& kernel_y) {
  if (kernel_y.family() != KernelFamily::HarmonicExponential)
    throw std::invalid_argument(
        "validate_renewal_density: the analytic bound is specific to the "
        "harmonic_exponential family");
  const Harmonic* h = kernel_y.rate_fn().harmonic();
  RenewalValidity validity;
  validity.max_level = target.max_level();
  validity.bound = h->min_value();
  validity.pass = validity.max_level <= validity.bound * (1.0 + 1e-12);
  return validity;
}

Trajectory thin_to_renewal_density(const SemiMarkovKernel& kernel_y,
                                   const RenewalDensity& target,
                                   const std::function<double(double)>& m_tilde,
                                   double t0, double t1, RngStream& rng,
                                   const SimulateOptions& options) {
  if (!(t1 >= t0)) throw std::domain_error("thin_to_renewal_density: t1 must be >= t0");
  if (!m_tilde)
    throw std::invalid_argument("thin_to_renewal_density: empty pure-density evaluator");

  // The harmonic-exponential rate infimum dominates the pure jump density
  // everywhere, so targets below it need no pointwise check (which a noisy
  // Monte Carlo m_tilde could spuriously fail at the boundary).
  bool certified = false;
  if (kernel_y.family() == KernelFamily::HarmonicExponential)
    certified = validate_renewal_density(target, kernel_y).pass;
  if (!certified) {
    std::vector<double> probe = target.interior_breakpoints();
    const double span = std::max(t1, target.horizon()) - t0;
    const std::size_t n_grid = 1000;
    for (std::size_t i = 0; i <= n_grid; ++i)
      probe.push_back(t0 + span * static_cast<double>(i) / n_grid);
    for (double t : probe) {
      const double h = target(t);
      if (h == 0.0) continue;
      const double m = m_tilde(t);
      if (!(h <= m)) {
        std::ostringstream msg;
        msg << "thin_to_renewal_density: target level " << h
            << " exceeds the pure jump density " << m << " at t = " << t
            << "; retention probabilities would leave [0, 1]";
        throw std::invalid_argument(msg.str());
      }
    }
  }

  Trajectory traj;
  traj.t0 = t0;
  traj.t1 = t1;
  traj.jumps.push_back({1, t0});
  std::uint64_t pure_jumps = 0;
  auto next_pure = [&](double from) {
    if (++pure_jumps > options.max_jumps)
      throw_explosion("thin_to_renewal_density", t0, t1, options.max_jumps, kernel_y);
    return from + kernel_y.sample_sojourn(from, rng);
  };

  double x = next_pure(t0);
  if (!(x <= t1)) return traj;  // the opening censored phase outlives the window
  traj.jumps.push_back({0, x});
  while (true) {
    // Every pure jump inside the window flips one retention coin. A kept
    // jump re-enters the censored phase, and the following pure jump closes
    // that phase; a dropped jump leaves the process in the observed phase.
    const double m = m_tilde(x);
    const double p = m > 0.0 ? std::min(1.0, target(x) / m) : 0.0;
    if (rng.bernoulli(p)) {
      traj.jumps.push_back({1, x});
      const double close = next_pure(x);
      if (!(close <= t1)) break;
      traj.jumps.push_back({0, close});
      x = close;
    } else {
      const double next = next_pure(x);
      if (!(next <= t1)) break;
      x = next;
    }
  }
  return traj;
}

}  // namespace smic
