#include "smic/ground.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace smic {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Uncovered part of the ball around t, i.e. the length the ball at t would
// add to the coverage of `points` with the point at skip_index (if any)
// ignored. Only the nearest retained neighbour on each side matters because
// all balls share one radius.
double added_coverage(const GroundModel& model, const std::vector<double>& points,
                      std::size_t skip_index, double t) {
  const double r = model.radius();
  double lo = std::max(model.window_lo(), t - r);
  double hi = std::min(model.window_hi(), t + r);
  if (!(hi > lo)) return 0.0;
  auto first_right = std::lower_bound(points.begin(), points.end(), t);
  auto right = first_right;
  if (right != points.end() &&
      static_cast<std::size_t>(right - points.begin()) == skip_index)
    ++right;
  if (right != points.end()) hi = std::min(hi, *right - r);
  auto left = first_right;
  if (left != points.begin()) {
    --left;
    if (static_cast<std::size_t>(left - points.begin()) == skip_index) {
      if (left == points.begin())
        left = points.end();
      else
        --left;
    }
    if (left != points.end()) lo = std::max(lo, *left + r);
  }
  return std::max(0.0, hi - lo);
}

constexpr std::size_t kNoSkip = std::numeric_limits<std::size_t>::max();

}  // namespace

StepFunction::StepFunction(double constant) : levels_{constant} {}

StepFunction::StepFunction(std::vector<double> breaks, std::vector<double> levels)
    : breaks_(std::move(breaks)), levels_(std::move(levels)) {
  if (levels_.size() != breaks_.size() + 1)
    throw std::invalid_argument("StepFunction: need one more level than breaks");
  if (!std::is_sorted(breaks_.begin(), breaks_.end()))
    throw std::invalid_argument("StepFunction: breaks must be sorted");
  for (std::size_t i = 1; i < breaks_.size(); ++i)
    if (breaks_[i] == breaks_[i - 1])
      throw std::invalid_argument("StepFunction: duplicate break");
}

double StepFunction::operator()(double x) const {
  const std::size_t idx =
      std::upper_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin();
  return levels_[idx];
}

double StepFunction::max_level() const {
  return *std::max_element(levels_.begin(), levels_.end());
}

double StepFunction::integral(double lo, double hi) const {
  if (!(hi > lo)) return 0.0;
  double sum = 0.0;
  double cursor = lo;
  for (std::size_t i = 0; i < breaks_.size(); ++i) {
    if (breaks_[i] <= cursor) continue;
    const double end = std::min(breaks_[i], hi);
    if (end > cursor) sum += levels_[i] * (end - cursor);
    cursor = end;
    if (cursor >= hi) return sum;
  }
  sum += levels_.back() * (hi - cursor);
  return sum;
}

GroundModel::GroundModel(double window_lo, double window_hi, StepFunction beta,
                         double log_gamma, double radius)
    : lo_(window_lo), hi_(window_hi), beta_(std::move(beta)), log_gamma_(log_gamma),
      radius_(radius) {
  if (!(hi_ > lo_)) throw std::invalid_argument("GroundModel: empty window");
  if (!(radius_ >= 0.0)) throw std::invalid_argument("GroundModel: negative radius");
  for (double level : beta_.levels())
    if (!(level >= 0.0) || !std::isfinite(level))
      throw std::invalid_argument("GroundModel: intensity levels must be finite and >= 0");
}

double GroundModel::beta(double x) const {
  if (!(x > lo_) || !(x < hi_)) return 0.0;
  return beta_(x);
}

double GroundModel::beta_integral() const { return beta_.integral(lo_, hi_); }

PointConfiguration::PointConfiguration(std::vector<double> points)
    : points_(std::move(points)) {
  std::sort(points_.begin(), points_.end());
  for (std::size_t i = 1; i < points_.size(); ++i)
    if (points_[i] == points_[i - 1])
      throw std::invalid_argument("PointConfiguration: duplicate point");
}

bool PointConfiguration::contains(double t) const {
  return std::binary_search(points_.begin(), points_.end(), t);
}

std::size_t PointConfiguration::insert(double t) {
  auto it = std::lower_bound(points_.begin(), points_.end(), t);
  if (it != points_.end() && *it == t)
    throw std::invalid_argument("PointConfiguration: duplicate point");
  return static_cast<std::size_t>(points_.insert(it, t) - points_.begin());
}

double PointConfiguration::erase(std::size_t index) {
  if (index >= points_.size())
    throw std::out_of_range("PointConfiguration: index out of range");
  const double value = points_[index];
  points_.erase(points_.begin() + static_cast<std::ptrdiff_t>(index));
  return value;
}

double coverage_length(const GroundModel& model, const PointConfiguration& config) {
  const double r = model.radius();
  double covered = 0.0;
  double cursor = model.window_lo();
  for (double x : config.points()) {
    const double lo = std::max(std::max(x - r, cursor), model.window_lo());
    const double hi = std::min(x + r, model.window_hi());
    if (hi > lo) covered += hi - lo;
    cursor = std::max(cursor, hi);
  }
  return covered;
}

double log_density_unnorm(const GroundModel& model, const PointConfiguration& config) {
  double sum = 0.0;
  for (double x : config.points()) {
    const double b = model.beta(x);
    if (!(b > 0.0)) return kNegInf;
    sum += std::log(b);
  }
  return sum - model.log_gamma() * coverage_length(model, config);
}

double papangelou_ratio(const GroundModel& model, const PointConfiguration& config,
                        double t) {
  if (config.contains(t))
    throw std::invalid_argument("papangelou_ratio: t already belongs to the configuration");
  const double b = model.beta(t);
  if (!(b > 0.0)) return 0.0;
  return b * std::exp(-model.log_gamma() *
                      added_coverage(model, config.points(), kNoSkip, t));
}

double papangelou_ratio_excluding(const GroundModel& model,
                                  const PointConfiguration& config, std::size_t skip,
                                  double t) {
  if (skip >= config.size())
    throw std::out_of_range("papangelou_ratio_excluding: skip index out of range");
  const double b = model.beta(t);
  if (!(b > 0.0)) return 0.0;
  return b * std::exp(-model.log_gamma() *
                      added_coverage(model, config.points(), skip, t));
}

MhResult sample_mh(const GroundModel& model, const MhOptions& options, RngStream& rng,
                   PointConfiguration init, const MhObserver& observer) {
  if (options.n_steps < 0 || options.burn_in < 0 || options.burn_in > options.n_steps)
    throw std::invalid_argument("sample_mh: need 0 <= burn_in <= n_steps");
  if (!(options.p_birth >= 0.0) || !(options.p_death >= 0.0) ||
      options.p_birth + options.p_death > 1.0)
    throw std::invalid_argument("sample_mh: birth/death probabilities must fit in [0, 1]");
  for (double x : init.points())
    if (!(x > model.window_lo()) || !(x < model.window_hi()))
      throw std::invalid_argument("sample_mh: initial point outside the open window");

  MhResult result;
  result.config = std::move(init);
  const double window = model.window_length();

  if (options.fixed_n && result.config.size() != *options.fixed_n) {
    // Seed the requested count with uniform draws on the positive-intensity
    // part of the window.
    result.config = PointConfiguration{};
    std::uint64_t attempts = 0;
    while (result.config.size() < *options.fixed_n) {
      if (++attempts > 1'000'000)
        throw std::runtime_error(
            "sample_mh: could not seed the fixed-size configuration inside the "
            "positive-intensity region");
      const double t = rng.uniform(model.window_lo(), model.window_hi());
      if (model.beta(t) > 0.0 && !result.config.contains(t)) result.config.insert(t);
    }
  }

  auto& config = result.config;
  for (long long step = 1; step <= options.n_steps; ++step) {
    const double kind = options.fixed_n ? 1.0 : rng.uniform();
    if (options.fixed_n || kind >= options.p_birth + options.p_death) {
      // Shift: redraw one point uniformly in the window.
      if (config.size() > 0) {
        const std::size_t idx = rng.index(config.size());
        const double proposal = rng.uniform(model.window_lo(), model.window_hi());
        if (!config.contains(proposal)) {
          const double numer = papangelou_ratio_excluding(model, config, idx, proposal);
          const double denom = papangelou_ratio_excluding(model, config, idx, config[idx]);
          const double accept = denom > 0.0
                                    ? numer / denom
                                    : (numer > 0.0 ? 2.0 : 0.0);
          if (rng.uniform() < accept) {
            config.erase(idx);
            config.insert(proposal);
            ++result.accepted;
          }
        }
      }
    } else if (kind < options.p_birth) {
      const double proposal = rng.uniform(model.window_lo(), model.window_hi());
      if (!config.contains(proposal)) {
        const double ratio = papangelou_ratio(model, config, proposal);
        const double accept = ratio * window * options.p_death /
                              (options.p_birth * static_cast<double>(config.size() + 1));
        if (rng.uniform() < accept) {
          config.insert(proposal);
          ++result.accepted;
        }
      }
    } else if (config.size() > 0) {
      const std::size_t idx = rng.index(config.size());
      const double ratio = papangelou_ratio_excluding(model, config, idx, config[idx]);
      const double accept =
          ratio > 0.0 ? options.p_birth * static_cast<double>(config.size()) /
                            (options.p_death * window * ratio)
                      : 2.0;
      if (rng.uniform() < accept) {
        config.erase(idx);
        ++result.accepted;
      }
    }

    if (options.trace_stride > 0 && step % options.trace_stride == 0) {
      result.trace.push_back({step, config.size(), coverage_length(model, config),
                              log_density_unnorm(model, config)});
    }
    if (observer && step > options.burn_in) observer(step, config);
  }
  return result;
}

double interaction_log_phi(const GroundModel& model, const PointConfiguration& subset) {
  const std::size_t n = subset.size();
  if (n > 12)
    throw std::invalid_argument(
        "interaction_log_phi: inclusion-exclusion over subsets is limited to 12 points");
  for (double x : subset.points())
    if (!(model.beta(x) > 0.0))
      throw std::invalid_argument(
          "interaction_log_phi: undefined where the intensity vanishes");

  const std::size_t full = std::size_t{1} << n;
  double sum = 0.0;
  std::vector<double> scratch;
  for (std::size_t mask = 0; mask < full; ++mask) {
    scratch.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::size_t{1} << i)) scratch.push_back(subset[i]);
    const double logp = log_density_unnorm(model, PointConfiguration(scratch));
    const int parity = (n - static_cast<std::size_t>(std::popcount(mask))) % 2 ? -1 : 1;
    sum += parity * logp;
  }
  return sum;
}

double hammersley_clifford_check(const GroundModel& model,
                                 const PointConfiguration& config) {
  const std::size_t n = config.size();
  if (n > 12)
    throw std::invalid_argument(
        "hammersley_clifford_check: subset enumeration is limited to 12 points");
  const std::size_t full = std::size_t{1} << n;
  double total = 0.0;
  std::vector<double> scratch;
  for (std::size_t mask = 0; mask < full; ++mask) {
    scratch.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::size_t{1} << i)) scratch.push_back(config[i]);
    total += interaction_log_phi(model, PointConfiguration(scratch));
  }
  return total - log_density_unnorm(model, config);
}

}  // namespace smic
