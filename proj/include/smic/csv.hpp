#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "smic/censoring.hpp"
#include "smic/ground.hpp"
#include "smic/inference.hpp"
#include "smic/semi_markov.hpp"

namespace smic {

/// Shortest round-trip decimal rendering of a double (%.17g); identical
/// bytes for identical values, which is what makes CSV outputs replayable.
std::string format_double(double value);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  std::size_t bins() const { return counts.size(); }
  double edge(std::size_t i) const;
  /// Normalised height of bin i (counts / (total * width)).
  double density(std::size_t i) const;
};

/// Count values into equal-width bins over [lo, hi); values outside are
/// dropped but still counted in total.
Histogram make_histogram(const std::vector<double>& values, double lo, double hi,
                         std::size_t bins);

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory);
void write_renewal_csv(const std::filesystem::path& path, const RenewalEstimate& estimate);
/// Rows (x, a, l, is_atom): the ground point and its mark.
void write_marks_csv(const std::filesystem::path& path,
                     const std::vector<std::pair<double, Mark>>& marks);
void write_histogram_csv(const std::filesystem::path& path, const Histogram& histogram);
/// Rows (step, n_points, coverage_length, log_density) of a sampler trace.
void write_ground_trace_csv(const std::filesystem::path& path,
                            const std::vector<MhTraceRow>& trace);
/// Single-column export of a point configuration.
void write_points_csv(const std::filesystem::path& path, const std::vector<double>& points);

/// Parse a marks CSV (needs columns a and l; extra columns are ignored).
/// Errors carry file:line positions.
IntervalSet read_interval_set_csv(const std::filesystem::path& path);

}  // namespace smic
