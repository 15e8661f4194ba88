#pragma once

// Shared helpers for the test binaries. The integrator here is deliberately
// independent of the library's quadrature so that integral checks are real
// cross-checks and not self-comparisons.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace testsupport {

// Adaptive Simpson integration with absolute tolerance.
inline double simpson_step(const std::function<double(double)>& f, double a, double b,
                           double fa, double fm, double fb, double whole, double tol,
                           int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int depth = 40) {
  if (!(b > a)) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, depth);
}

// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    stat = std::max(stat, std::abs(F - static_cast<double>(i) / n));
    stat = std::max(stat, std::abs(static_cast<double>(i + 1) / n - F));
  }
  return stat;
}

// Critical KS value at significance 1e-3 (asymptotic: c(alpha) = 1.9495).
inline double ks_critical(std::size_t n) {
  return 1.9495 / std::sqrt(static_cast<double>(n));
}

inline double ks_critical_two_sample(std::size_t n, std::size_t m) {
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return 1.9495 * std::sqrt((nn + mm) / (nn * mm));
}

inline double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double stat = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    const double fa = static_cast<double>(i) / static_cast<double>(a.size());
    const double fb = static_cast<double>(j) / static_cast<double>(b.size());
    stat = std::max(stat, std::abs(fa - fb));
  }
  return stat;
}

inline double chi_squared_quantile(double df, double p) {
  return boost::math::quantile(boost::math::chi_squared(df), p);
}

inline double mean(const std::vector<double>& values) {
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

inline double sample_variance(const std::vector<double>& values) {
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

// Standard error of the mean of a correlated sequence by batch means.
inline double batch_means_se(const std::vector<double>& values, std::size_t n_batches = 50) {
  const std::size_t batch = values.size() / n_batches;
  if (batch == 0) throw std::invalid_argument("batch_means_se: too few values");
  std::vector<double> means;
  means.reserve(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    double sum = 0.0;
    for (std::size_t i = b * batch; i < (b + 1) * batch; ++i) sum += values[i];
    means.push_back(sum / static_cast<double>(batch));
  }
  return std::sqrt(sample_variance(means) / static_cast<double>(n_batches));
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Minimal CSV reader: header names to column vectors (numeric fields only).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return columns[i];
    throw std::runtime_error("no column named " + name);
  }
  std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path);
  std::istringstream head(line);
  std::string field;
  while (std::getline(head, field, ',')) table.header.push_back(field);
  table.columns.resize(table.header.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    for (std::size_t i = 0; i < table.header.size(); ++i) {
      if (!std::getline(row, field, ',')) throw std::runtime_error("short row in " + path);
      table.columns[i].push_back(std::stod(field));
    }
  }
  return table;
}

}  // namespace testsupport
