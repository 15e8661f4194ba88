#include "smic/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace smic {

namespace {

[[noreturn]] void fail_at(const std::filesystem::path& path, std::size_t line,
                          const std::string& what) {
  std::ostringstream msg;
  msg << path.string() << ":" << line << ": " << what;
  throw std::runtime_error(msg.str());
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trimmed(const std::string& s) {
  const auto from = s.find_first_not_of(" \t\r\n");
  if (from == std::string::npos) return {};
  const auto to = s.find_last_not_of(" \t\r\n");
  return s.substr(from, to - from + 1);
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

double Histogram::edge(std::size_t i) const {
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins());
}

double Histogram::density(std::size_t i) const {
  if (total == 0) return 0.0;
  const double width = (hi - lo) / static_cast<double>(bins());
  return static_cast<double>(counts[i]) / (static_cast<double>(total) * width);
}

Histogram make_histogram(const std::vector<double>& values, double lo, double hi,
                         std::size_t bins) {
  if (!(hi > lo) || bins == 0)
    throw std::invalid_argument("make_histogram: need hi > lo and at least one bin");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(bins, 0);
  h.total = values.size();
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    if (v < lo || v >= hi) continue;
    std::size_t idx = static_cast<std::size_t>((v - lo) / width);
    if (idx >= bins) idx = bins - 1;
    ++h.counts[idx];
  }
  return h;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory) {
  auto out = open_for_write(path);
  out << "index,state,time\n";
  for (std::size_t i = 0; i < trajectory.jumps.size(); ++i)
    out << i << "," << trajectory.jumps[i].state << ","
        << format_double(trajectory.jumps[i].time) << "\n";
}

void write_renewal_csv(const std::filesystem::path& path, const RenewalEstimate& estimate) {
  auto out = open_for_write(path);
  out << "time,M_hat,m_hat,stderr\n";
  for (std::size_t i = 0; i < estimate.grid.size(); ++i)
    out << format_double(estimate.grid[i]) << "," << format_double(estimate.mean[i]) << ","
        << format_double(estimate.density[i]) << ","
        << format_double(estimate.std_error[i]) << "\n";
}

void write_marks_csv(const std::filesystem::path& path,
                     const std::vector<std::pair<double, Mark>>& marks) {
  auto out = open_for_write(path);
  out << "x,a,l,is_atom\n";
  for (const auto& [x, mark] : marks)
    out << format_double(x) << "," << format_double(mark.start) << ","
        << format_double(mark.length) << "," << (mark.is_atom() ? 1 : 0) << "\n";
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& histogram) {
  auto out = open_for_write(path);
  out << "bin_lo,bin_hi,count,density\n";
  for (std::size_t i = 0; i < histogram.bins(); ++i)
    out << format_double(histogram.edge(i)) << "," << format_double(histogram.edge(i + 1))
        << "," << histogram.counts[i] << "," << format_double(histogram.density(i))
        << "\n";
}

void write_ground_trace_csv(const std::filesystem::path& path,
                            const std::vector<MhTraceRow>& trace) {
  auto out = open_for_write(path);
  out << "step,n_points,coverage_length,log_density\n";
  for (const auto& row : trace)
    out << row.step << "," << row.n_points << "," << format_double(row.coverage) << ","
        << format_double(row.log_density) << "\n";
}

void write_points_csv(const std::filesystem::path& path, const std::vector<double>& points) {
  auto out = open_for_write(path);
  out << "x\n";
  for (double x : points) out << format_double(x) << "\n";
}

IntervalSet read_interval_set_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open marks file: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail_at(path, 1, "missing header row");
  ++line_no;
  const std::vector<std::string> header = split_csv_line(line);
  std::ptrdiff_t col_a = -1, col_l = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = trimmed(header[i]);
    if (name == "a") col_a = static_cast<std::ptrdiff_t>(i);
    if (name == "l") col_l = static_cast<std::ptrdiff_t>(i);
  }
  if (col_a < 0 || col_l < 0)
    fail_at(path, 1, "header must contain columns 'a' and 'l'");

  std::vector<Mark> marks;
  while (std::getline(in, line)) {
    ++line_no;
    if (trimmed(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() <= static_cast<std::size_t>(std::max(col_a, col_l)))
      fail_at(path, line_no, "expected at least " +
                                 std::to_string(std::max(col_a, col_l) + 1) + " fields");
    const auto parse = [&](std::ptrdiff_t col, const char* what) {
      const std::string text = trimmed(fields[static_cast<std::size_t>(col)]);
      char* end = nullptr;
      const double v = std::strtod(text.c_str(), &end);
      if (end == text.c_str() || *end != '\0')
        fail_at(path, line_no, std::string("cannot parse ") + what + " from '" + text + "'");
      return v;
    };
    Mark mark;
    mark.start = parse(col_a, "column 'a'");
    mark.length = parse(col_l, "column 'l'");
    if (!(mark.length >= 0.0))
      fail_at(path, line_no, "interval length must be >= 0");
    marks.push_back(mark);
  }
  return IntervalSet(std::move(marks));
}

}  // namespace smic
