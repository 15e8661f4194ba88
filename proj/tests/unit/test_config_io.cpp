#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "smic/config.hpp"
#include "smic/csv.hpp"
#include "smic/experiments.hpp"
#include "support.hpp"

using smic::AppConfig;
using smic::ConfigError;
using smic::ConfigFitFamily;
using smic::IntervalSet;
using smic::make_histogram;
using smic::Mark;
using smic::merge_config_json;
using smic::parse_config_json;
using smic::read_interval_set_csv;
using smic::RenewalEstimate;
using smic::Trajectory;

namespace {

// Fresh path under the build-tree scratch directory.
std::filesystem::path scratch_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "smic_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

const char* kFullConfig = R"({
  "seed": 42,
  "out": "/tmp/somewhere",
  "threads": 3,
  "kernel": {"family": "harmonic_exponential", "amplitude": 1.0, "elevation": 1.6,
             "frequency": 6.283185307179586},
  "renewal": {"t0": -0.2, "pieces": [{"start": -0.2, "end": 0.4, "level": 0.4},
                                     {"start": 0.4, "end": 1.0, "level": 0.1}]},
  "ground": {"window": [0.0, 1.0], "beta": {"breaks": [0.81, 0.85], "levels": [3, 5, 3]},
             "log_gamma": 1.2, "radius": 0.1},
  "chain": {"steps": 1000, "burn_in": 100, "trace_stride": 10},
  "fit": {"family": "weibull", "input": "marks.csv", "t0": -0.2, "horizon": 1.0,
          "breaks": [0.4]},
  "misspec": {"eval_time": 0.6, "length_max": 4.0, "length_step": 0.02}
})";

}  // namespace

TEST_SUITE_BEGIN("config_io");

TEST_CASE("full configuration document parses into typed blocks") {
  const AppConfig config = parse_config_json(kFullConfig);
  CHECK(config.seed == 42);
  CHECK(config.out_dir == "/tmp/somewhere");
  CHECK(config.threads == 3);

  REQUIRE(config.kernel.has_value());
  CHECK(config.kernel->rate(0.0) == doctest::Approx(1.6).epsilon(1e-12));

  REQUIRE(config.renewal.has_value());
  CHECK(config.renewal->t0() == -0.2);
  CHECK((*config.renewal)(0.5) == doctest::Approx(0.1));

  REQUIRE(config.ground.has_value());
  CHECK(config.ground->beta(0.82) == doctest::Approx(5.0));
  CHECK(config.ground->log_gamma() == doctest::Approx(1.2));

  CHECK(config.chain.steps == 1000);
  CHECK(config.chain.burn_in == 100);
  CHECK(config.chain.trace_stride == 10);

  REQUIRE(config.fit.has_value());
  CHECK(config.fit->family == ConfigFitFamily::Weibull);
  CHECK(config.fit->input == "marks.csv");
  CHECK(config.fit->piece_breaks == std::vector<double>{0.4});

  REQUIRE(config.misspec.has_value());
  CHECK(config.misspec->eval_time == 0.6);
}

TEST_CASE("scalar shorthands build constant parameters") {
  const AppConfig config = parse_config_json(R"({
    "kernel": {"family": "gamma", "shape": 2.0, "rate": 1.5},
    "renewal": {"t0": 0.0, "horizon": 2.0, "level": 0.3},
    "ground": {"window": [0.0, 1.0], "beta": 400.0, "log_gamma": 0.0, "radius": 0.1}
  })");
  REQUIRE(config.kernel.has_value());
  CHECK(config.kernel->shape(0.3) == 2.0);
  REQUIRE(config.renewal.has_value());
  CHECK((*config.renewal)(1.0) == 0.3);
  CHECK(config.ground->beta(0.5) == 400.0);
}

TEST_CASE("harmonic shorthand inside a gamma kernel parameter") {
  const AppConfig config = parse_config_json(R"({
    "kernel": {"family": "gamma", "shape": 2.0,
               "rate": {"harmonic": {"amplitude": 1.6, "elevation": 1.3,
                                      "frequency": 6.283185307179586}}}
  })");
  REQUIRE(config.kernel.has_value());
  CHECK(config.kernel->rate(0.25) == doctest::Approx(1.6 * 2.3).epsilon(1e-12));
}

TEST_CASE("every invalid field is reported with its path in one error") {
  const char* broken = R"({
    "seed": -5,
    "threads": 0,
    "kernel": {"family": "gamma", "shape": "wide", "rate": 2.0},
    "chain": {"steps": 100, "burn_in": 500}
  })";
  try {
    parse_config_json(broken);
    FAIL("expected a configuration error");
  } catch (const ConfigError& error) {
    const std::string what = error.what();
    CHECK(what.find("seed") != std::string::npos);
    CHECK(what.find("threads") != std::string::npos);
    CHECK(what.find("kernel.shape") != std::string::npos);
    CHECK(what.find("chain") != std::string::npos);
  }
}

TEST_CASE("malformed JSON is a configuration error") {
  CHECK_THROWS_AS(parse_config_json("{not json"), ConfigError);
}

TEST_CASE("infeasible kernel parameters are configuration errors") {
  CHECK_THROWS_AS(parse_config_json(R"({"kernel": {"family": "harmonic_exponential",
    "amplitude": 1.0, "elevation": 0.5, "frequency": 1.0}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_json(R"({"kernel": {"family": "nope"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_json(R"({"renewal": {"t0": 0.0, "horizon": 1.0,
    "level": -0.4}})"),
                  ConfigError);
}

TEST_CASE("merging configurations lets the override win field by field") {
  const std::string base = R"({"chain": {"steps": 1000, "burn_in": 100},
                               "misspec": {"eval_time": 0.6}})";
  const std::string override_text = R"({"chain": {"steps": 400}, "seed": 7})";
  const AppConfig merged = parse_config_json(merge_config_json(base, override_text));
  CHECK(merged.chain.steps == 400);
  CHECK(merged.chain.burn_in == 100);
  CHECK(merged.misspec->eval_time == 0.6);
  CHECK(merged.seed == 7);
}

TEST_CASE("echo strips runtime fields so manifests stay comparable") {
  const AppConfig a = parse_config_json(R"({"seed": 1, "threads": 2,
    "misspec": {"eval_time": 0.6}})");
  const AppConfig b = parse_config_json(R"({"seed": 99, "threads": 8,
    "out": "elsewhere", "misspec": {"eval_time": 0.6}})");
  CHECK(a.echo_json == b.echo_json);
  CHECK(a.echo_json.find("eval_time") != std::string::npos);
  CHECK(a.echo_json.find("seed") == std::string::npos);
}

TEST_CASE("experiment defaults parse and carry the documented shapes") {
  for (const char* name : {"misspec", "renewal-panels", "peak-conditional"}) {
    const AppConfig config = parse_config_json(smic::default_experiment_config(name));
    if (std::string(name) == "misspec") {
      REQUIRE(config.kernel.has_value());
      REQUIRE(config.ground.has_value());
      CHECK(config.ground->beta(0.5) == 400.0);
      CHECK(config.misspec.has_value());
    }
    if (std::string(name) == "renewal-panels") {
      REQUIRE(config.panels.has_value());
      CHECK(config.panels->samples == 200000);
      CHECK(config.panels->step_levels == std::vector<double>{0.4, 0.1});
    }
    if (std::string(name) == "peak-conditional") {
      REQUIRE(config.peak.has_value());
      CHECK(config.peak->data.size() == 3);
      CHECK(config.chain.steps == 600000);
    }
  }
  CHECK_THROWS_AS(smic::default_experiment_config("unknown"), ConfigError);
}

TEST_CASE("marks round-trip through CSV exactly") {
  const auto path = scratch_file("roundtrip_marks.csv");
  const std::vector<std::pair<double, Mark>> marked = {
      {0.5, {0.5, 0.0}},
      {0.25, {0.1234567890123456, 0.9876543210987654}},
      {0.75, {-0.2, 1e-17}},
  };
  smic::write_marks_csv(path, marked);
  const IntervalSet data = read_interval_set_csv(path);
  REQUIRE(data.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(data.marks()[i].start == marked[i].second.start);
    CHECK(data.marks()[i].length == marked[i].second.length);
  }
  CHECK(data.atom_count() == 1);
}

TEST_CASE("malformed CSV rows are reported with their line number") {
  const auto path = scratch_file("broken_marks.csv");
  {
    std::ofstream out(path);
    out << "x,a,l,is_atom\n";
    out << "0.5,0.5,0,1\n";
    out << "0.25,oops,0.4,0\n";
  }
  try {
    read_interval_set_csv(path);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& error) {
    const std::string what = error.what();
    CHECK(what.find(":3:") != std::string::npos);
    CHECK(what.find("oops") != std::string::npos);
  }

  const auto headerless = scratch_file("headerless_marks.csv");
  { std::ofstream out(headerless); out << "0.5,0.5\n"; }
  CHECK_THROWS_AS(read_interval_set_csv(headerless), std::runtime_error);
  CHECK_THROWS_AS(read_interval_set_csv(scratch_file("missing.csv")), std::runtime_error);
}

TEST_CASE("negative lengths in a marks file are rejected") {
  const auto path = scratch_file("negative_marks.csv");
  {
    std::ofstream out(path);
    out << "a,l\n0.5,-0.25\n";
  }
  CHECK_THROWS_AS(read_interval_set_csv(path), std::runtime_error);
}

TEST_CASE("histograms bin values and count the out-of-range tail in the total") {
  const std::vector<double> values = {0.05, 0.15, 0.15, 0.95, 1.5, -0.2};
  const auto h = make_histogram(values, 0.0, 1.0, 10);
  CHECK(h.bins() == 10);
  CHECK(h.counts[0] == 1);
  CHECK(h.counts[1] == 2);
  CHECK(h.counts[9] == 1);
  CHECK(h.total == 6);
  // Density integrates to the in-range fraction.
  double mass = 0.0;
  for (std::size_t i = 0; i < h.bins(); ++i) mass += h.density(i) * 0.1;
  CHECK(mass == doctest::Approx(4.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("trajectory, renewal, trace and point exports carry their schemas") {
  Trajectory traj;
  traj.t0 = 0.0;
  traj.t1 = 10.0;
  traj.jumps = {{1, 0.0}, {0, 2.0}, {1, 5.0}};
  const auto traj_path = scratch_file("trajectory.csv");
  smic::write_trajectory_csv(traj_path, traj);
  const auto traj_table = testsupport::read_csv(traj_path.string());
  CHECK(traj_table.header == std::vector<std::string>{"index", "state", "time"});
  CHECK(traj_table.column("time") == std::vector<double>{0.0, 2.0, 5.0});

  RenewalEstimate estimate;
  estimate.grid = {1.0, 2.0};
  estimate.mean = {0.4, 0.9};
  estimate.density = {0.45, 0.5};
  estimate.std_error = {0.01, 0.02};
  estimate.n_replicates = 100;
  const auto renewal_path = scratch_file("renewal.csv");
  smic::write_renewal_csv(renewal_path, estimate);
  const auto renewal_table = testsupport::read_csv(renewal_path.string());
  CHECK(renewal_table.header ==
        std::vector<std::string>{"time", "M_hat", "m_hat", "stderr"});
  CHECK(renewal_table.column("M_hat") == std::vector<double>{0.4, 0.9});

  const auto trace_path = scratch_file("trace.csv");
  smic::write_ground_trace_csv(trace_path, {{100, 3, 0.55, -1.25}});
  const auto trace_table = testsupport::read_csv(trace_path.string());
  CHECK(trace_table.header ==
        std::vector<std::string>{"step", "n_points", "coverage_length", "log_density"});
  CHECK(trace_table.column("coverage_length") == std::vector<double>{0.55});

  const auto points_path = scratch_file("points.csv");
  smic::write_points_csv(points_path, {0.25, 0.5});
  const auto points_table = testsupport::read_csv(points_path.string());
  CHECK(points_table.header == std::vector<std::string>{"x"});
  CHECK(points_table.column("x") == std::vector<double>{0.25, 0.5});
}

TEST_CASE("formatted doubles survive a parsing round trip") {
  for (double v : {0.1, -1e-17, 3.141592653589793, 1e300, 0.0}) {
    const std::string text = smic::format_double(v);
    CHECK(std::stod(text) == v);
  }
}

TEST_SUITE_END();
