#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "smic/config.hpp"
#include "smic/csv.hpp"
#include "smic/experiments.hpp"
#include "smic/version.hpp"

namespace py = pybind11;
using namespace smic;

PYBIND11_MODULE(_smic, m) {
  m.doc() = "Semi-Markov interval-censoring model";
  m.attr("__version__") = kVersion;

  py::class_<RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def_static("derive", &RngStream::derive, py::arg("master"), py::arg("stream"))
      .def("next", &RngStream::next)
      .def("uniform", py::overload_cast<>(&RngStream::uniform))
      .def("uniform", py::overload_cast<double, double>(&RngStream::uniform), py::arg("lo"),
           py::arg("hi"))
      .def("bernoulli", &RngStream::bernoulli, py::arg("p"))
      .def("exponential", &RngStream::exponential, py::arg("rate"))
      .def("index", &RngStream::index, py::arg("n"));

  py::class_<Harmonic>(m, "Harmonic")
      .def(py::init([](double amplitude, double elevation, double frequency) {
             return Harmonic{amplitude, elevation, frequency};
           }),
           py::arg("amplitude") = 1.0, py::arg("elevation") = 1.0, py::arg("frequency") = 0.0)
      .def_readwrite("amplitude", &Harmonic::amplitude)
      .def_readwrite("elevation", &Harmonic::elevation)
      .def_readwrite("frequency", &Harmonic::frequency)
      .def("__call__", &Harmonic::operator())
      .def("min_value", &Harmonic::min_value)
      .def("max_value", &Harmonic::max_value);

  py::class_<TimeFunction>(m, "TimeFunction")
      .def(py::init<double>(), py::arg("constant"))
      .def(py::init<const Harmonic&>(), py::arg("harmonic"))
      .def("__call__", &TimeFunction::operator())
      .def("is_constant", &TimeFunction::is_constant)
      .def("is_harmonic", &TimeFunction::is_harmonic);
  py::implicitly_convertible<double, TimeFunction>();
  py::implicitly_convertible<Harmonic, TimeFunction>();

  py::class_<SemiMarkovKernel>(m, "SemiMarkovKernel")
      .def_static("gamma", &SemiMarkovKernel::gamma, py::arg("shape"), py::arg("rate"))
      .def_static("weibull", &SemiMarkovKernel::weibull, py::arg("shape"), py::arg("rate"))
      .def_static("harmonic_exponential", &SemiMarkovKernel::harmonic_exponential,
                  py::arg("amplitude"), py::arg("elevation"), py::arg("frequency"))
      .def_property_readonly("family",
                             [](const SemiMarkovKernel& k) { return to_string(k.family()); })
      .def("shape", &SemiMarkovKernel::shape, py::arg("x"))
      .def("rate", &SemiMarkovKernel::rate, py::arg("x"))
      .def("density", &SemiMarkovKernel::density, py::arg("x"), py::arg("tau"))
      .def("cdf", &SemiMarkovKernel::cdf, py::arg("x"), py::arg("tau"))
      .def("survival", &SemiMarkovKernel::survival, py::arg("x"), py::arg("tau"))
      .def("hazard", &SemiMarkovKernel::hazard, py::arg("last_jump"), py::arg("t"))
      .def("quantile", &SemiMarkovKernel::quantile, py::arg("x"), py::arg("p"))
      .def("sample_sojourn", &SemiMarkovKernel::sample_sojourn, py::arg("x"), py::arg("rng"))
      .def("mean_sojourn", &SemiMarkovKernel::mean_sojourn, py::arg("x"))
      .def("min_rate", &SemiMarkovKernel::min_rate, py::arg("lo"), py::arg("hi"));

  py::class_<Jump>(m, "Jump")
      .def_readonly("state", &Jump::state)
      .def_readonly("time", &Jump::time);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("t0", &Trajectory::t0)
      .def_readonly("t1", &Trajectory::t1)
      .def_readonly("jumps", &Trajectory::jumps)
      .def("state_at", &Trajectory::state_at, py::arg("t"));

  py::class_<SimulateOptions>(m, "SimulateOptions")
      .def(py::init<>())
      .def_readwrite("max_jumps", &SimulateOptions::max_jumps);

  m.def("simulate", &simulate, py::arg("kernel_y"), py::arg("kernel_z"), py::arg("t0"),
        py::arg("t1"), py::arg("rng"), py::arg("options") = SimulateOptions{});
  m.def("count_cycles", &count_cycles, py::arg("trajectory"), py::arg("t"));

  py::class_<RenewalPiece>(m, "RenewalPiece")
      .def(py::init([](double start, double end, double level) {
             return RenewalPiece{start, end, level};
           }),
           py::arg("start"), py::arg("end"), py::arg("level"))
      .def_readonly("start", &RenewalPiece::start)
      .def_readonly("end", &RenewalPiece::end)
      .def_readonly("level", &RenewalPiece::level);

  py::class_<RenewalDensity>(m, "RenewalDensity")
      .def(py::init<double, std::vector<RenewalPiece>>(), py::arg("t0"), py::arg("pieces"))
      .def_static("constant", &RenewalDensity::constant, py::arg("t0"), py::arg("horizon"),
                  py::arg("level"))
      .def_property_readonly("t0", &RenewalDensity::t0)
      .def_property_readonly("horizon", &RenewalDensity::horizon)
      .def("__call__", &RenewalDensity::operator())
      .def("max_level", &RenewalDensity::max_level)
      .def("integral", &RenewalDensity::integral, py::arg("lo"), py::arg("hi"));

  py::class_<RenewalEstimate>(m, "RenewalEstimate")
      .def_readonly("grid", &RenewalEstimate::grid)
      .def_readonly("mean", &RenewalEstimate::mean)
      .def_readonly("density", &RenewalEstimate::density)
      .def_readonly("std_error", &RenewalEstimate::std_error)
      .def_readonly("n_replicates", &RenewalEstimate::n_replicates);

  m.def("estimate_renewal", &estimate_renewal, py::arg("kernel_y"), py::arg("kernel_z"),
        py::arg("t0"), py::arg("grid"), py::arg("n_replicates"), py::arg("seed"),
        py::arg("threads") = 1, py::arg("options") = SimulateOptions{});
  m.def("estimate_pure_renewal_density", &estimate_pure_renewal_density, py::arg("kernel_y"),
        py::arg("t0"), py::arg("t1"), py::arg("n_bins"), py::arg("n_replicates"),
        py::arg("seed"), py::arg("threads") = 1, py::arg("options") = SimulateOptions{});

  py::class_<RenewalValidity>(m, "RenewalValidity")
      .def_readonly("max_level", &RenewalValidity::max_level)
      .def_readonly("bound", &RenewalValidity::bound)
      .def_readonly("pass_", &RenewalValidity::pass)
      .def("__bool__", [](const RenewalValidity& v) { return v.pass; });

  m.def("validate_renewal_density", &validate_renewal_density, py::arg("target"),
        py::arg("kernel_y"));
  m.def("thin_to_renewal_density", &thin_to_renewal_density, py::arg("kernel_y"),
        py::arg("target"), py::arg("m_tilde"), py::arg("t0"), py::arg("t1"), py::arg("rng"),
        py::arg("options") = SimulateOptions{});

  py::class_<Mark>(m, "Mark")
      .def(py::init([](double start, double length) { return Mark{start, length}; }),
           py::arg("start"), py::arg("length"))
      .def_readonly("start", &Mark::start)
      .def_readonly("length", &Mark::length)
      .def("is_atom", &Mark::is_atom);

  py::class_<CensoringModel>(m, "CensoringModel")
      .def(py::init<SemiMarkovKernel, RenewalDensity, double>(), py::arg("kernel_y"),
           py::arg("renewal"), py::arg("quad_tol") = 1e-8)
      .def_property_readonly("t0", &CensoringModel::t0)
      .def("normalizer", &CensoringModel::normalizer, py::arg("x"))
      .def("atom_probability", &CensoringModel::atom_probability, py::arg("x"))
      .def("age_excess_cdf", &CensoringModel::age_excess_cdf, py::arg("t"),
           py::arg("age_bound"), py::arg("excess_bound"))
      .def("interval_density", &CensoringModel::interval_density, py::arg("x"), py::arg("a"),
           py::arg("l"))
      .def("marginal_start_density", &CensoringModel::marginal_start_density, py::arg("x"),
           py::arg("a"))
      .def("conditional_length_density", &CensoringModel::conditional_length_density,
           py::arg("x"), py::arg("a"), py::arg("l"))
      .def("sample_mark", &CensoringModel::sample_mark, py::arg("x"), py::arg("rng"))
      .def("sample_interval", &CensoringModel::sample_interval, py::arg("x"), py::arg("rng"));

  py::class_<StepFunction>(m, "StepFunction")
      .def(py::init<double>(), py::arg("constant"))
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("breaks"),
           py::arg("levels"))
      .def("__call__", &StepFunction::operator())
      .def("max_level", &StepFunction::max_level)
      .def("integral", &StepFunction::integral, py::arg("lo"), py::arg("hi"));
  py::implicitly_convertible<double, StepFunction>();

  py::class_<GroundModel>(m, "GroundModel")
      .def(py::init<double, double, StepFunction, double, double>(), py::arg("window_lo"),
           py::arg("window_hi"), py::arg("beta"), py::arg("log_gamma"), py::arg("radius"))
      .def_property_readonly("window_lo", &GroundModel::window_lo)
      .def_property_readonly("window_hi", &GroundModel::window_hi)
      .def_property_readonly("log_gamma", &GroundModel::log_gamma)
      .def_property_readonly("radius", &GroundModel::radius)
      .def("beta", &GroundModel::beta, py::arg("x"))
      .def("beta_integral", &GroundModel::beta_integral);

  py::class_<PointConfiguration>(m, "PointConfiguration")
      .def(py::init<>())
      .def(py::init<std::vector<double>>(), py::arg("points"))
      .def("__len__", &PointConfiguration::size)
      .def_property_readonly("points", &PointConfiguration::points)
      .def("contains", &PointConfiguration::contains, py::arg("t"));

  m.def("coverage_length", &coverage_length, py::arg("model"), py::arg("config"));
  m.def("log_density_unnorm", &log_density_unnorm, py::arg("model"), py::arg("config"));
  m.def("papangelou_ratio", &papangelou_ratio, py::arg("model"), py::arg("config"),
        py::arg("t"));
  m.def("interaction_log_phi", &interaction_log_phi, py::arg("model"), py::arg("subset"));
  m.def("hammersley_clifford_check", &hammersley_clifford_check, py::arg("model"),
        py::arg("config"));

  py::class_<MhOptions>(m, "MhOptions")
      .def(py::init<>())
      .def_readwrite("n_steps", &MhOptions::n_steps)
      .def_readwrite("burn_in", &MhOptions::burn_in)
      .def_readwrite("fixed_n", &MhOptions::fixed_n)
      .def_readwrite("trace_stride", &MhOptions::trace_stride)
      .def_readwrite("p_birth", &MhOptions::p_birth)
      .def_readwrite("p_death", &MhOptions::p_death);

  py::class_<MhTraceRow>(m, "MhTraceRow")
      .def_readonly("step", &MhTraceRow::step)
      .def_readonly("n_points", &MhTraceRow::n_points)
      .def_readonly("coverage", &MhTraceRow::coverage)
      .def_readonly("log_density", &MhTraceRow::log_density);

  py::class_<MhResult>(m, "MhResult")
      .def_readonly("config", &MhResult::config)
      .def_readonly("trace", &MhResult::trace)
      .def_readonly("accepted", &MhResult::accepted);

  m.def("sample_mh", &sample_mh, py::arg("model"), py::arg("options"), py::arg("rng"),
        py::arg("init") = PointConfiguration(), py::arg("observer") = MhObserver());

  py::class_<IntervalSet>(m, "IntervalSet")
      .def(py::init<std::vector<Mark>>(), py::arg("marks"))
      .def("__len__", &IntervalSet::size)
      .def_property_readonly("marks", &IntervalSet::marks)
      .def("atoms", &IntervalSet::atoms)
      .def("intervals", &IntervalSet::intervals)
      .def("atom_count", &IntervalSet::atom_count)
      .def("interval_count", &IntervalSet::interval_count)
      .def("total_interval_length", &IntervalSet::total_interval_length);

  py::class_<CensoringParams>(m, "CensoringParams")
      .def(py::init([](SemiMarkovKernel kernel, RenewalDensity renewal) {
             return CensoringParams{std::move(kernel), std::move(renewal)};
           }),
           py::arg("kernel"), py::arg("renewal"))
      .def_readonly("kernel", &CensoringParams::kernel)
      .def_readonly("renewal", &CensoringParams::renewal);

  m.def("delta_upper_bound", &delta_upper_bound, py::arg("kernel"));
  m.def("log_likelihood", &log_likelihood, py::arg("params"), py::arg("data"));
  m.def("homogeneous_log_likelihood", &homogeneous_log_likelihood, py::arg("rate"),
        py::arg("delta"), py::arg("data"));

  py::class_<HomogeneousFit>(m, "HomogeneousFit")
      .def_readonly("rate", &HomogeneousFit::rate)
      .def_readonly("delta", &HomogeneousFit::delta);
  m.def("fit_homogeneous", &fit_homogeneous, py::arg("data"));

  py::enum_<FitFamily>(m, "FitFamily")
      .value("HarmonicExponential", FitFamily::HarmonicExponential)
      .value("Weibull", FitFamily::Weibull)
      .value("Gamma", FitFamily::Gamma);

  py::class_<MleSpec>(m, "MleSpec")
      .def(py::init<>())
      .def_readwrite("family", &MleSpec::family)
      .def_readwrite("elevation", &MleSpec::elevation)
      .def_readwrite("frequency", &MleSpec::frequency)
      .def_readwrite("t0", &MleSpec::t0)
      .def_readwrite("horizon", &MleSpec::horizon)
      .def_readwrite("piece_breaks", &MleSpec::piece_breaks)
      .def_readwrite("init_rate", &MleSpec::init_rate)
      .def_readwrite("init_shape", &MleSpec::init_shape)
      .def_readwrite("init_deltas", &MleSpec::init_deltas);

  py::class_<OptimizerConfig>(m, "OptimizerConfig")
      .def(py::init<>())
      .def_readwrite("max_iters", &OptimizerConfig::max_iters)
      .def_readwrite("f_tol", &OptimizerConfig::f_tol)
      .def_readwrite("x_tol", &OptimizerConfig::x_tol)
      .def_readwrite("barrier_stages", &OptimizerConfig::barrier_stages);

  py::class_<FitReport>(m, "FitReport")
      .def_readonly("params", &FitReport::params)
      .def_readonly("loglik", &FitReport::loglik)
      .def_readonly("iters", &FitReport::iters)
      .def_readonly("active_constraints", &FitReport::active_constraints)
      .def_readonly("family", &FitReport::family)
      .def_readonly("shape", &FitReport::shape)
      .def_readonly("rate", &FitReport::rate)
      .def_readonly("deltas", &FitReport::deltas);

  m.def("fit_mle", &fit_mle, py::arg("data"), py::arg("spec"),
        py::arg("optimizer") = OptimizerConfig{});

  py::class_<ConditionalChainState>(m, "ConditionalChainState")
      .def_readonly("positions", &ConditionalChainState::positions);
  m.def("conditional_log_density", &conditional_log_density, py::arg("model"),
        py::arg("state"), py::arg("data"));
  m.def("sample_conditional", &sample_conditional, py::arg("model"), py::arg("data"),
        py::arg("n_steps"), py::arg("burn_in"), py::arg("rng"),
        py::arg("observer") = ConditionalObserver());

  m.def("read_interval_set_csv", &read_interval_set_csv, py::arg("path"));
  m.def("write_marks_csv", &write_marks_csv, py::arg("path"), py::arg("marks"));

  py::class_<ExperimentResult>(m, "ExperimentResult")
      .def_property_readonly("out_dir",
                             [](const ExperimentResult& r) { return r.out_dir.string(); })
      .def_readonly("outputs", &ExperimentResult::outputs)
      .def_property_readonly("fit", [](const ExperimentResult& r) { return r.fit; });

  m.def("default_experiment_config", &default_experiment_config, py::arg("name"));
  m.def(
      "run_experiment",
      [](const std::string& name, const std::string& config_json) {
        return run_experiment(name, parse_config_json(config_json));
      },
      py::arg("name"), py::arg("config_json"));
  m.def(
      "run_simulate",
      [](const std::string& config_json) { return run_simulate(parse_config_json(config_json)); },
      py::arg("config_json"));
  m.def(
      "run_fit",
      [](const std::string& config_json) { return run_fit(parse_config_json(config_json)); },
      py::arg("config_json"));
  m.def(
      "run_condition",
      [](const std::string& config_json) {
        return run_condition(parse_config_json(config_json));
      },
      py::arg("config_json"));
  m.def("merge_config_json", &merge_config_json, py::arg("base"), py::arg("override"));
}
