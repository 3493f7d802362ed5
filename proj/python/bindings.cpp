#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>
#include <string>
#include <vector>

#include "oscint/bessel.hpp"
#include "oscint/error.hpp"
#include "oscint/harness.hpp"

namespace py = pybind11;
using namespace oscint;

namespace {

Rule rule_arg(const std::string& name) { return parse_rule(name); }

py::dict dataset_dict(const Dataset& ds) {
  std::vector<std::vector<double>> params, inputs;
  std::vector<double> truths;
  for (const Sample& s : ds.samples) {
    params.push_back(s.params.values);
    inputs.push_back(s.inputs);
    truths.push_back(s.truth);
  }
  py::dict d;
  d["family"] = std::string(to_string(ds.family));
  d["s1"] = ds.domain.s1;
  d["s2"] = ds.domain.s2;
  d["n_in"] = ds.n_in;
  d["seed"] = ds.seed;
  d["params"] = params;
  d["inputs"] = inputs;
  d["truths"] = truths;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Neural and Newton-Cotes integration of oscillatory functions";

  py::register_exception<Error>(m, "OscintError", PyExc_RuntimeError);

  m.def("flop_cost", [](const std::string& rule, std::uint64_t n_q) { return flop_cost(rule_arg(rule), n_q); },
        py::arg("rule"), py::arg("n_q"));
  m.def(
      "nn_flops",
      [](std::uint64_t neurons, std::uint64_t hidden_layers, std::uint64_t n_q, const std::string& mode) {
        if (mode != "paper" && mode != "exact") throw Error(ErrorCode::InvalidArgument, "mode is 'paper' or 'exact'");
        return nn_flops(neurons, hidden_layers, n_q, mode == "paper" ? FlopMode::Paper : FlopMode::Exact);
      },
      py::arg("neurons"), py::arg("hidden_layers"), py::arg("n_q"), py::arg("mode") = "paper");
  m.def("memory_bytes", &memory_bytes, py::arg("neurons"), py::arg("layers"));

  m.def(
      "make_grid",
      [](const std::string& rule, double s1, double s2, int n_q) { return make_grid(rule_arg(rule), s1, s2, n_q).abscissae; },
      py::arg("rule"), py::arg("s1"), py::arg("s2"), py::arg("n_q"));
  m.def(
      "integrate_values",
      [](const std::string& rule, const std::vector<double>& values, double dx) {
        return integrate(rule_arg(rule), values, dx);
      },
      py::arg("rule"), py::arg("values"), py::arg("dx"));
  m.def(
      "integrate",
      [](const std::string& rule, const std::function<double(double)>& f, double s1, double s2, int n_q) {
        return integrate(rule_arg(rule), f, s1, s2, n_q);
      },
      py::arg("rule"), py::arg("f"), py::arg("s1"), py::arg("s2"), py::arg("n_q"));

  m.def("bessel_j0", &bessel_j0, py::arg("x"));
  m.def(
      "eval",
      [](const std::string& family, const std::vector<double>& params, double x) {
        const Family f = parse_family(family);
        return eval(f, ParamVector{f, params}, x);
      },
      py::arg("family"), py::arg("params"), py::arg("x"));
  m.def(
      "surrogate_truth",
      [](const std::string& family, const std::vector<double>& params, double s1, double s2) {
        const Family f = parse_family(family);
        IntegrandSpec spec = IntegrandSpec::defaults(f);
        spec.domain = {s1, s2};
        return surrogate_truth(spec, ParamVector{f, params});
      },
      py::arg("family"), py::arg("params"), py::arg("s1") = 0.0, py::arg("s2") = 1.0);
  m.def(
      "build_dataset",
      [](const std::string& family, std::size_t m, int n_in, std::uint64_t seed, double s1, double s2) {
        return dataset_dict(build_dataset(parse_family(family), m, n_in, Domain{s1, s2}, seed));
      },
      py::arg("family"), py::arg("m"), py::arg("n_in"), py::arg("seed"), py::arg("s1") = 0.0, py::arg("s2") = 1.0);

  m.def("normalized_mse", [](const std::vector<double>& p, const std::vector<double>& t) { return normalized_mse(p, t); },
        py::arg("predictions"), py::arg("truths"));
  m.def("alpha", &alpha, py::arg("flops_nn"), py::arg("flops_qm"));

  m.def(
      "rp_solve",
      [](double rho, double rtol, double atol) {
        RpConfig cfg;
        cfg.rho = rho;
        cfg.rtol = rtol;
        cfg.atol = atol;
        const RpTrajectory t = rp_solve(cfg);
        py::dict d;
        d["t"] = t.times;
        d["R"] = t.radii;
        d["V"] = t.radial_velocities;
        d["radius_integral"] = t.radius_integral;
        d["rejected_steps"] = t.rejected_steps;
        return d;
      },
      py::arg("rho") = 750.0, py::arg("rtol") = 1e-8, py::arg("atol") = 1e-12);

  m.def(
      "train",
      [](const std::string& family, std::size_t m, int n_in, int hidden_layers, int neurons, std::uint64_t seed,
         int max_epochs) {
        const Family f = parse_family(family);
        const Dataset ds = build_dataset(f, m, n_in, Domain{}, seed);
        const SplitDataset parts = split(ds, SplitRatios{}, derive_seed(seed, "split"));
        TrainConfig tc;
        tc.seed = seed;
        tc.max_epochs = max_epochs;
        const TrainResult r = train(init({n_in, hidden_layers, neurons}, seed), parts, tc);
        std::vector<double> truths;
        for (const Sample& s : parts.test.samples) truths.push_back(s.truth);
        py::dict d;
        d["epochs"] = r.report.epochs_run;
        d["train_nmse"] = r.report.final_train_nmse;
        d["val_nmse"] = r.report.final_val_nmse;
        d["test_nmse"] = normalized_mse(predict(r.net, parts.test), truths);
        return d;
      },
      py::arg("family"), py::arg("m"), py::arg("n_in"), py::arg("hidden_layers"), py::arg("neurons"),
      py::arg("seed") = 0, py::arg("max_epochs") = 20000);

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"oscint"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int rc = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(rc, out.str(), err.str());
      },
      py::arg("args"));
}
