#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gpmle/bench.hpp"
#include "gpmle/errors.hpp"
#include "gpmle/kernel.hpp"
#include "gpmle/likelihood.hpp"
#include "gpmle/linalg.hpp"
#include "gpmle/mle.hpp"
#include "gpmle/predict.hpp"
#include "gpmle/testbed.hpp"

namespace py = pybind11;
using namespace gpmle;

namespace {

Dataset make_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& z) {
  Dataset d;
  d.X = X;
  d.z = z;
  d.validate();
  return d;
}

SchemeConfig scheme_arg(const std::string& json_text) {
  return scheme_from_json(nlohmann::json::parse(json_text));
}

}  // namespace

PYBIND11_MODULE(_gpmle, m) {
  m.doc() = "Gaussian process maximum likelihood estimation";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", m.attr("Error").ptr());

  py::enum_<KernelFamily>(m, "KernelFamily")
      .value("SquaredExponential", KernelFamily::SquaredExponential)
      .value("RationalQuadratic", KernelFamily::RationalQuadratic)
      .value("Matern", KernelFamily::Matern);

  py::class_<KernelSpec>(m, "KernelSpec")
      .def_readonly("family", &KernelSpec::family)
      .def_readonly("nu", &KernelSpec::nu)
      .def_readonly("dim", &KernelSpec::dim)
      .def_static("squared_exponential", &KernelSpec::squared_exponential, py::arg("dim"))
      .def_static("rational_quadratic", &KernelSpec::rational_quadratic, py::arg("dim"), py::arg("nu") = 1.0)
      .def_static("matern", &KernelSpec::matern, py::arg("dim"), py::arg("nu") = 2.5);

  py::class_<ParamVector>(m, "ParamVector")
      .def(py::init([](double variance, Eigen::VectorXd ranges, double noise_variance, double mean) {
             ParamVector p;
             p.variance = variance;
             p.ranges = std::move(ranges);
             p.noise_variance = noise_variance;
             p.mean = mean;
             return p;
           }),
           py::arg("variance"), py::arg("ranges"), py::arg("noise_variance") = 0.0, py::arg("mean") = 0.0)
      .def_readwrite("variance", &ParamVector::variance)
      .def_readwrite("ranges", &ParamVector::ranges)
      .def_readwrite("noise_variance", &ParamVector::noise_variance)
      .def_readwrite("mean", &ParamVector::mean)
      .def("__repr__", [](const ParamVector& p) { return params_to_json(p).dump(); });

  m.def(
      "nll",
      [](const KernelSpec& spec, const ParamVector& p, const Eigen::MatrixXd& X, const Eigen::VectorXd& z) {
        return nll(spec, p, make_data(X, z));
      },
      py::arg("spec"), py::arg("params"), py::arg("X"), py::arg("z"));
  m.def(
      "nll_grad",
      [](const KernelSpec& spec, const ParamVector& p, const Eigen::MatrixXd& X, const Eigen::VectorXd& z,
         const std::string& reparam) {
        const Dataset data = make_data(X, z);
        const Reparam rp = reparam == "log" ? Reparam::log()
                                            : make_reparam(ReparamChoice::InvSoftplus, data, false);
        const auto vg = nll_grad(spec, p, data, rp);
        return py::make_tuple(vg.value, vg.grad, vg.grad_natural);
      },
      py::arg("spec"), py::arg("params"), py::arg("X"), py::arg("z"), py::arg("reparam") = "log",
      "Returns (value, gradient over [tau(sigma^2), tau(rho)..., mu], natural gradient).");
  m.def(
      "profile_mean_var",
      [](const KernelSpec& spec, const Eigen::VectorXd& ranges, double alpha, const Eigen::MatrixXd& X,
         const Eigen::VectorXd& z) {
        const auto r = profile_mean_var(spec, ranges, alpha, make_data(X, z));
        return py::make_tuple(r.mean, r.variance);
      },
      py::arg("spec"), py::arg("ranges"), py::arg("alpha"), py::arg("X"), py::arg("z"));
  m.def(
      "conditioning",
      [](const Eigen::MatrixXd& K) {
        const auto r = conditioning_report(K);
        return py::make_tuple(r.kappa, r.kappa_logdet);
      },
      py::arg("K"), "Returns (kappa, kappa_logdet).");

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("params", &FitResult::params)
      .def_readonly("nll", &FitResult::nll)
      .def_property_readonly("termination", [](const FitResult& r) { return to_string(r.termination); })
      .def_readonly("best_run", &FitResult::best_run)
      .def_readonly("n_nll_evals", &FitResult::n_nll_evals)
      .def_readonly("wall_time", &FitResult::wall_time)
      .def_property_readonly("n_runs", [](const FitResult& r) { return r.runs.size(); });

  m.def(
      "fit",
      [](const std::string& scheme_json, const KernelSpec& spec, const Eigen::MatrixXd& X,
         const Eigen::VectorXd& z) {
        const SchemeConfig s = scheme_arg(scheme_json);
        const Dataset data = make_data(X, z);
        py::gil_scoped_release release;
        return fit(s, spec, data);
      },
      py::arg("scheme_json"), py::arg("spec"), py::arg("X"), py::arg("z"));

  py::class_<FittedGP>(m, "FittedGP")
      .def(py::init([](const KernelSpec& spec, const ParamVector& p, const Eigen::MatrixXd& X,
                       const Eigen::VectorXd& z) { return FittedGP(spec, p, make_data(X, z)); }),
           py::arg("spec"), py::arg("params"), py::arg("X"), py::arg("z"))
      .def_property_readonly("jitter_used", &FittedGP::jitter_used)
      .def("mean", [](const FittedGP& gp, const Eigen::MatrixXd& X) { return posterior_mean_at(gp, X); })
      .def("variance",
           [](const FittedGP& gp, const Eigen::MatrixXd& X) {
             Eigen::VectorXd v(X.rows());
             for (Eigen::Index i = 0; i < X.rows(); ++i) v[i] = posterior_variance(gp, X.row(i).transpose());
             return v;
           })
      .def("ermspe", &ermspe, py::arg("X"), py::arg("z"))
      .def("interp_error", &normalized_interp_error);

  m.def("function_names", &function_names);
  m.def(
      "evaluate",
      [](const std::string& name, const Eigen::MatrixXd& X) {
        const TestFunction& fn = get_function(name);
        Eigen::VectorXd z(X.rows());
        for (Eigen::Index i = 0; i < X.rows(); ++i) z[i] = evaluate(fn, X.row(i).transpose());
        return z;
      },
      py::arg("name"), py::arg("X"));
  m.def(
      "corpus_dataset",
      [](const std::string& id, std::uint64_t data_seed) {
        const Dataset d = make_corpus_dataset(corpus_entry(id), data_seed);
        return py::make_tuple(d.X, d.z);
      },
      py::arg("id"), py::arg("data_seed") = 0);
  m.def("corpus_ids", [] {
    std::vector<std::string> ids;
    for (const auto& e : available_corpus()) ids.push_back(e.id());
    return ids;
  });
  m.def(
      "preset",
      [](const std::string& name) { return scheme_to_json(preset(name)).dump(); }, py::arg("name"),
      "JSON text of a preset scheme.");
  m.def(
      "area_under_ecdf",
      [](const std::string& results_csv_text, const std::string& scheme, const std::string& reference,
         double nll_max) {
        return area_under_ecdf(ecdf_of_differences(parse_results_csv(results_csv_text), scheme, reference),
                               nll_max);
      },
      py::arg("results_csv"), py::arg("scheme"), py::arg("reference"), py::arg("nll_max") = 100.0);
}
