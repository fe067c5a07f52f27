#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "config.hpp"
#include "experiments.hpp"
#include "pin/continuum_psi.hpp"
#include "pin/disorder.hpp"
#include "pin/error.hpp"
#include "pin/freenergy.hpp"
#include "pin/partition.hpp"
#include "pin/renewal.hpp"
#include "pin/weakcoupling.hpp"

namespace py = pybind11;
using namespace pin;

namespace {

DisorderSample draw_disorder(const DisorderLaw& law, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  Rng rng(seed, stream);
  return sample_disorder(law, n, rng);
}

std::vector<double> table(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Disordered pinning model: renewal laws, partition functions, free energy and critical points";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);
  py::register_exception<DiagnosticError>(m, "DiagnosticError", PyExc_RuntimeError);

  py::class_<RenewalLaw>(m, "RenewalLaw")
      .def_property_readonly("alpha", &RenewalLaw::alpha)
      .def_property_readonly("n_max", &RenewalLaw::n_max)
      .def_property_readonly("heavy_tailed", &RenewalLaw::heavy_tailed)
      .def_property_readonly("C_alpha", &RenewalLaw::C_alpha)
      .def_property_readonly("mean_return_time", &RenewalLaw::mean_return_time)
      .def("K", &RenewalLaw::K, py::arg("n"))
      .def("u", &RenewalLaw::u, py::arg("n"))
      .def("tail", &RenewalLaw::tail, py::arg("n"))
      .def_property_readonly("K_table", [](const RenewalLaw& l) { return table(l.K_table()); })
      .def_property_readonly("u_table", [](const RenewalLaw& l) { return table(l.u_table()); })
      .def("__repr__", [](const RenewalLaw& l) { return "<RenewalLaw " + l.cache_key() + ">"; });

  m.def(
      "build_renewal",
      [](double alpha, const std::string& L, double L_param, std::size_t n_max) {
        return build_renewal(alpha, SlowlyVarying::from_key(L, L_param), n_max);
      },
      py::arg("alpha"), py::arg("L") = "const", py::arg("L_param") = 1.0, py::arg("n_max"),
      "K(n) proportional to L(n) / n^(1+alpha) on 1..n_max; L is \"const\" or \"logpow\".");
  m.def("deterministic_law", &deterministic_law, py::arg("n_max"));
  m.def("two_point_law", &two_point_law, py::arg("n_max"));
  m.def("intersection_law", &intersection_law, py::arg("law"), py::arg("n_max") = 0);
  m.def("renewal_residual", &renewal_residual, py::arg("law"));

  py::class_<DisorderLaw>(m, "DisorderLaw")
      .def_static("gaussian", &DisorderLaw::gaussian)
      .def_static("uniform", &DisorderLaw::uniform)
      .def_static("rademacher", &DisorderLaw::rademacher)
      .def_static("gamma_exp", &DisorderLaw::gamma_exp, py::arg("gamma"))
      .def_static("from_key", &DisorderLaw::from_key, py::arg("kind"), py::arg("gamma") = 1.5)
      .def_property_readonly("key", &DisorderLaw::key)
      .def("lambda_", &DisorderLaw::lambda, py::arg("beta"), "log E[exp(beta omega)]")
      .def("__repr__", [](const DisorderLaw& d) { return "<DisorderLaw " + d.key() + ">"; });

  py::class_<DisorderSample>(m, "DisorderSample")
      .def_readonly("omega", &DisorderSample::omega)
      .def("__len__", &DisorderSample::size);
  m.def("sample_disorder", &draw_disorder, py::arg("law"), py::arg("n"), py::arg("seed"), py::arg("stream") = 0,
        "Charges for sites 1..n drawn from the stream (seed, stream); omega[0] is unused.");

  m.def("log_z_constrained", &log_z_constrained, py::arg("law"), py::arg("omega"), py::arg("beta"),
        py::arg("lambda_"), py::arg("h"), py::arg("a"), py::arg("b"));
  m.def("log_z_free", &log_z_free, py::arg("law"), py::arg("omega"), py::arg("beta"), py::arg("lambda_"),
        py::arg("h"), py::arg("n"));
  m.def("brute_force_constrained", &brute_force_constrained, py::arg("law"), py::arg("omega"), py::arg("beta"),
        py::arg("lambda_"), py::arg("h"), py::arg("a"), py::arg("b"));
  m.def("brute_force_free", &brute_force_free, py::arg("law"), py::arg("omega"), py::arg("beta"),
        py::arg("lambda_"), py::arg("h"), py::arg("n"));
  m.def("log_psi", &log_psi, py::arg("law"), py::arg("delta"), py::arg("n"));
  m.def("log_psi_c", &log_psi_c, py::arg("law"), py::arg("delta"), py::arg("n"));

  m.def(
      "psi_hat", [](double nu, double delta_hat, double t, double tol) { return psi_hat(nu, delta_hat, t, tol).value; },
      py::arg("nu"), py::arg("delta_hat"), py::arg("t"), py::arg("tol") = 1e-8);
  m.def(
      "psi_hat_c",
      [](double nu, double delta_hat, double t, double tol) { return psi_hat_c(nu, delta_hat, t, tol).value; },
      py::arg("nu"), py::arg("delta_hat"), py::arg("t"), py::arg("tol") = 1e-8);

  py::class_<EnsembleEstimate>(m, "EnsembleEstimate")
      .def_readonly("beta_N", &EnsembleEstimate::beta_N)
      .def_readonly("h_N", &EnsembleEstimate::h_N)
      .def_readonly("log_free", &EnsembleEstimate::log_free)
      .def_readonly("log_constrained", &EnsembleEstimate::log_constrained);
  m.def("ensemble", &ensemble, py::arg("law"), py::arg("disorder"), py::arg("beta_hat"), py::arg("h_hat"),
        py::arg("t"), py::arg("N"), py::arg("replicas"), py::arg("seed"), py::arg("budget") = kNoBudget);

  py::class_<FreeEnergyEstimate>(m, "FreeEnergyEstimate")
      .def_readonly("beta", &FreeEnergyEstimate::beta)
      .def_readonly("h", &FreeEnergyEstimate::h)
      .def_readonly("N_list", &FreeEnergyEstimate::N_list)
      .def_readonly("F_N", &FreeEnergyEstimate::F_N)
      .def_readonly("std_error", &FreeEnergyEstimate::std_error)
      .def_readonly("F", &FreeEnergyEstimate::F)
      .def_readonly("F_raw", &FreeEnergyEstimate::F_raw);
  m.def(
      "free_energy",
      [](const RenewalLaw& law, const DisorderLaw& dis, double beta, double h, std::vector<std::size_t> N_list,
         std::size_t replicas, std::uint64_t seed, double budget) {
        return free_energy(law, dis, beta, h, N_list, replicas, seed, budget);
      },
      py::arg("law"), py::arg("disorder"), py::arg("beta"), py::arg("h"), py::arg("N_list"), py::arg("replicas"),
      py::arg("seed"), py::arg("budget") = kNoBudget);
  m.def("homogeneous_free_energy", &homogeneous_free_energy, py::arg("law"), py::arg("h"));

  py::class_<CriticalPoint>(m, "CriticalPoint")
      .def_readonly("beta", &CriticalPoint::beta)
      .def_readonly("h_c", &CriticalPoint::h_c)
      .def_readonly("ci_lo", &CriticalPoint::ci_lo)
      .def_readonly("ci_hi", &CriticalPoint::ci_hi)
      .def_readonly("evaluations", &CriticalPoint::evaluations)
      .def_readonly("rule", &CriticalPoint::rule);
  m.def(
      "critical_point",
      [](const RenewalLaw& law, const DisorderLaw& dis, double beta, std::size_t N, std::size_t replicas,
         std::uint64_t seed, double h_lo, double h_hi, double tol, bool expand, double budget) {
        CriticalSolver s;
        s.h_lo = h_lo;
        s.h_hi = h_hi;
        s.tol = tol;
        s.expand = expand;
        return critical_point(law, dis, beta, s, N, replicas, seed, budget);
      },
      py::arg("law"), py::arg("disorder"), py::arg("beta"), py::arg("N"), py::arg("replicas"), py::arg("seed"),
      py::arg("h_lo") = 0.0, py::arg("h_hi") = 1.0, py::arg("tol") = 1e-4, py::arg("expand") = true,
      py::arg("budget") = kNoBudget);

  m.def(
      "run_experiment",
      [](const std::string& experiment, const std::string& config_text, const std::filesystem::path& out_dir,
         std::optional<int> workers) {
        const auto parsed = cli::parse_config(config_text, experiment);
        if (!parsed.ok()) {
          std::string msg;
          for (const auto& e : parsed.errors) msg += e.str() + "\n";
          throw py::value_error(msg);
        }
        cli::RunOptions opts;
        opts.out_dir = out_dir;
        opts.workers = workers;
        std::ostringstream log;
        return cli::run(parsed.config, opts, log);
      },
      py::arg("experiment"), py::arg("config_text"), py::arg("out_dir"), py::arg("workers") = py::none(),
      "Runs an experiment as the command line tool does and returns its exit code.");
}
