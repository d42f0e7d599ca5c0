// Python bindings for the core operations: families, normal forms, the
// second-order predictors, the adjoint computations and the Monte Carlo
// estimators.

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spslab/adjoint.hpp"
#include "spslab/models.hpp"
#include "spslab/montecarlo.hpp"
#include "spslab/normal_form.hpp"
#include "spslab/perturbation.hpp"

namespace py = pybind11;
using namespace spslab;

namespace {

using List2 = std::array<std::array<double, 2>, 2>;
using List3 = std::array<std::array<double, 3>, 3>;

Mat2r to_mat2(const List2& m) {
  return {m[0][0], m[0][1], m[1][0], m[1][1]};
}
List2 from_mat2(const Mat2r& m) { return {{{m.a, m.b}, {m.c, m.d}}}; }
List3 from_mat3(const Mat3r& m) {
  List3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[std::size_t(i)][std::size_t(j)] = m(i, j);
  return out;
}

AndersonSpec make_anderson_spec(
    double energy, const std::string& disorder, double a,
    const std::vector<std::pair<double, double>>& values, int nodes) {
  AndersonSpec spec;
  spec.energy = energy;
  spec.a = a;
  spec.quadrature_nodes = nodes;
  if (disorder == "two_point") {
    spec.disorder = AndersonSpec::Disorder::two_point;
  } else if (disorder == "uniform") {
    spec.disorder = AndersonSpec::Disorder::uniform;
  } else if (disorder == "values") {
    spec.disorder = AndersonSpec::Disorder::values;
    for (const auto& [v, w] : values) spec.values.push_back({v, w});
  } else {
    throw std::invalid_argument("disorder must be two_point|uniform|values");
  }
  return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "transfer-matrix criticality laboratory";
  m.attr("__version__") = "0.1.0";

  py::class_<Mat2r>(m, "Mat2")
      .def(py::init([](double a, double b, double c, double d) {
             return Mat2r{a, b, c, d};
           }),
           py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"))
      .def(py::init([](const List2& rows) { return to_mat2(rows); }))
      .def_static("identity", &Mat2r::identity)
      .def_readwrite("a", &Mat2r::a)
      .def_readwrite("b", &Mat2r::b)
      .def_readwrite("c", &Mat2r::c)
      .def_readwrite("d", &Mat2r::d)
      .def("det", &Mat2r::det)
      .def("trace", &Mat2r::trace)
      .def("to_list", [](const Mat2r& x) { return from_mat2(x); })
      .def("__matmul__", [](const Mat2r& x, const Mat2r& y) { return x * y; })
      .def("__repr__", [](const Mat2r& x) {
        return "Mat2([[" + std::to_string(x.a) + ", " + std::to_string(x.b) +
               "], [" + std::to_string(x.c) + ", " + std::to_string(x.d) +
               "]])";
      });

  m.def("rotation", &rotation, py::arg("eta"));
  m.def("exp_sl2", &exp_sl2, py::arg("a"), py::arg("trace_tol") = 1e-10);
  m.def("log_elliptic", &log_elliptic, py::arg("t"), py::arg("tol") = 1e-10);
  m.def(
      "check_sl2r",
      [](const Mat2r& t, double tol) { return check_sl2r(t, tol); },
      py::arg("t"), py::arg("tol") = 1e-10);
  m.def(
      "check_u11",
      [](const std::array<std::array<cplx, 2>, 2>& t, double tol) {
        return check_u11(Mat2c(t[0][0], t[0][1], t[1][0], t[1][1]), tol);
      },
      py::arg("t"), py::arg("tol") = 1e-10);

  // families and normal forms
  py::class_<Realization>(m, "Realization")
      .def(py::init([](double weight, const Mat2r& t0, const Mat2r& t1,
                       const Mat2r& t2) {
             Realization r;
             r.weight = weight;
             r.T0 = t0;
             r.T1 = t1;
             r.T2 = t2;
             return r;
           }),
           py::arg("weight"), py::arg("T0"), py::arg("T1"),
           py::arg("T2") = Mat2r::zero())
      .def_readwrite("weight", &Realization::weight)
      .def_readwrite("T0", &Realization::T0);

  py::class_<CriticalFamily>(m, "CriticalFamily")
      .def(py::init<>())
      .def_readwrite("realizations", &CriticalFamily::realizations);

  py::class_<CriticalDiagnostics>(m, "CriticalDiagnostics")
      .def_readonly("ok", &CriticalDiagnostics::pass)
      .def_readonly("max_commutator", &CriticalDiagnostics::max_commutator)
      .def_readonly("max_abs_trace", &CriticalDiagnostics::max_abs_trace)
      .def_readonly("eta_moments", &CriticalDiagnostics::eta_moments)
      .def_readonly("resonant", &CriticalDiagnostics::resonant)
      .def_readonly("failure", &CriticalDiagnostics::failure);

  py::class_<NormalFormEntry>(m, "NormalFormEntry")
      .def_readonly("weight", &NormalFormEntry::weight)
      .def_readonly("eta", &NormalFormEntry::eta)
      .def_readonly("sign", &NormalFormEntry::sign)
      .def_readonly("P", &NormalFormEntry::P)
      .def_readonly("Q", &NormalFormEntry::Q)
      .def_readonly("beta", &NormalFormEntry::beta);

  py::class_<NormalForm>(m, "NormalForm")
      .def_readonly("M", &NormalForm::M)
      .def_readonly("entries", &NormalForm::entries)
      .def_readonly("fd_residual", &NormalForm::fd_residual);

  m.def("verify_critical", &verify_critical, py::arg("family"),
        py::arg("tol") = 1e-9);
  m.def("elliptic_conjugator", &elliptic_conjugator, py::arg("t0"),
        py::arg("tol") = 1e-9);
  m.def("extract_normal_form", &extract_normal_form, py::arg("family"));
  m.def("coupling_beta", &coupling_beta, py::arg("p"));

  // model constructors
  py::class_<AndersonModel>(m, "AndersonModel")
      .def_readonly("k", &AndersonModel::k)
      .def_readonly("family", &AndersonModel::family)
      .def_readonly("closed_form_M", &AndersonModel::closed_form_M)
      .def_readonly("expected", &AndersonModel::expected)
      .def_readonly("m2", &AndersonModel::m2)
      .def_readonly("m4", &AndersonModel::m4);

  m.def(
      "anderson_family",
      [](double energy, const std::string& disorder, double a,
         const std::vector<std::pair<double, double>>& values, int nodes) {
        return anderson_family(
            make_anderson_spec(energy, disorder, a, values, nodes));
      },
      py::arg("energy"), py::arg("disorder") = "two_point", py::arg("a") = 1.0,
      py::arg("values") = std::vector<std::pair<double, double>>{},
      py::arg("nodes") = 21);

  m.def(
      "synthetic_family",
      [](const std::vector<std::tuple<double, double, Mat2r, Mat2r>>&
             entries) {
        SyntheticSpec spec;
        for (const auto& [w, eta, p, q] : entries)
          spec.entries.push_back({w, eta, p, q});
        return synthetic_family(spec);
      },
      py::arg("entries"));

  // predictors
  py::enum_<VanishingCase>(m, "VanishingCase")
      .value("positive", VanishingCase::positive)
      .value("case_i", VanishingCase::case_i)
      .value("case_ii", VanishingCase::case_ii);

  py::class_<ExponentPrediction>(m, "ExponentPrediction")
      .def_readonly("gamma", &ExponentPrediction::gamma)
      .def_readonly("sigma", &ExponentPrediction::sigma)
      .def_readonly("landauer", &ExponentPrediction::landauer)
      .def_readonly("D", &ExponentPrediction::D)
      .def_readonly("sigma_valid", &ExponentPrediction::sigma_valid);

  py::class_<AndersonOrders>(m, "AndersonOrders")
      .def_readonly("gamma2", &AndersonOrders::gamma2)
      .def_readonly("gamma4_coeff", &AndersonOrders::gamma4_coeff)
      .def_readonly("sigma2", &AndersonOrders::sigma2)
      .def_readonly("sigma4_coeff", &AndersonOrders::sigma4_coeff)
      .def_readonly("gamma", &AndersonOrders::gamma)
      .def_readonly("sigma", &AndersonOrders::sigma)
      .def_readonly("gamma_minus_sigma", &AndersonOrders::gamma_minus_sigma);

  py::class_<QuadraticFormMatrix>(m, "QuadraticFormMatrix")
      .def_readonly("q", &QuadraticFormMatrix::q)
      .def_readonly("det", &QuadraticFormMatrix::det)
      .def_readonly("min_eigenvalue", &QuadraticFormMatrix::min_eigenvalue);

  m.def("coefficient_D", &coefficient_D, py::arg("nf"));
  m.def("classify_vanishing", &classify_vanishing, py::arg("nf"),
        py::arg("tol") = 1e-9);
  m.def("predict_exponents", &predict_exponents, py::arg("nf"),
        py::arg("lam"));
  m.def("mu3_expansion", &mu3_expansion, py::arg("nf"), py::arg("lam"));
  m.def(
      "predict_phase_moment",
      [](const NormalForm& nf, double lam, int j) {
        const auto p = predict_phase_moment(nf, lam, j);
        return std::make_pair(p.value, p.error_order);
      },
      py::arg("nf"), py::arg("lam"), py::arg("j") = 1);
  m.def(
      "predict_correlation_sum",
      [](const NormalForm& nf, double theta0, double eta1) {
        const auto p = predict_correlation_sum(nf, theta0, eta1);
        return std::make_pair(p.j1, p.gamma_sum_slope);
      },
      py::arg("nf"), py::arg("theta0"), py::arg("eta1"));
  m.def("anderson_orders", &anderson_orders, py::arg("k"), py::arg("m2"),
        py::arg("m4"), py::arg("lam"));
  m.def("quadratic_form_matrix", &quadratic_form_matrix, py::arg("psi1"),
        py::arg("psi2"));

  // adjoint representation
  m.def("adjoint_rep",
        [](const Mat2r& t) { return from_mat3(adjoint_rep(t)); });
  m.def("ad_small", [](const Mat2r& p) { return from_mat3(ad_small(p)); });
  m.def("ad_small_squared",
        [](const Mat2r& p) { return from_mat3(ad_small_squared(p)); });
  m.def(
      "g_map", [](cplx w1, cplx w2) { return g_map({w1, w2}); },
      py::arg("w1"), py::arg("w2"));
  m.def("landauer_resistance_exact", &landauer_resistance_exact, py::arg("nf"),
        py::arg("lam"), py::arg("n"));

  py::class_<LandauerExact>(m, "LandauerExact")
      .def_readonly("gammahat", &LandauerExact::gammahat)
      .def_readonly("mu3", &LandauerExact::mu3)
      .def_readonly("mu1", &LandauerExact::mu1)
      .def_readonly("mu2", &LandauerExact::mu2)
      .def_readonly("finite_n_residual", &LandauerExact::finite_n_residual);
  m.def("landauer_exponent_exact", &landauer_exponent_exact, py::arg("nf"),
        py::arg("lam"));

  // Monte Carlo engine
  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("steps", &RunConfig::steps)
      .def_readwrite("ensemble", &RunConfig::ensemble)
      .def_readwrite("burn_in", &RunConfig::burn_in)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("renorm_every", &RunConfig::renorm_every)
      .def_readwrite("theta0", &RunConfig::theta0)
      .def_readwrite("threads", &RunConfig::threads);

  py::class_<Estimate>(m, "Estimate")
      .def_readonly("value", &Estimate::value)
      .def_readonly("se", &Estimate::se)
      .def_readonly("count", &Estimate::count)
      .def_readonly("flagged", &Estimate::flagged)
      .def_readonly("note", &Estimate::note)
      .def("__repr__", [](const Estimate& e) {
        return "Estimate(" + std::to_string(e.value) + " +- " +
               std::to_string(e.se) + ")";
      });

  py::class_<ComplexEstimate>(m, "ComplexEstimate")
      .def_readonly("value", &ComplexEstimate::value)
      .def_readonly("se_re", &ComplexEstimate::se_re)
      .def_readonly("se_im", &ComplexEstimate::se_im)
      .def_readonly("count", &ComplexEstimate::count);

  m.def("phase_step", &phase_step, py::arg("nf"), py::arg("sigma"),
        py::arg("lam"), py::arg("theta"));
  m.def(
      "phase_orbit",
      [](const NormalForm& nf, double lam, const RunConfig& cfg,
         std::uint64_t chain) {
        return phase_orbit(make_chain_model(nf, lam), cfg, chain);
      },
      py::arg("nf"), py::arg("lam"), py::arg("cfg"), py::arg("chain") = 0);
  m.def(
      "estimate_lyapunov",
      [](const NormalForm& nf, double lam, const RunConfig& cfg) {
        return estimate_lyapunov(nf, lam, cfg);
      },
      py::arg("nf"), py::arg("lam"), py::arg("cfg"));
  m.def(
      "estimate_variance",
      [](const NormalForm& nf, double lam, const RunConfig& cfg) {
        return estimate_variance(nf, lam, cfg);
      },
      py::arg("nf"), py::arg("lam"), py::arg("cfg"));
  m.def(
      "replica_log_norms",
      [](const NormalForm& nf, double lam, const RunConfig& cfg) {
        return replica_log_norms(make_chain_model(nf, lam), cfg);
      },
      py::arg("nf"), py::arg("lam"), py::arg("cfg"));
  m.def(
      "estimate_phase_moment",
      [](const NormalForm& nf, double lam, int j, const RunConfig& cfg) {
        return estimate_phase_moment(nf, lam, j, cfg);
      },
      py::arg("nf"), py::arg("lam"), py::arg("j"), py::arg("cfg"));
  m.def(
      "estimate_landauer_mc",
      [](const NormalForm& nf, double lam, long n, long ensemble,
         std::uint64_t seed, int threads) {
        return estimate_landauer_mc(nf, lam, n, ensemble, seed, threads);
      },
      py::arg("nf"), py::arg("lam"), py::arg("n"), py::arg("ensemble"),
      py::arg("seed") = 0, py::arg("threads") = 1);

  py::class_<CorrelationEstimate::Stratum>(m, "CorrelationStratum")
      .def_readonly("eta1", &CorrelationEstimate::Stratum::eta1)
      .def_readonly("weight", &CorrelationEstimate::Stratum::weight)
      .def_readonly("est", &CorrelationEstimate::Stratum::est);
  py::class_<CorrelationEstimate>(m, "CorrelationEstimate")
      .def_readonly("total", &CorrelationEstimate::total)
      .def_readonly("m_max", &CorrelationEstimate::m_max)
      .def_readonly("fitted_rate", &CorrelationEstimate::fitted_rate)
      .def_readonly("tail_bound", &CorrelationEstimate::tail_bound)
      .def_readonly("converged", &CorrelationEstimate::converged)
      .def_readonly("strata", &CorrelationEstimate::strata);
  m.def("estimate_correlation_sum", &estimate_correlation_sum, py::arg("nf"),
        py::arg("lam"), py::arg("j"), py::arg("theta0"), py::arg("cfg"));

  py::class_<EnumerationResult>(m, "EnumerationResult")
      .def_readonly("mean_log_norm", &EnumerationResult::mean_log_norm)
      .def_readonly("var_log_norm", &EnumerationResult::var_log_norm)
      .def_readonly("mean_trace", &EnumerationResult::mean_trace)
      .def_readonly("mean_phase_avg_j1", &EnumerationResult::mean_phase_avg_j1)
      .def_readonly("mean_phase_avg_j2",
                    &EnumerationResult::mean_phase_avg_j2);
  m.def(
      "enumerate_exact",
      [](const NormalForm& nf, double lam, long n, double theta0) {
        return enumerate_exact(make_chain_model(nf, lam), n, theta0);
      },
      py::arg("nf"), py::arg("lam"), py::arg("n"), py::arg("theta0") = 0.0);
}
