#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mqrif/contour.hpp"
#include "mqrif/errors.hpp"
#include "mqrif/regression.hpp"
#include "mqrif/rif.hpp"
#include "mqrif/solver.hpp"
#include "mqrif/tuning.hpp"

namespace py = pybind11;

namespace {

Eigen::VectorXd direction_or_default(
    const std::optional<Eigen::VectorXd>& direction, Eigen::Index p) {
  if (direction) return *direction;
  return Eigen::VectorXd::Ones(p);
}

mqrif::MQuantileSpec make_spec(double tau,
                               const std::optional<Eigen::VectorXd>& direction,
                               Eigen::Index p, double c, double delta) {
  return mqrif::MQuantileSpec(tau, direction_or_default(direction, p),
                              mqrif::HuberParams{c, delta});
}

mqrif::SplineConfig make_spline(int degree, int interior_knots,
                                const std::vector<int>& covariates) {
  mqrif::SplineConfig cfg;
  cfg.degree = degree;
  cfg.interior_knots = interior_knots;
  cfg.covariate_indices = covariates;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_mqrif, m) {
  m.doc() = "Directional M-quantiles and partial effects via influence "
            "function regression";

  // Base first: translators run newest first, so the subclasses below take
  // precedence over this catch-all.
  py::register_exception<mqrif::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<mqrif::InvalidArgument>(m, "InvalidArgument",
                                                 PyExc_ValueError);
  py::register_exception<mqrif::DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<mqrif::SingularMatrixError>(m, "SingularMatrixError",
                                                     PyExc_RuntimeError);
  py::register_exception<mqrif::ConvergenceError>(m, "ConvergenceError",
                                                  PyExc_RuntimeError);

  py::class_<mqrif::MQuantileFit>(m, "Fit")
      .def_readonly("theta", &mqrif::MQuantileFit::theta)
      .def_readonly("converged", &mqrif::MQuantileFit::converged)
      .def_readonly("iterations", &mqrif::MQuantileFit::iterations)
      .def_readonly("eq_norm", &mqrif::MQuantileFit::eq_norm)
      .def_property_readonly(
          "tau", [](const mqrif::MQuantileFit& f) { return f.spec.tau; })
      .def_property_readonly(
          "c", [](const mqrif::MQuantileFit& f) { return f.spec.huber.c; })
      .def_property_readonly(
          "direction", [](const mqrif::MQuantileFit& f) { return f.spec.u; })
      .def("__repr__", [](const mqrif::MQuantileFit& f) {
        return "Fit(tau=" + std::to_string(f.spec.tau) +
               ", c=" + std::to_string(f.spec.huber.c) +
               ", converged=" + (f.converged ? "True" : "False") + ")";
      });

  py::class_<mqrif::UpeFit>(m, "PartialEffects")
      .def_readonly("alpha", &mqrif::UpeFit::alpha)
      .def_readonly("se", &mqrif::UpeFit::se)
      .def_readonly("v_hat", &mqrif::UpeFit::v_hat)
      .def_readonly("method", &mqrif::UpeFit::method)
      .def_readonly("collapsed_knots", &mqrif::UpeFit::collapsed_knots);

  py::class_<mqrif::CvResult>(m, "CvResult")
      .def_readonly("grid", &mqrif::CvResult::grid)
      .def_readonly("cv_scores", &mqrif::CvResult::cv_scores)
      .def_readonly("valid", &mqrif::CvResult::valid)
      .def_readonly("c_star", &mqrif::CvResult::c_star)
      .def_readonly("k_folds", &mqrif::CvResult::k_folds)
      .def_readonly("fold_assignment", &mqrif::CvResult::fold_assignment)
      .def_readonly("n_failed_fits", &mqrif::CvResult::n_failed_fits)
      .def_readonly("seed", &mqrif::CvResult::seed);

  py::class_<mqrif::BootstrapResult>(m, "BootstrapResult")
      .def_readonly("lower", &mqrif::BootstrapResult::lower)
      .def_readonly("upper", &mqrif::BootstrapResult::upper)
      .def_readonly("estimate", &mqrif::BootstrapResult::estimate)
      .def_readonly("se_boot", &mqrif::BootstrapResult::se_boot)
      .def_readonly("b_total", &mqrif::BootstrapResult::b_total)
      .def_readonly("n_failed", &mqrif::BootstrapResult::n_failed)
      .def_readonly("level", &mqrif::BootstrapResult::level)
      .def_readonly("seed", &mqrif::BootstrapResult::seed);

  py::class_<mqrif::ContourSet>(m, "Contour")
      .def_readonly("tau", &mqrif::ContourSet::tau)
      .def_readonly("c", &mqrif::ContourSet::c)
      .def_readonly("directions", &mqrif::ContourSet::directions)
      .def_readonly("vertices", &mqrif::ContourSet::vertices)
      .def_readonly("converged", &mqrif::ContourSet::converged)
      .def_readonly("seed", &mqrif::ContourSet::seed);

  py::class_<mqrif::NestingReport>(m, "NestingReport")
      .def_readonly("nested", &mqrif::NestingReport::nested)
      .def_readonly("violations", &mqrif::NestingReport::violations);

  py::class_<mqrif::LinearityTest>(m, "LinearityTest")
      .def_readonly("statistic", &mqrif::LinearityTest::statistic)
      .def_readonly("approx_p", &mqrif::LinearityTest::approx_p)
      .def_readonly("f_stat", &mqrif::LinearityTest::f_stat)
      .def_readonly("df1", &mqrif::LinearityTest::df1)
      .def_readonly("df2", &mqrif::LinearityTest::df2)
      .def_readonly("added_columns", &mqrif::LinearityTest::added_columns);

  m.def(
      "fit",
      [](const Eigen::MatrixXd& Y, double tau,
         const std::optional<Eigen::VectorXd>& direction, double c,
         double delta, int max_iter, double tol) {
        mqrif::IrlsOptions opts;
        opts.max_iter = max_iter;
        opts.tol = tol;
        return mqrif::fit_unconditional(
            Y, make_spec(tau, direction, Y.cols(), c, delta), opts);
      },
      py::arg("Y"), py::arg("tau") = 0.5, py::arg("direction") = py::none(),
      py::arg("c") = 1.0, py::arg("delta") = 1.0, py::arg("max_iter") = 200,
      py::arg("tol") = 1e-8,
      "Fit the directional M-quantile of the rows of Y.  The direction "
      "defaults to the equal weights vector; c = 0 gives the quantile "
      "target, large c the expectile target.");

  m.def(
      "rif",
      [](const Eigen::MatrixXd& Y, const mqrif::MQuantileFit& fit) {
        return mqrif::influence(Y, fit).rif;
      },
      py::arg("Y"), py::arg("fit"),
      "Recentered influence values at the fitted target, one row per "
      "observation.");

  m.def(
      "partial_effects",
      [](const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
         const mqrif::MQuantileFit& fit, bool inference) {
        mqrif::UpeFit upe = mqrif::umqpe_linear(Y, X, fit);
        if (inference) mqrif::attach_asymptotic_inference(upe, Y, X, fit);
        return upe;
      },
      py::arg("Y"), py::arg("X"), py::arg("fit"), py::arg("inference") = true,
      "Linear influence regression of the target on the design, with "
      "asymptotic standard errors unless inference=False.");

  m.def(
      "partial_effects_spline",
      [](const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
         const mqrif::MQuantileFit& fit, int degree, int interior_knots,
         const std::vector<int>& covariates) {
        return mqrif::umqpe_splines(
            Y, X, fit, make_spline(degree, interior_knots, covariates));
      },
      py::arg("Y"), py::arg("X"), py::arg("fit"), py::arg("degree") = 3,
      py::arg("interior_knots") = 5, py::arg("covariates"),
      "Spline-expanded influence regression.  covariates lists the design "
      "columns to expand (column 0 is the intercept and is never valid "
      "here).  Use bootstrap_ci for inference.");

  m.def(
      "linearity_test",
      [](const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
         const mqrif::MQuantileFit& fit, int degree, int interior_knots,
         const std::vector<int>& covariates) {
        return mqrif::linearity_test(
            Y, X, fit, make_spline(degree, interior_knots, covariates));
      },
      py::arg("Y"), py::arg("X"), py::arg("fit"), py::arg("degree") = 3,
      py::arg("interior_knots") = 5, py::arg("covariates"),
      "Multivariate test of the linear fit against its spline extension.");

  m.def(
      "bootstrap_ci",
      [](const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X, double tau,
         const std::optional<Eigen::VectorXd>& direction, double c,
         double delta, const std::string& method, int B, double level,
         std::uint64_t seed, int degree, int interior_knots,
         const std::vector<int>& covariates, int workers) {
        std::optional<mqrif::SplineConfig> cfg;
        if (method == "spline")
          cfg = make_spline(degree, interior_knots, covariates);
        return mqrif::bootstrap_ci(Y, X,
                                   make_spec(tau, direction, Y.cols(), c, delta),
                                   method, B, level, seed, cfg, workers);
      },
      py::arg("Y"), py::arg("X"), py::arg("tau") = 0.5,
      py::arg("direction") = py::none(), py::arg("c") = 1.0,
      py::arg("delta") = 1.0, py::arg("method") = "linear",
      py::arg("B") = 1000, py::arg("level") = 0.95, py::arg("seed") = 1,
      py::arg("degree") = 3, py::arg("interior_knots") = 5,
      py::arg("covariates") = std::vector<int>{}, py::arg("workers") = 0,
      "Pairs-resampling percentile intervals for the partial effects.");

  m.def(
      "select_c",
      [](const Eigen::MatrixXd& Y, double tau,
         const std::optional<Eigen::VectorXd>& direction, int k_folds,
         const std::optional<Eigen::VectorXd>& grid, int grid_size,
         std::uint64_t seed, double delta, int workers) {
        const Eigen::VectorXd g = grid ? *grid : mqrif::c_grid(Y, grid_size);
        return mqrif::cross_validate(Y, tau,
                                     direction_or_default(direction, Y.cols()),
                                     k_folds, g, seed, delta, workers);
      },
      py::arg("Y"), py::arg("tau") = 0.5, py::arg("direction") = py::none(),
      py::arg("k_folds") = 5, py::arg("grid") = py::none(),
      py::arg("grid_size") = 50, py::arg("seed") = 1, py::arg("delta") = 1.0,
      py::arg("workers") = 0,
      "Cross-validated choice of the tuning constant.  Ties go to the "
      "smallest candidate.");

  m.def(
      "contour",
      [](const Eigen::MatrixXd& Y, double tau, double c, int n_directions,
         std::uint64_t seed, double delta) {
        return mqrif::contour(Y, tau, c, n_directions, seed, delta);
      },
      py::arg("Y"), py::arg("tau") = 0.25, py::arg("c") = 0.0,
      py::arg("n_directions") = 360, py::arg("seed") = 1,
      py::arg("delta") = 1.0,
      "Directional sweep of fits at a fixed asymmetry level.");

  m.def("nesting_report", &mqrif::nesting_report, py::arg("inner"),
        py::arg("outer"),
        "Planar check that the higher-tau contour lies inside the lower-tau "
        "one.");
}
