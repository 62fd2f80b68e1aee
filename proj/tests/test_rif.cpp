#include <doctest.h>

#include <cmath>

#include "mqrif/errors.hpp"
#include "mqrif/rif.hpp"
#include "mqrif/rng.hpp"
#include "mqrif/solver.hpp"

#include "support.hpp"

using namespace mqrif;

namespace {

MQuantileFit manual_fit(Eigen::VectorXd theta, const MQuantileSpec& spec) {
  MQuantileFit fit;
  fit.theta = std::move(theta);
  fit.spec = spec;
  fit.converged = true;
  return fit;
}

// Whole-sample mean estimating function, for the finite-difference oracle.
Eigen::VectorXd mean_score(const Eigen::MatrixXd& Y, const Eigen::VectorXd& th,
                           const MQuantileSpec& spec) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(Y.cols());
  for (int i = 0; i < Y.rows(); ++i)
    acc += score(Y.row(i).transpose(), th, spec);
  return acc / double(Y.rows());
}

}  // namespace

TEST_SUITE("rif") {

TEST_CASE("m matrix closed forms") {
  // tau = 1/2 with c beyond every residual: M is exactly I/c
  Eigen::MatrixXd Y = testsup::gaussian_matrix(80, 2, 1);
  MQuantileSpec spec(0.5, Eigen::VectorXd::Ones(2), HuberParams{50.0, 1.0});
  MQuantileFit fit = fit_unconditional(Y, spec);
  MHat mh = m_matrix(Y, fit);
  CHECK((mh.m - Eigen::MatrixXd::Identity(2, 2) / 50.0).cwiseAbs().maxCoeff() <
        1e-9);
  CHECK(mh.n_skipped == 0);

  // c=0 with the four unit residuals: average of (I - r r^T)/|r| is I/2
  Eigen::MatrixXd cross(4, 2);
  cross << 1, 0, -1, 0, 0, 1, 0, -1;
  MQuantileSpec spec0(0.5, Eigen::VectorXd::Ones(2), HuberParams{0.0, 1.0});
  MQuantileFit f0 = manual_fit(Eigen::VectorXd::Zero(2), spec0);
  MHat mh0 = m_matrix(cross, f0);
  CHECK((mh0.m - 0.5 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-6);
}

TEST_CASE("m matrix matches the whole-sum finite difference") {
  Eigen::MatrixXd Y = testsup::correlated_gaussian(300, 0.4, 23);
  MQuantileSpec spec(0.25, Eigen::VectorXd::Ones(2), HuberParams{1.0, 1.0});
  MQuantileFit fit = fit_unconditional(Y, spec);
  REQUIRE(fit.converged);
  MHat mh = m_matrix(Y, fit);
  REQUIRE(mh.n_skipped == 0);

  const double h = 1e-6;  // deliberately different step than the per-row path
  Eigen::MatrixXd jac(2, 2);
  for (int j = 0; j < 2; ++j) {
    Eigen::VectorXd up = fit.theta, dn = fit.theta;
    up(j) += h;
    dn(j) -= h;
    jac.col(j) = (mean_score(Y, up, spec) - mean_score(Y, dn, spec)) / (2 * h);
  }
  CHECK((mh.m + jac).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("m matrix skips zero-residual rows") {
  Eigen::MatrixXd Y(5, 2);
  Y << 0, 0, 1, 0, -1, 0, 0, 1, 0, -1;
  MQuantileSpec spec(0.5, Eigen::VectorXd::Ones(2), HuberParams{0.0, 1.0});
  MHat mh = m_matrix(Y, manual_fit(Eigen::VectorXd::Zero(2), spec));
  CHECK(mh.n_skipped == 1);
  CHECK((mh.m - 0.5 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-6);
}

TEST_CASE("univariate c=0 has a singular m matrix") {
  // the sign score has zero derivative almost everywhere
  Eigen::MatrixXd Y = testsup::gaussian_matrix(50, 1, 9);
  MQuantileSpec spec(0.3, Eigen::VectorXd::Ones(1), HuberParams{0.0, 1.0});
  MQuantileFit fit = fit_unconditional(Y, spec);
  CHECK_THROWS_AS(m_matrix(Y, fit), SingularMatrixError);
}

TEST_CASE("d matrix forms") {
  Eigen::MatrixXd Y = testsup::correlated_gaussian(200, -0.3, 31);
  MQuantileSpec spec(0.5, Eigen::VectorXd::Ones(2), HuberParams{100.0, 1.0});
  MQuantileFit fit = fit_unconditional(Y, spec);
  Eigen::MatrixXd d = d_matrix(Y, fit);
  Eigen::MatrixXd centered = Y.rowwise() - fit.theta.transpose();
  Eigen::MatrixXd second = centered.transpose() * centered / double(Y.rows());
  CHECK((d - second / (100.0 * 100.0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("d matrix against an extended-precision summation") {
  Eigen::MatrixXd Y = testsup::correlated_gaussian(150, 0.2, 8);
  MQuantileSpec spec(0.25, Eigen::VectorXd::Ones(2), HuberParams{0.0, 1.0});
  MQuantileFit fit = fit_unconditional(Y, spec);
  REQUIRE(fit.converged);
  Eigen::MatrixXd d = d_matrix(Y, fit);

  // independent recomputation straight from the defining formulas
  const double zeta = 1.0 - 2.0 * spec.tau;
  const Eigen::VectorXd u = spec.u;
  long double acc[2][2] = {{0, 0}, {0, 0}};
  for (int i = 0; i < Y.rows(); ++i) {
    const Eigen::VectorXd r = Y.row(i).transpose() - fit.theta;
    const long double nrm = std::sqrt((long double)(r(0) * r(0) + r(1) * r(1)));
    if (nrm <= 1e-10) continue;
    const long double cp = (r(0) * u(0) + r(1) * u(1)) / nrm;
    long double eta;
    if (cp > 0)
      eta = (1.0L - cp) * zeta + 2.0L * spec.tau;
    else
      eta = -(1.0L + cp) * zeta + 2.0L * (1.0 - spec.tau);
    const long double s0 = eta * r(0) / nrm;
    const long double s1 = eta * r(1) / nrm;
    acc[0][0] += s0 * s0;
    acc[0][1] += s0 * s1;
    acc[1][0] += s1 * s0;
    acc[1][1] += s1 * s1;
  }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      CHECK(std::abs(d(a, b) - double(acc[a][b] / Y.rows())) < 1e-12);
}

TEST_CASE("influence reduces to deviations from the mean") {
  Eigen::MatrixXd Y = testsup::gaussian_matrix(120, 2, 44);
  MQuantileSpec spec(0.5, Eigen::VectorXd::Ones(2), HuberParams{1e4, 1.0});
  MQuantileFit fit = fit_unconditional(Y, spec);
  RifSample rs = influence(Y, fit);
  Eigen::MatrixXd dev = Y.rowwise() - Y.colwise().mean();
  CHECK((rs.influence - dev).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((rs.rif - Y).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("influence of a point at theta is zero") {
  Eigen::MatrixXd Y(5, 2);
  Y << 0, 0, 1, 0, -1, 0, 0, 1, 0, -1;
  MQuantileSpec spec(0.5, Eigen::VectorXd::Ones(2), HuberParams{0.0, 1.0});
  MQuantileFit fit = manual_fit(Eigen::VectorXd::Zero(2), spec);
  RifSample rs = influence(Y, fit);
  CHECK(rs.influence.row(0).norm() == 0.0);
  CHECK(rs.rif.row(0).norm() == 0.0);
  CHECK(rs.n_skipped == 1);
}

TEST_CASE("influence columns average out at the root") {
  Eigen::MatrixXd Y = testsup::correlated_gaussian(300, 0.5, 3);
  MQuantileSpec spec(0.25, Eigen::VectorXd::Ones(2), HuberParams{1.0, 1.0});
  MQuantileFit fit = fit_unconditional(Y, spec);
  REQUIRE(fit.converged);
  RifSample rs = influence(Y, fit);
  CHECK(rs.influence.colwise().mean().cwiseAbs().maxCoeff() < 1e-5);
  // recentering: RIF rows average back to theta
  CHECK((rs.rif.colwise().mean().transpose() - fit.theta).cwiseAbs().maxCoeff() <
        1e-5);
}

TEST_CASE("covariance reduces to sample moments at the mean") {
  Eigen::MatrixXd Y = testsup::correlated_gaussian(500, 0.5, 10);
  MQuantileSpec spec(0.5, Eigen::VectorXd::Ones(2), HuberParams{1e5, 1.0});
  MQuantileFit fit = fit_unconditional(Y, spec);
  RifMatrices rm = rif_covariance(Y, fit);
  Eigen::MatrixXd centered = Y.rowwise() - Y.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered / double(Y.rows());
  CHECK((rm.delta_hat - cov).cwiseAbs().maxCoeff() < 1e-5);
  const double r = cov(0, 1) / std::sqrt(cov(0, 0) * cov(1, 1));
  CHECK(rm.corr(0, 1) == doctest::Approx(r).epsilon(1e-5));
  CHECK(rm.corr(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sandwich identity holds exactly") {
  for (std::uint64_t seed : {2ULL, 3ULL, 4ULL}) {
    Eigen::MatrixXd Y = testsup::correlated_gaussian(200, 0.3, seed);
    for (double c : {0.5, 1.0, 20.0}) {
      MQuantileSpec spec(0.25, Eigen::VectorXd::Ones(2), HuberParams{c, 1.0});
      MQuantileFit fit = fit_unconditional(Y, spec);
      RifMatrices rm = rif_covariance(Y, fit);
      const Eigen::MatrixXd lhs = rm.delta_hat;
      const Eigen::MatrixXd rhs = rm.m_hat.inverse() * rm.d_hat *
                                  rm.m_hat.inverse().transpose();
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((rm.theta_cov - rhs / double(Y.rows())).cwiseAbs().maxCoeff() <
            1e-10);
      // symmetric PSD up to numeric noise
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rm.delta_hat);
      CHECK(es.eigenvalues().minCoeff() > -1e-10);
    }
  }
}

}  // TEST_SUITE
