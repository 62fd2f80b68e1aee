#include "mqrif/rif.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mqrif/errors.hpp"

namespace mqrif {

namespace {

void check_fit_input(const Eigen::MatrixXd& Y, const MQuantileFit& fit) {
  fit.spec.validate();
  if (Y.cols() != fit.spec.dim() || fit.theta.size() != Y.cols())
    throw InvalidArgument("rif: dimension mismatch between data and fit");
  if (Y.rows() < 1) throw DataError("rif: empty sample");
}

double condition_number(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

}  // namespace

MHat m_matrix(const Eigen::MatrixXd& Y, const MQuantileFit& fit,
              JacobianMethod method) {
  check_fit_input(Y, fit);
  const int n = static_cast<int>(Y.rows());
  const int p = static_cast<int>(Y.cols());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, p);
  int skipped = 0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd y = Y.row(i).transpose();
    if ((y - fit.theta).norm() <= fit.spec.huber.epsilon_norm) {
      ++skipped;
      continue;
    }
    sum += score_jacobian(y, fit.theta, fit.spec, method);
  }
  if (n - skipped == 0)
    throw DegenerateDataError("m_matrix: every row sits at the fitted point");
  MHat out;
  out.m = -sum / static_cast<double>(n - skipped);
  out.n_skipped = skipped;
  out.cond = condition_number(out.m);
  if (!(out.cond < kConditionLimit))
    throw SingularMatrixError(
        "m_matrix: condition number above 1e12; the scale matrix is not "
        "identified on this sample");
  return out;
}

Eigen::MatrixXd d_matrix(const Eigen::MatrixXd& Y, const MQuantileFit& fit) {
  check_fit_input(Y, fit);
  const int n = static_cast<int>(Y.rows());
  const int p = static_cast<int>(Y.cols());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd s = score(Y.row(i).transpose(), fit.theta, fit.spec);
    sum.noalias() += s * s.transpose();
  }
  return sum / static_cast<double>(n);
}

RifSample influence(const Eigen::MatrixXd& Y, const MQuantileFit& fit,
                    const MHat& m) {
  check_fit_input(Y, fit);
  const int n = static_cast<int>(Y.rows());
  const int p = static_cast<int>(Y.cols());
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m.m);
  RifSample out;
  out.m_cond = m.cond;
  out.n_skipped = m.n_skipped;
  out.influence.resize(n, p);
  out.rif.resize(n, p);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd s = score(Y.row(i).transpose(), fit.theta, fit.spec);
    // A zero score stays exactly zero without touching the solve.
    const Eigen::VectorXd inf =
        (s.isZero(0.0)) ? Eigen::VectorXd::Zero(p) : Eigen::VectorXd(lu.solve(s));
    out.influence.row(i) = inf.transpose();
    out.rif.row(i) = (fit.theta + inf).transpose();
  }
  return out;
}

RifSample influence(const Eigen::MatrixXd& Y, const MQuantileFit& fit) {
  return influence(Y, fit, m_matrix(Y, fit));
}

RifMatrices rif_covariance(const Eigen::MatrixXd& Y, const MQuantileFit& fit) {
  const MHat m = m_matrix(Y, fit);
  const RifSample sample = influence(Y, fit, m);
  const int n = static_cast<int>(Y.rows());
  const int p = static_cast<int>(Y.cols());

  RifMatrices out;
  out.m_hat = m.m;
  out.m_cond = m.cond;
  out.n_skipped = m.n_skipped;
  out.d_hat = d_matrix(Y, fit);
  out.delta_hat =
      (sample.influence.transpose() * sample.influence) / static_cast<double>(n);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m.m);
  const Eigen::MatrixXd minv_d = lu.solve(out.d_hat);
  out.theta_cov = lu.solve(minv_d.transpose()).transpose() / static_cast<double>(n);

  out.corr = Eigen::MatrixXd::Identity(p, p);
  for (int j = 0; j < p; ++j) {
    for (int l = 0; l < p; ++l) {
      if (j == l) continue;
      const double denom = std::sqrt(out.delta_hat(j, j) * out.delta_hat(l, l));
      out.corr(j, l) = denom > 0.0 ? out.delta_hat(j, l) / denom : 0.0;
    }
  }
  return out;
}

}  // namespace mqrif
