#include "mqrif/huber.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mqrif/errors.hpp"

namespace mqrif {

void HuberParams::validate() const {
  if (!(c >= 0.0) || !std::isfinite(c))
    throw InvalidArgument("huber: c must be a finite non-negative real");
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw InvalidArgument("huber: delta must be a finite positive real");
  if (!(epsilon_norm > 0.0))
    throw InvalidArgument("huber: epsilon_norm must be positive");
}

MQuantileSpec::MQuantileSpec(double tau_in, Eigen::VectorXd u_in, HuberParams h)
    : tau(tau_in), u(std::move(u_in)), huber(h) {
  validate();
  u /= u.norm();
}

void MQuantileSpec::validate() const {
  huber.validate();
  if (!(tau > 0.0 && tau < 1.0))
    throw InvalidArgument("spec: tau must lie strictly inside (0,1)");
  if (u.size() == 0 || u.norm() <= 0.0 || !u.allFinite())
    throw InvalidArgument("spec: direction u must be a nonzero finite vector");
}

double eta_weight(double cos_phi, double tau, double delta, EtaForm form) {
  if (!(tau > 0.0 && tau < 1.0))
    throw InvalidArgument("eta_weight: tau must lie strictly inside (0,1)");
  if (!(delta > 0.0))
    throw InvalidArgument("eta_weight: delta must be positive");
  const double cp = std::clamp(cos_phi, -1.0, 1.0);
  const double zeta = 1.0 - 2.0 * tau;
  if (cp > 0.0) return std::pow(1.0 - cp, delta) * zeta + 2.0 * tau;
  // Both forms agree at cos(phi) = 0, so the halves join continuously.
  if (form == EtaForm::ReductionConsistent)
    return -std::pow(1.0 + cp, delta) * zeta + 2.0 * (1.0 - tau);
  return -std::pow(1.0 - cp, delta) * zeta + 2.0 * (1.0 - tau);
}

Eigen::VectorXd psi(const Eigen::VectorXd& r, const HuberParams& params) {
  params.validate();
  const double norm = r.norm();
  if (norm <= params.epsilon_norm) return Eigen::VectorXd::Zero(r.size());
  if (norm < params.c) return r / params.c;
  return r / norm;
}

Eigen::VectorXd score(const Eigen::VectorXd& y, const Eigen::VectorXd& theta,
                      const MQuantileSpec& spec) {
  spec.validate();
  if (y.size() != theta.size() || y.size() != spec.u.size())
    throw InvalidArgument("score: y, theta and u must share one dimension");
  const Eigen::VectorXd r = y - theta;
  const double norm = r.norm();
  if (norm <= spec.huber.epsilon_norm)
    return Eigen::VectorXd::Zero(r.size());
  const double cos_phi = r.dot(spec.u) / (norm * spec.u.norm());
  const double eta = eta_weight(cos_phi, spec.tau, spec.huber.delta);
  return eta * psi(r, spec.huber);
}

Eigen::MatrixXd score_jacobian(const Eigen::VectorXd& y,
                               const Eigen::VectorXd& theta,
                               const MQuantileSpec& spec,
                               JacobianMethod method) {
  spec.validate();
  const Eigen::VectorXd r = y - theta;
  const double norm = r.norm();
  if (norm <= spec.huber.epsilon_norm)
    throw SingularMatrixError(
        "score_jacobian: residual norm at or below epsilon_norm");
  const int p = static_cast<int>(r.size());

  if (method == JacobianMethod::AnalyticLimit) {
    if (spec.tau != 0.5)
      throw InvalidArgument(
          "score_jacobian: analytic form requires tau = 1/2 where the "
          "directional weight is constant");
    if (spec.huber.c > 0.0 && norm < spec.huber.c)
      return -Eigen::MatrixXd::Identity(p, p) / spec.huber.c;
    const Eigen::MatrixXd outer = (r / norm) * (r / norm).transpose();
    return -(Eigen::MatrixXd::Identity(p, p) - outer) / norm;
  }

  const double h = std::cbrt(std::numeric_limits<double>::epsilon()) *
                   std::max(1.0, theta.norm());
  Eigen::MatrixXd jac(p, p);
  Eigen::VectorXd shifted = theta;
  for (int j = 0; j < p; ++j) {
    shifted(j) = theta(j) + h;
    const Eigen::VectorXd up = score(y, shifted, spec);
    shifted(j) = theta(j) - h;
    const Eigen::VectorXd down = score(y, shifted, spec);
    shifted(j) = theta(j);
    jac.col(j) = (up - down) / (2.0 * h);
  }
  return jac;
}

}  // namespace mqrif
