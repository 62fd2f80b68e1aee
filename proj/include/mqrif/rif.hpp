#pragma once

#include <Eigen/Dense>

#include "mqrif/huber.hpp"
#include "mqrif/solver.hpp"

namespace mqrif {

// Condition number above which a matrix that must be inverted is treated
// as singular (the identification assumption behind it has failed).
inline constexpr double kConditionLimit = 1e12;

struct MHat {
  Eigen::MatrixXd m;  // p x p
  double cond = 0.0;
  int n_skipped = 0;  // rows at zero residual left out of the average
};

// Minus the average per-row score Jacobian at the fitted point.
MHat m_matrix(const Eigen::MatrixXd& Y, const MQuantileFit& fit,
              JacobianMethod method = JacobianMethod::CentralDiff);

// Average outer product of the per-row scores.
Eigen::MatrixXd d_matrix(const Eigen::MatrixXd& Y, const MQuantileFit& fit);

struct RifSample {
  Eigen::MatrixXd influence;  // n x p rows M^-1 eta_i psi(r_i)
  Eigen::MatrixXd rif;        // n x p rows theta + influence
  double m_cond = 0.0;
  int n_skipped = 0;
};

RifSample influence(const Eigen::MatrixXd& Y, const MQuantileFit& fit);
// Same, reusing an already computed M.
RifSample influence(const Eigen::MatrixXd& Y, const MQuantileFit& fit,
                    const MHat& m);

struct RifMatrices {
  Eigen::MatrixXd m_hat;      // p x p
  Eigen::MatrixXd d_hat;      // p x p
  Eigen::MatrixXd delta_hat;  // p x p, average influence outer product
  Eigen::MatrixXd theta_cov;  // p x p, M^-1 D M^-T / n
  Eigen::MatrixXd corr;       // p x p, delta_hat standardized
  double m_cond = 0.0;
  int n_skipped = 0;
};

RifMatrices rif_covariance(const Eigen::MatrixXd& Y, const MQuantileFit& fit);

}  // namespace mqrif
