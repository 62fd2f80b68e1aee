#pragma once

#include <Eigen/Dense>

#include "mqrif/huber.hpp"

namespace mqrif {

struct IrlsOptions {
  enum class Init { Median, Mean, User };

  int max_iter = 200;
  double tol = 1e-8;
  Init init = Init::Median;
  Eigen::VectorXd init_value;  // used when init == User
  int max_halvings = 20;

  void validate() const;
};

struct MQuantileFit {
  Eigen::VectorXd theta;
  MQuantileSpec spec;
  bool converged = false;
  int iterations = 0;
  double eq_norm = 0.0;  // norm of the mean estimating function at theta
};

struct ConditionalFit {
  Eigen::MatrixXd beta;  // k x p
  MQuantileSpec spec;
  bool converged = false;
  int iterations = 0;
  double eq_norm = 0.0;  // Frobenius norm of (1/n) X^T S at beta
};

// The defining symmetry: the (1-tau, u) target coincides with (tau, -u).
MQuantileSpec reflect_spec(const MQuantileSpec& spec);

// Root of (1/n) sum eta_i psi(Y_i - theta) = 0 by iteratively reweighted
// means with step damping.  tau > 1/2 is resolved internally through
// reflect_spec; the returned fit keeps the requested spec.
MQuantileFit fit_unconditional(const Eigen::MatrixXd& Y,
                               const MQuantileSpec& spec,
                               const IrlsOptions& opts = {});

// Linear conditional version: rows of Y regressed on a design X (with its
// own intercept column if wanted); each IRLS step is a weighted least
// squares solve.
ConditionalFit fit_conditional_linear(const Eigen::MatrixXd& Y,
                                      const Eigen::MatrixXd& X,
                                      const MQuantileSpec& spec,
                                      const IrlsOptions& opts = {});

}  // namespace mqrif
