#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mqrif/huber.hpp"

namespace mqrif {

// Reference implementations used to validate the estimators.  Everything
// here evaluates the defining equations directly (exhaustive search, order
// statistics, scalar fixed points) and deliberately shares no numerical
// routines with the iterative solvers it is used to check.

struct SearchBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

struct BruteForceResult {
  Eigen::VectorXd theta;
  // Norm of the mean estimating function at theta.
  double objective = 0.0;
  double grid_step = 0.0;
};

// Exhaustive grid search for the root of the mean estimating function,
// followed by one coordinate-wise golden-section refinement pass inside
// the winning cell.  Dimension 1 or 2 only.  Errors if the grid argmin
// touches the box boundary (box too small to bracket the root).
BruteForceResult brute_force_theta(const Eigen::MatrixXd& Y,
                                   const MQuantileSpec& spec,
                                   const SearchBox& box, double grid_step);

// Order statistic at index ceil(n * tau), 1-based.
double univariate_quantile_oracle(const Eigen::VectorXd& y, double tau);

// Scalar expectile by damped-free fixed point iteration on the weighted
// mean with weights 2*tau above / 2*(1-tau) below, run to 1e-12.
double univariate_expectile_oracle(const Eigen::VectorXd& y, double tau);

// Synthetic data generators.  kind is one of "gaussian-linear",
// "correlated-gaussian", "contaminated".
struct DgpConfig {
  std::string kind = "gaussian-linear";
  int n = 100;
  int k = 1;  // design columns including the intercept
  int p = 2;  // response dimension
  Eigen::MatrixXd coef;  // k x p true coefficient matrix
  double noise_scale = 1.0;
  double rho = 0.0;  // noise correlation across responses
  double contamination_rate = 0.1;
  double contamination_scale = 5.0;  // multiplies the heavy-tailed noise
  std::uint64_t seed = 1;

  void validate() const;
  // Fills coef with a fixed default pattern when it is empty.
  Eigen::MatrixXd effective_coef() const;
};

struct SimulatedData {
  Eigen::MatrixXd Y;  // n x p
  Eigen::MatrixXd X;  // n x k, first column constant 1
  Eigen::MatrixXd coef;  // the truth used
};

SimulatedData simulate_dgp(const DgpConfig& cfg);

// Add heavy-tailed (Cauchy) shocks to a fraction of rows; returns the
// contaminated copy.  Pairing a clean sample with its contaminated twin
// is explicit: same Y in, same rows shocked for a given seed.
Eigen::MatrixXd contaminate(const Eigen::MatrixXd& Y, double rate,
                            double scale, std::uint64_t seed);

struct CoverageResult {
  double coverage = 0.0;  // mean elementwise coverage of slope entries
  int reps_run = 0;
  int reps_failed = 0;
  double z = 0.0;
};

// Repeatedly simulate from the DGP, run the unconditional fit plus the
// linear partial-effect regression with its asymptotic covariance, and
// report how often the level-CIs cover the true slope coefficients.
// level = 0 degenerates to zero-width intervals and coverage 0.
CoverageResult run_coverage(const DgpConfig& dgp, const MQuantileSpec& spec,
                            int reps, double level, int workers = 0);

}  // namespace mqrif
