#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mqrif/huber.hpp"

namespace mqrif {

struct CvResult {
  Eigen::VectorXd grid;
  Eigen::VectorXd cv_scores;  // mean held-out squared distance per c
  std::vector<std::uint8_t> valid;  // zero where some fold fit failed
  double c_star = 0.0;
  int k_folds = 0;
  std::vector<int> fold_assignment;  // fold id per row
  std::uint64_t seed = 0;
  int n_failed_fits = 0;
};

// Uniform candidate grid on [0.1, max_i |Y_i|].
Eigen::VectorXd c_grid(const Eigen::MatrixXd& Y, int n_grid);

// K-fold squared-distance cross validation of the tuning constant for the
// (tau, u) target.  Every fold fit starts cold from the componentwise
// median.  Ties in the score go to the smallest c.
CvResult cross_validate(const Eigen::MatrixXd& Y, double tau,
                        const Eigen::VectorXd& u, int k_folds,
                        const Eigen::VectorXd& grid, std::uint64_t seed,
                        double delta = 1.0, int workers = 0);

}  // namespace mqrif
