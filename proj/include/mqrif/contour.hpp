#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mqrif/solver.hpp"

namespace mqrif {

struct ContourSet {
  double tau = 0.5;
  double c = 0.0;
  Eigen::MatrixXd directions;  // m x p unit rows
  Eigen::MatrixXd vertices;    // m x p fitted points
  std::vector<std::uint8_t> converged;
  std::uint64_t seed = 0;
};

// m unit directions: equally spaced angles for p = 2 (seed unused),
// seeded normalized Gaussian draws for p >= 3.
Eigen::MatrixXd direction_grid(int p, int m, std::uint64_t seed);

// Directional sweep of fits at a fixed (tau, c): vertex j solves the
// estimating equation along direction j, warm-started from vertex j-1 and
// refit from the median before being flagged on failure.
ContourSet contour(const Eigen::MatrixXd& Y, double tau, double c, int m,
                   std::uint64_t seed, double delta = 1.0);

struct NestingReport {
  bool nested = false;
  std::vector<int> violations;  // inner vertex indices outside the outer set
};

// Planar check that every converged vertex of the higher-tau (inner)
// contour lies inside the polygon of the lower-tau (outer) contour.
// Boundary points count as inside.
NestingReport nesting_report(const ContourSet& inner, const ContourSet& outer);

}  // namespace mqrif
