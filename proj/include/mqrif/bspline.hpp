#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mqrif {

// Clamped B-spline basis on [lo, hi] with a caller-supplied interior knot
// list.  Evaluation outside the range is clamped to the boundary.
class BsplineBasis {
 public:
  // interior must be sorted; duplicates (already collapsed by the caller)
  // are rejected here.
  BsplineBasis(double lo, double hi, std::vector<double> interior, int degree);

  // Build from data: interior knots at the equally spaced empirical
  // quantiles i/(m+1).  Duplicate knot values are collapsed; the number
  // removed is reported through collapsed_out when non-null.
  static BsplineBasis from_data(const Eigen::VectorXd& x, int interior_knots,
                                int degree, int* collapsed_out = nullptr);

  int size() const { return n_basis_; }
  int degree() const { return degree_; }
  const std::vector<double>& knots() const { return knots_; }

  // Row of all basis function values at x; entries sum to one.
  Eigen::VectorXd eval(double x) const;
  // Row of first derivatives at x; entries sum to zero.
  Eigen::VectorXd deriv(double x) const;

 private:
  int find_span(double x) const;

  std::vector<double> knots_;  // full clamped knot vector
  int degree_ = 3;
  int n_basis_ = 0;
  double lo_ = 0.0;
  double hi_ = 1.0;
};

}  // namespace mqrif
