#include "mqrif/bspline.hpp"

#include <algorithm>
#include <cmath>

#include "mqrif/errors.hpp"

namespace mqrif {

BsplineBasis::BsplineBasis(double lo, double hi, std::vector<double> interior,
                           int degree)
    : degree_(degree), lo_(lo), hi_(hi) {
  if (degree < 0) throw InvalidArgument("bspline: degree must be >= 0");
  if (!(hi > lo))
    throw DataError("bspline: covariate has no spread, cannot place knots");
  for (std::size_t i = 0; i < interior.size(); ++i) {
    if (interior[i] <= lo || interior[i] >= hi)
      throw InvalidArgument("bspline: interior knot outside the open range");
    if (i > 0 && interior[i] <= interior[i - 1])
      throw InvalidArgument("bspline: interior knots must be strictly increasing");
  }
  knots_.reserve(interior.size() + 2 * static_cast<std::size_t>(degree + 1));
  for (int i = 0; i <= degree; ++i) knots_.push_back(lo);
  knots_.insert(knots_.end(), interior.begin(), interior.end());
  for (int i = 0; i <= degree; ++i) knots_.push_back(hi);
  n_basis_ = static_cast<int>(interior.size()) + degree + 1;
}

BsplineBasis BsplineBasis::from_data(const Eigen::VectorXd& x, int interior_knots,
                                     int degree, int* collapsed_out) {
  if (interior_knots < 0)
    throw InvalidArgument("bspline: interior_knots must be >= 0");
  const int n = static_cast<int>(x.size());
  if (n < 2) throw DataError("bspline: need at least two covariate values");
  std::vector<double> sorted(x.data(), x.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  if (!(hi > lo))
    throw DataError("bspline: covariate has no spread, cannot place knots");

  std::vector<double> interior;
  interior.reserve(static_cast<std::size_t>(interior_knots));
  for (int i = 1; i <= interior_knots; ++i) {
    // Quantile with linear interpolation between order statistics.
    const double q = static_cast<double>(i) / (interior_knots + 1);
    const double pos = q * (n - 1);
    const int left = static_cast<int>(std::floor(pos));
    const double frac = pos - left;
    double value = sorted[static_cast<std::size_t>(left)];
    if (left + 1 < n)
      value += frac * (sorted[static_cast<std::size_t>(left + 1)] - value);
    interior.push_back(value);
  }

  // Collapse duplicates (ties in the covariate produce repeated quantiles)
  // and knots that collide with the boundary.
  const double tol = 1e-12 * (hi - lo);
  std::vector<double> unique;
  int collapsed = 0;
  for (double v : interior) {
    if (v - lo <= tol || hi - v <= tol) {
      ++collapsed;
      continue;
    }
    if (!unique.empty() && v - unique.back() <= tol) {
      ++collapsed;
      continue;
    }
    unique.push_back(v);
  }
  if (collapsed_out) *collapsed_out = collapsed;
  return BsplineBasis(lo, hi, std::move(unique), degree);
}

int BsplineBasis::find_span(double x) const {
  const int d = degree_;
  const int last = n_basis_ - 1;  // index of the last basis function
  if (x >= knots_[static_cast<std::size_t>(last + 1)]) return last;
  if (x <= knots_[static_cast<std::size_t>(d)]) return d;
  // Largest i with knots_[i] <= x.
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  return static_cast<int>(it - knots_.begin()) - 1;
}

Eigen::VectorXd BsplineBasis::eval(double x) const {
  const double xc = std::clamp(x, lo_, hi_);
  const int d = degree_;
  const int span = find_span(xc);
  // Cox-de Boor triangle for the d+1 functions active on this span.
  std::vector<double> local(static_cast<std::size_t>(d + 1), 0.0);
  std::vector<double> left(static_cast<std::size_t>(d + 1), 0.0);
  std::vector<double> right(static_cast<std::size_t>(d + 1), 0.0);
  local[0] = 1.0;
  for (int j = 1; j <= d; ++j) {
    left[static_cast<std::size_t>(j)] = xc - knots_[static_cast<std::size_t>(span + 1 - j)];
    right[static_cast<std::size_t>(j)] = knots_[static_cast<std::size_t>(span + j)] - xc;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[static_cast<std::size_t>(r + 1)] +
                           left[static_cast<std::size_t>(j - r)];
      const double temp = denom > 0.0 ? local[static_cast<std::size_t>(r)] / denom : 0.0;
      local[static_cast<std::size_t>(r)] =
          saved + right[static_cast<std::size_t>(r + 1)] * temp;
      saved = left[static_cast<std::size_t>(j - r)] * temp;
    }
    local[static_cast<std::size_t>(j)] = saved;
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_basis_);
  for (int j = 0; j <= d; ++j) {
    const int idx = span - d + j;
    if (idx >= 0 && idx < n_basis_) out(idx) = local[static_cast<std::size_t>(j)];
  }
  return out;
}

Eigen::VectorXd BsplineBasis::deriv(double x) const {
  const int d = degree_;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_basis_);
  if (d == 0) return out;
  // d/dx B_{i,d} = d * (B_{i,d-1}/(t_{i+d}-t_i) - B_{i+1,d-1}/(t_{i+d+1}-t_{i+1}))
  BsplineBasis lower(*this);
  lower.degree_ = d - 1;
  lower.knots_.assign(knots_.begin() + 1, knots_.end() - 1);
  lower.n_basis_ = n_basis_ - 1;
  const Eigen::VectorXd bl = lower.eval(std::clamp(x, lo_, hi_));
  for (int i = 0; i < n_basis_; ++i) {
    double value = 0.0;
    const double den1 = knots_[static_cast<std::size_t>(i + d)] -
                        knots_[static_cast<std::size_t>(i)];
    if (den1 > 0.0 && i - 1 >= 0 && i - 1 < lower.n_basis_)
      value += bl(i - 1) / den1;
    const double den2 = knots_[static_cast<std::size_t>(i + d + 1)] -
                        knots_[static_cast<std::size_t>(i + 1)];
    if (den2 > 0.0 && i < lower.n_basis_) value -= bl(i) / den2;
    out(i) = d * value;
  }
  return out;
}

}  // namespace mqrif
