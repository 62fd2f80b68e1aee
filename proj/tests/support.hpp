#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mqrif/rng.hpp"

namespace testsup {

inline Eigen::MatrixXd gaussian_matrix(int n, int p, std::uint64_t seed) {
  mqrif::Rng rng(seed);
  Eigen::MatrixXd m(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) m(i, j) = rng.normal();
  return m;
}

// Bivariate normal rows with correlation rho across the two columns.
inline Eigen::MatrixXd correlated_gaussian(int n, double rho,
                                           std::uint64_t seed) {
  mqrif::Rng rng(seed);
  Eigen::MatrixXd m(n, 2);
  const double b = std::sqrt(1.0 - rho * rho);
  for (int i = 0; i < n; ++i) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    m(i, 0) = z1;
    m(i, 1) = rho * z1 + b * z2;
  }
  return m;
}

// Andrew monotone chain; returns hull vertices in counter-clockwise order.
inline Eigen::MatrixXd convex_hull(const Eigen::MatrixXd& pts) {
  const int n = static_cast<int>(pts.rows());
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (pts(a, 0) != pts(b, 0)) return pts(a, 0) < pts(b, 0);
    return pts(a, 1) < pts(b, 1);
  });
  auto cross = [&](int o, int a, int b) {
    return (pts(a, 0) - pts(o, 0)) * (pts(b, 1) - pts(o, 1)) -
           (pts(a, 1) - pts(o, 1)) * (pts(b, 0) - pts(o, 0));
  };
  std::vector<int> hull(2 * static_cast<std::size_t>(n));
  int h = 0;
  for (int i = 0; i < n; ++i) {
    const int v = idx[static_cast<std::size_t>(i)];
    while (h >= 2 && cross(hull[h - 2], hull[h - 1], v) <= 0) --h;
    hull[static_cast<std::size_t>(h++)] = v;
  }
  const int lower = h + 1;
  for (int i = n - 2; i >= 0; --i) {
    const int v = idx[static_cast<std::size_t>(i)];
    while (h >= lower && cross(hull[h - 2], hull[h - 1], v) <= 0) --h;
    hull[static_cast<std::size_t>(h++)] = v;
  }
  Eigen::MatrixXd out(h - 1, 2);
  for (int i = 0; i < h - 1; ++i) out.row(i) = pts.row(hull[static_cast<std::size_t>(i)]);
  return out;
}

// Inside test against a counter-clockwise convex polygon; points within
// tol of an edge count as inside.
inline bool inside_convex(const Eigen::MatrixXd& hull, double x, double y,
                          double tol) {
  const int m = static_cast<int>(hull.rows());
  for (int i = 0; i < m; ++i) {
    const int j = (i + 1) % m;
    const double cross = (hull(j, 0) - hull(i, 0)) * (y - hull(i, 1)) -
                         (hull(j, 1) - hull(i, 1)) * (x - hull(i, 0));
    if (cross < -tol) return false;
  }
  return true;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool file_exists(const std::string& path) {
  return std::ifstream(path).good();
}

}  // namespace testsup
