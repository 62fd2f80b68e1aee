#include "mqrif/contour.hpp"

#include <algorithm>
#include <cmath>

#include "mqrif/errors.hpp"
#include "mqrif/rng.hpp"

namespace mqrif {

Eigen::MatrixXd direction_grid(int p, int m, std::uint64_t seed) {
  if (p < 2) throw InvalidArgument("direction_grid: dimension must be >= 2");
  if (m < 1) throw InvalidArgument("direction_grid: need at least one direction");
  Eigen::MatrixXd dirs(m, p);
  if (p == 2) {
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (int j = 0; j < m; ++j) {
      const double angle = two_pi * static_cast<double>(j) / m;
      dirs(j, 0) = std::cos(angle);
      dirs(j, 1) = std::sin(angle);
    }
    return dirs;
  }
  Rng rng(seed);
  for (int j = 0; j < m; ++j) {
    double norm = 0.0;
    do {
      for (int l = 0; l < p; ++l) dirs(j, l) = rng.normal();
      norm = dirs.row(j).norm();
    } while (norm < 1e-8);
    dirs.row(j) /= norm;
  }
  return dirs;
}

ContourSet contour(const Eigen::MatrixXd& Y, double tau, double c, int m,
                   std::uint64_t seed, double delta) {
  if (!(tau > 0.0 && tau < 1.0))
    throw InvalidArgument("contour: tau must lie inside (0,1)");
  const int p = static_cast<int>(Y.cols());
  ContourSet out;
  out.tau = tau;
  out.c = c;
  out.seed = seed;
  out.directions = direction_grid(p, m, seed);
  out.vertices.resize(m, p);
  out.converged.assign(static_cast<std::size_t>(m), 0);

  HuberParams hp;
  hp.c = c;
  hp.delta = delta;
  Eigen::VectorXd warm;
  for (int j = 0; j < m; ++j) {
    const MQuantileSpec spec(tau, out.directions.row(j).transpose(), hp);
    IrlsOptions opts;
    if (warm.size() == p) {
      opts.init = IrlsOptions::Init::User;
      opts.init_value = warm;
    }
    MQuantileFit fit = fit_unconditional(Y, spec, opts);
    if (!fit.converged && opts.init == IrlsOptions::Init::User) {
      // Retry cold before flagging the vertex.
      fit = fit_unconditional(Y, spec);
    }
    out.vertices.row(j) = fit.theta.transpose();
    out.converged[static_cast<std::size_t>(j)] = fit.converged ? 1 : 0;
    if (fit.converged) warm = fit.theta;
  }
  return out;
}

namespace {

// Even-odd ray crossing with an explicit boundary tolerance; points within
// tol of an edge count as inside.
bool point_in_polygon(const Eigen::MatrixXd& poly, double x, double y,
                      double tol) {
  const int m = static_cast<int>(poly.rows());
  bool inside = false;
  for (int i = 0, j = m - 1; i < m; j = i++) {
    const double xi = poly(i, 0), yi = poly(i, 1);
    const double xj = poly(j, 0), yj = poly(j, 1);
    // Distance from the point to segment (j -> i).
    const double dx = xi - xj, dy = yi - yj;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((x - xj) * dx + (y - yj) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double px = xj + t * dx, py = yj + t * dy;
    const double dist2 = (x - px) * (x - px) + (y - py) * (y - py);
    if (dist2 <= tol * tol) return true;
    if ((yi > y) != (yj > y)) {
      const double x_cross = xj + (y - yj) / (yi - yj) * (xi - xj);
      if (x < x_cross) inside = !inside;
    }
  }
  return inside;
}

}  // namespace

NestingReport nesting_report(const ContourSet& inner, const ContourSet& outer) {
  if (inner.directions.cols() != 2 || outer.directions.cols() != 2)
    throw InvalidArgument("nesting_report: planar contours only");
  if (inner.c != outer.c)
    throw InvalidArgument("nesting_report: contours use different tuning constants");
  if (!(inner.tau > outer.tau))
    throw InvalidArgument(
        "nesting_report: inner contour must have the larger tau");
  if (outer.vertices.rows() < 3)
    throw InvalidArgument("nesting_report: outer polygon needs >= 3 vertices");

  // Scale-aware boundary tolerance from the outer polygon's extent.
  const double span =
      (outer.vertices.colwise().maxCoeff() - outer.vertices.colwise().minCoeff())
          .norm();
  const double tol = 1e-9 * std::max(1.0, span);

  NestingReport report;
  report.nested = true;
  for (int i = 0; i < inner.vertices.rows(); ++i) {
    if (!inner.converged[static_cast<std::size_t>(i)]) continue;
    if (!point_in_polygon(outer.vertices, inner.vertices(i, 0),
                          inner.vertices(i, 1), tol)) {
      report.nested = false;
      report.violations.push_back(i);
    }
  }
  return report;
}

}  // namespace mqrif
