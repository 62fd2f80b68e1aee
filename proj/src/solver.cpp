#include "mqrif/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mqrif/errors.hpp"

namespace mqrif {

namespace {

// One weighting pass at theta.  Returns the row weights, the weight total,
// the weighted response total, and the mean estimating function.  Rows at
// zero residual get the junction weight 1/c when c > 0 and drop out of the
// weighted mean when c = 0 (their score is zero either way).
struct Pass {
  double w_sum = 0.0;
  Eigen::VectorXd wy_sum;
  Eigen::VectorXd eq;  // (1/n) sum of scores
  double eq_norm = 0.0;
};

Pass weight_pass(const Eigen::MatrixXd& Y, const Eigen::VectorXd& theta,
                 const MQuantileSpec& spec) {
  const int n = static_cast<int>(Y.rows());
  const int p = static_cast<int>(Y.cols());
  const double c = spec.huber.c;
  const double eps = spec.huber.epsilon_norm;
  Pass out;
  out.wy_sum = Eigen::VectorXd::Zero(p);
  out.eq = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd r(p);
  for (int i = 0; i < n; ++i) {
    r = Y.row(i).transpose() - theta;
    const double norm = r.norm();
    if (norm <= eps) {
      if (c <= 0.0) continue;  // no usable direction, exclude this round
      out.w_sum += 1.0;
      out.wy_sum += Y.row(i).transpose();
      continue;  // score contribution is zero
    }
    const double cos_phi = std::clamp(r.dot(spec.u) / norm, -1.0, 1.0);
    const double eta = eta_weight(cos_phi, spec.tau, spec.huber.delta);
    // Mean-update weights are defined only up to a common positive factor,
    // so the c > 0 branch carries them rescaled by c.  Inside rows then get
    // weight eta with no dependence on c, which keeps fits bitwise identical
    // across any c exceeding every residual norm.
    double w;
    if (c > 0.0) {
      w = eta * (norm < c ? 1.0 : c / norm);
      out.eq += (w / c) * r;  // (eta/c) r inside, (eta/norm) r outside
    } else {
      w = eta / norm;
      out.eq += w * r;  // eta * psi(r) with psi the unit direction
    }
    out.w_sum += w;
    out.wy_sum += w * Y.row(i).transpose();
  }
  out.eq /= static_cast<double>(n);
  out.eq_norm = out.eq.norm();
  return out;
}

// Tolerance on the equation norm at exit.  At c = 0 the sample equation
// jumps by up to 2/n when theta crosses a data point, so an exact root
// need not exist and the granularity term is the attainable floor.
double eq_tolerance(double tol, double c, int n) {
  return 10.0 * tol + (c <= 0.0 ? 2.0 / n : 0.0);
}

// Subgradient test at a data row for the c = 0 score.  The row solves the
// estimating equation in the set-valued sense when the equation sum over
// the other rows can be cancelled by the kink there: the kink contributes
// any vector eta(v.u) * v with |v| <= 1, scaled by the number of rows
// sitting on the point.  The cancelling direction is fixed at -R/|R|, so
// the test is one eta evaluation.
bool vertex_dominates(const Eigen::MatrixXd& Y, const MQuantileSpec& spec,
                      const Eigen::VectorXd& vertex) {
  const double eps = spec.huber.epsilon_norm;
  Eigen::VectorXd R = Eigen::VectorXd::Zero(Y.cols());
  int multiplicity = 0;
  Eigen::VectorXd r(Y.cols());
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    r = Y.row(i).transpose() - vertex;
    const double norm = r.norm();
    if (norm <= eps) {
      ++multiplicity;
      continue;
    }
    const double cos_phi = std::clamp(r.dot(spec.u) / norm, -1.0, 1.0);
    R += eta_weight(cos_phi, spec.tau, spec.huber.delta) * r / norm;
  }
  const double rn = R.norm();
  if (rn == 0.0) return true;
  const Eigen::VectorXd v = -R / rn;
  const double cos_v = std::clamp(v.dot(spec.u), -1.0, 1.0);
  return rn <= multiplicity * eta_weight(cos_v, spec.tau, spec.huber.delta);
}

Eigen::VectorXd columnwise_median(const Eigen::MatrixXd& Y) {
  const int n = static_cast<int>(Y.rows());
  Eigen::VectorXd med(Y.cols());
  std::vector<double> buf(static_cast<std::size_t>(n));
  for (int j = 0; j < Y.cols(); ++j) {
    for (int i = 0; i < n; ++i) buf[static_cast<std::size_t>(i)] = Y(i, j);
    std::sort(buf.begin(), buf.end());
    med(j) = (n % 2 == 1) ? buf[n / 2] : 0.5 * (buf[n / 2 - 1] + buf[n / 2]);
  }
  return med;
}

void check_input(const Eigen::MatrixXd& Y, const MQuantileSpec& spec) {
  spec.validate();
  if (Y.rows() < 1) throw DataError("fit: empty sample");
  if (Y.cols() != spec.dim())
    throw InvalidArgument("fit: response dimension does not match direction");
  if (!Y.allFinite()) throw DataError("fit: non-finite response values");
  double spread = 0.0;
  for (Eigen::Index i = 1; i < Y.rows(); ++i)
    spread = std::max(spread, (Y.row(i) - Y.row(0)).norm());
  if (spread <= spec.huber.epsilon_norm)
    throw DegenerateDataError("fit: all rows identical");
}

}  // namespace

void IrlsOptions::validate() const {
  if (max_iter < 1) throw InvalidArgument("irls: max_iter must be positive");
  if (!(tol > 0.0)) throw InvalidArgument("irls: tol must be positive");
  if (max_halvings < 0) throw InvalidArgument("irls: max_halvings must be >= 0");
}

MQuantileSpec reflect_spec(const MQuantileSpec& spec) {
  spec.validate();
  MQuantileSpec out = spec;
  out.tau = 1.0 - spec.tau;
  out.u = -spec.u;
  return out;
}

MQuantileFit fit_unconditional(const Eigen::MatrixXd& Y,
                               const MQuantileSpec& spec,
                               const IrlsOptions& opts) {
  check_input(Y, spec);
  opts.validate();
  if (spec.tau > 0.5) {
    MQuantileFit fit = fit_unconditional(Y, reflect_spec(spec), opts);
    fit.spec = spec;
    return fit;
  }

  const int n = static_cast<int>(Y.rows());
  Eigen::VectorXd theta;
  switch (opts.init) {
    case IrlsOptions::Init::Mean:
      theta = Y.colwise().mean().transpose();
      break;
    case IrlsOptions::Init::User:
      if (opts.init_value.size() != Y.cols())
        throw InvalidArgument("irls: init_value dimension mismatch");
      theta = opts.init_value;
      break;
    case IrlsOptions::Init::Median:
    default:
      theta = columnwise_median(Y);
      break;
  }

  const double eq_tol = eq_tolerance(opts.tol, spec.huber.c, n);
  Pass cur = weight_pass(Y, theta, spec);
  Eigen::VectorXd best_theta = theta;
  double best_eq = cur.eq_norm;

  MQuantileFit fit;
  fit.spec = spec;
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    if (cur.w_sum <= 0.0)
      throw DegenerateDataError("fit: no usable rows in weighting pass");
    Eigen::VectorXd candidate = cur.wy_sum / cur.w_sum;
    // Fixed-point displacement of the undamped map.  Convergence is judged
    // on this, not on the damped step: halvings can shrink the step below
    // tol at points that are nowhere near stationary.
    const double raw_step = (candidate - theta).lpNorm<Eigen::Infinity>();
    Pass next = weight_pass(Y, candidate, spec);
    // At c = 0 the equation norm is piecewise constant in theta and the
    // recomputed value wobbles in the last bits, so damp only on an
    // increase beyond rounding noise.
    for (int h = 0;
         h < opts.max_halvings && next.eq_norm > cur.eq_norm * (1.0 + 1e-12);
         ++h) {
      candidate = 0.5 * (theta + candidate);
      next = weight_pass(Y, candidate, spec);
    }
    const double moved = (candidate - theta).lpNorm<Eigen::Infinity>();
    theta = candidate;
    cur = next;
    fit.iterations = iter;
    if (cur.eq_norm < best_eq) {
      best_eq = cur.eq_norm;
      best_theta = theta;
    }
    if (raw_step <= opts.tol && cur.eq_norm <= eq_tol) {
      fit.converged = true;
      break;
    }
    // At c = 0 the solution can be a data row itself.  The smooth update
    // then creeps toward the row while the halvings eat the whole step, so
    // the step criterion is never met.  That stall pattern, a full step
    // above tol beaten down below it, triggers the subgradient test at the
    // nearest row, and a pass finishes the fit exactly on the row.
    if (spec.huber.c <= 0.0 && raw_step > opts.tol && moved <= opts.tol) {
      Eigen::Index nearest = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        const double d = (Y.row(i).transpose() - theta).norm();
        if (d < best_dist) {
          best_dist = d;
          nearest = i;
        }
      }
      const Eigen::VectorXd vertex = Y.row(nearest).transpose();
      if (vertex_dominates(Y, spec, vertex)) {
        theta = vertex;
        cur = weight_pass(Y, theta, spec);
        fit.converged = true;
        break;
      }
    }
  }

  if (fit.converged) {
    fit.theta = theta;
    fit.eq_norm = cur.eq_norm;
  } else {
    fit.theta = best_theta;
    fit.eq_norm = best_eq;
  }
  return fit;
}

ConditionalFit fit_conditional_linear(const Eigen::MatrixXd& Y,
                                      const Eigen::MatrixXd& X,
                                      const MQuantileSpec& spec,
                                      const IrlsOptions& opts) {
  spec.validate();
  opts.validate();
  if (Y.rows() != X.rows()) throw InvalidArgument("fit: Y and X row mismatch");
  if (Y.rows() < 1) throw DataError("fit: empty sample");
  if (Y.cols() != spec.dim())
    throw InvalidArgument("fit: response dimension does not match direction");
  if (!Y.allFinite() || !X.allFinite())
    throw DataError("fit: non-finite input values");
  const int n = static_cast<int>(Y.rows());
  const int k = static_cast<int>(X.cols());
  const int p = static_cast<int>(Y.cols());
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < k)
    throw RankDeficiencyError("fit: design matrix is rank deficient");

  if (spec.tau > 0.5) {
    ConditionalFit fit = fit_conditional_linear(Y, X, reflect_spec(spec), opts);
    fit.spec = spec;
    return fit;
  }

  const double c = spec.huber.c;
  const double eps = spec.huber.epsilon_norm;
  // Granularity of the equation at c = 0 scales with the design rows.
  double x_scale = 0.0;
  for (int i = 0; i < n; ++i) x_scale = std::max(x_scale, X.row(i).norm());
  const double eq_tol =
      10.0 * opts.tol + (c <= 0.0 ? 2.0 * std::max(1.0, x_scale) / n : 0.0);

  Eigen::MatrixXd beta = qr.solve(Y);  // start from the least squares fit

  const auto equation = [&](const Eigen::MatrixXd& b, Eigen::VectorXd& weights,
                            bool& any_row) {
    // Returns (1/n) X^T S with S rows eta_i psi(r_i)^T.
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, p);
    weights.setZero(n);
    any_row = false;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd r = Y.row(i).transpose() - b.transpose() * X.row(i).transpose();
      const double norm = r.norm();
      if (norm <= eps) {
        if (c > 0.0) {
          weights(i) = 1.0;
          any_row = true;
        }
        continue;
      }
      const double cos_phi = std::clamp(r.dot(spec.u) / norm, -1.0, 1.0);
      const double eta = eta_weight(cos_phi, spec.tau, spec.huber.delta);
      // Same c rescale of the least squares weights as the unconditional
      // pass; S keeps the true score scale for the convergence check.
      if (c > 0.0) {
        const double w = eta * (norm < c ? 1.0 : c / norm);
        weights(i) = w;
        S.row(i) = (w / c) * r.transpose();
      } else {
        const double w = eta / norm;
        weights(i) = w;
        S.row(i) = w * r.transpose();
      }
      any_row = true;
    }
    return Eigen::MatrixXd((X.transpose() * S) / static_cast<double>(n));
  };

  Eigen::VectorXd w(n);
  bool usable = false;
  Eigen::MatrixXd eq = equation(beta, w, usable);
  double eq_norm = eq.norm();

  ConditionalFit fit;
  fit.spec = spec;
  Eigen::MatrixXd best_beta = beta;
  double best_eq = eq_norm;
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    if (!usable) throw DegenerateDataError("fit: no usable rows in weighting pass");
    const Eigen::MatrixXd xtw = X.transpose() * w.asDiagonal();
    const Eigen::MatrixXd A = xtw * X;
    Eigen::MatrixXd candidate = A.ldlt().solve(xtw * Y);
    // Same convergence discipline as the unconditional loop: judge the
    // undamped displacement, damp only on a beyond-noise increase.
    const double raw_step = (candidate - beta).lpNorm<Eigen::Infinity>();
    Eigen::VectorXd w_next(n);
    bool usable_next = false;
    Eigen::MatrixXd eq_next = equation(candidate, w_next, usable_next);
    double eq_next_norm = eq_next.norm();
    for (int h = 0;
         h < opts.max_halvings && eq_next_norm > eq_norm * (1.0 + 1e-12);
         ++h) {
      candidate = 0.5 * (beta + candidate);
      eq_next = equation(candidate, w_next, usable_next);
      eq_next_norm = eq_next.norm();
    }
    beta = candidate;
    w = w_next;
    usable = usable_next;
    eq_norm = eq_next_norm;
    fit.iterations = iter;
    if (eq_norm < best_eq) {
      best_eq = eq_norm;
      best_beta = beta;
    }
    if (raw_step <= opts.tol && eq_norm <= eq_tol) {
      fit.converged = true;
      break;
    }
  }

  if (fit.converged) {
    fit.beta = beta;
    fit.eq_norm = eq_norm;
  } else {
    fit.beta = best_beta;
    fit.eq_norm = best_eq;
  }
  return fit;
}

}  // namespace mqrif
