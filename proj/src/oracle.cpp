#include "mqrif/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "mqrif/errors.hpp"
#include "mqrif/parallel.hpp"
#include "mqrif/regression.hpp"
#include "mqrif/rif.hpp"
#include "mqrif/rng.hpp"
#include "mqrif/solver.hpp"

namespace mqrif {

namespace {

// Self-contained evaluation of the mean estimating function.  Written out
// from the defining formulas on purpose: agreement between the grid search
// below and the iterative solver is only evidence if the two sides do not
// share arithmetic.
double mean_score_norm(const Eigen::MatrixXd& Y, const Eigen::VectorXd& theta,
                       double tau, const Eigen::VectorXd& u_unit, double c,
                       double delta) {
  const int n = static_cast<int>(Y.rows());
  const int p = static_cast<int>(Y.cols());
  const double zeta = 1.0 - 2.0 * tau;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(p);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd r = Y.row(i).transpose() - theta;
    const double norm = r.norm();
    if (norm <= 1e-10) continue;
    double cos_phi = r.dot(u_unit) / norm;
    cos_phi = std::clamp(cos_phi, -1.0, 1.0);
    double eta;
    if (cos_phi > 0.0)
      eta = std::pow(1.0 - cos_phi, delta) * zeta + 2.0 * tau;
    else
      eta = -std::pow(1.0 + cos_phi, delta) * zeta + 2.0 * (1.0 - tau);
    if (c > 0.0 && norm < c)
      sum += eta * r / c;
    else
      sum += eta * r / norm;
  }
  return (sum / static_cast<double>(n)).norm();
}

constexpr double kGolden = 0.6180339887498949;

// Golden-section minimization of fn over [lo, hi].
double golden_min(double lo, double hi, const std::function<double(double)>& fn) {
  double a = lo, b = hi;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  for (int it = 0; it < 80 && (b - a) > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = fn(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

BruteForceResult brute_force_theta(const Eigen::MatrixXd& Y,
                                   const MQuantileSpec& spec,
                                   const SearchBox& box, double grid_step) {
  spec.validate();
  const int p = static_cast<int>(Y.cols());
  if (p > 2) throw InvalidArgument("brute_force_theta: dimension must be 1 or 2");
  if (p != spec.dim() || box.lo.size() != p || box.hi.size() != p)
    throw InvalidArgument("brute_force_theta: dimension mismatch");
  if (!(grid_step > 0.0))
    throw InvalidArgument("brute_force_theta: grid_step must be positive");
  for (int j = 0; j < p; ++j)
    if (!(box.hi(j) > box.lo(j)))
      throw InvalidArgument("brute_force_theta: empty search box");

  // tau above 1/2 is handled by the same reflection the estimator contract
  // documents; the grid then searches the same function the solver roots.
  double tau = spec.tau;
  Eigen::VectorXd u = spec.u / spec.u.norm();
  if (tau > 0.5) {
    tau = 1.0 - tau;
    u = -u;
  }
  const double c = spec.huber.c;
  const double delta = spec.huber.delta;

  const auto objective = [&](const Eigen::VectorXd& theta) {
    return mean_score_norm(Y, theta, tau, u, c, delta);
  };

  std::vector<int> counts(p);
  for (int j = 0; j < p; ++j)
    counts[j] = static_cast<int>(std::floor((box.hi(j) - box.lo(j)) / grid_step)) + 1;

  Eigen::VectorXd best = box.lo;
  double best_val = objective(best);
  std::vector<int> best_idx(p, 0);
  Eigen::VectorXd theta(p);
  if (p == 1) {
    for (int i0 = 0; i0 < counts[0]; ++i0) {
      theta(0) = box.lo(0) + i0 * grid_step;
      const double v = objective(theta);
      if (v < best_val) {
        best_val = v;
        best = theta;
        best_idx = {i0};
      }
    }
  } else {
    for (int i0 = 0; i0 < counts[0]; ++i0) {
      theta(0) = box.lo(0) + i0 * grid_step;
      for (int i1 = 0; i1 < counts[1]; ++i1) {
        theta(1) = box.lo(1) + i1 * grid_step;
        const double v = objective(theta);
        if (v < best_val) {
          best_val = v;
          best = theta;
          best_idx = {i0, i1};
        }
      }
    }
  }

  for (int j = 0; j < p; ++j)
    if (best_idx[j] == 0 || best_idx[j] >= counts[j] - 1)
      throw InvalidArgument(
          "brute_force_theta: argmin touched the search box boundary; "
          "enlarge the box");

  // One golden-section pass per coordinate inside the winning cell.
  Eigen::VectorXd refined = best;
  for (int j = 0; j < p; ++j) {
    const double lo = refined(j) - grid_step;
    const double hi = refined(j) + grid_step;
    refined(j) = golden_min(lo, hi, [&](double x) {
      Eigen::VectorXd t = refined;
      t(j) = x;
      return objective(t);
    });
  }

  BruteForceResult out;
  out.theta = refined;
  out.objective = objective(refined);
  out.grid_step = grid_step;
  return out;
}

double univariate_quantile_oracle(const Eigen::VectorXd& y, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw InvalidArgument("quantile oracle: tau must lie inside (0,1)");
  const int n = static_cast<int>(y.size());
  if (n < 1) throw InvalidArgument("quantile oracle: empty sample");
  std::vector<double> sorted(y.data(), y.data() + n);
  std::sort(sorted.begin(), sorted.end());
  int idx = static_cast<int>(std::ceil(tau * n));
  idx = std::clamp(idx, 1, n);
  return sorted[idx - 1];
}

double univariate_expectile_oracle(const Eigen::VectorXd& y, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw InvalidArgument("expectile oracle: tau must lie inside (0,1)");
  const int n = static_cast<int>(y.size());
  if (n < 1) throw InvalidArgument("expectile oracle: empty sample");
  double e = y.mean();
  for (int it = 0; it < 100000; ++it) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = y(i) > e ? 2.0 * tau : 2.0 * (1.0 - tau);
      num += w * y(i);
      den += w;
    }
    const double next = num / den;
    const double delta = std::abs(next - e);
    e = next;
    if (delta <= 1e-12 * std::max(1.0, std::abs(e))) break;
  }
  return e;
}

void DgpConfig::validate() const {
  if (kind != "gaussian-linear" && kind != "correlated-gaussian" &&
      kind != "contaminated")
    throw InvalidArgument("dgp: unknown kind '" + kind + "'");
  if (n < 2) throw InvalidArgument("dgp: n must be at least 2");
  if (k < 1) throw InvalidArgument("dgp: k must be at least 1");
  if (p < 1) throw InvalidArgument("dgp: p must be at least 1");
  if (coef.size() != 0 && (coef.rows() != k || coef.cols() != p))
    throw InvalidArgument("dgp: coef must be k x p");
  if (!(noise_scale > 0.0)) throw InvalidArgument("dgp: noise_scale must be positive");
  if (!(rho > -1.0 && rho < 1.0)) throw InvalidArgument("dgp: rho must lie in (-1,1)");
  if (!(contamination_rate >= 0.0 && contamination_rate <= 1.0))
    throw InvalidArgument("dgp: contamination_rate must lie in [0,1]");
}

Eigen::MatrixXd DgpConfig::effective_coef() const {
  if (coef.size() != 0) return coef;
  Eigen::MatrixXd B(k, p);
  for (int j = 0; j < k; ++j)
    for (int l = 0; l < p; ++l)
      B(j, l) = 1.0 + 0.5 * j - 0.25 * l;
  return B;
}

SimulatedData simulate_dgp(const DgpConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  SimulatedData out;
  out.coef = cfg.effective_coef();
  out.X.resize(cfg.n, cfg.k);
  out.Y.resize(cfg.n, cfg.p);
  for (int i = 0; i < cfg.n; ++i) {
    out.X(i, 0) = 1.0;
    for (int j = 1; j < cfg.k; ++j) out.X(i, j) = rng.normal();
    // Equicorrelated Gaussian noise via a common factor.
    const double shared = rng.normal();
    const double rho = (cfg.kind == "correlated-gaussian") ? cfg.rho : 0.0;
    const double a = std::sqrt(std::abs(rho));
    const double sign = rho < 0.0 ? -1.0 : 1.0;
    for (int l = 0; l < cfg.p; ++l) {
      double z = rng.normal();
      double eps = a * (l % 2 == 1 ? sign : 1.0) * shared +
                   std::sqrt(1.0 - std::abs(rho)) * z;
      out.Y(i, l) = cfg.noise_scale * eps;
    }
    out.Y.row(i) += out.X.row(i) * out.coef;
  }
  if (cfg.kind == "contaminated") {
    std::uint64_t mix = cfg.seed;
    const std::uint64_t sub = splitmix64(mix);
    out.Y = contaminate(out.Y, cfg.contamination_rate,
                        cfg.contamination_scale * cfg.noise_scale, sub);
  }
  return out;
}

Eigen::MatrixXd contaminate(const Eigen::MatrixXd& Y, double rate, double scale,
                            std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0))
    throw InvalidArgument("contaminate: rate must lie in [0,1]");
  Rng rng(seed);
  Eigen::MatrixXd out = Y;
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    if (rng.uniform01() >= rate) continue;
    for (Eigen::Index l = 0; l < Y.cols(); ++l)
      out(i, l) += scale * rng.cauchy();
  }
  return out;
}

CoverageResult run_coverage(const DgpConfig& dgp, const MQuantileSpec& spec,
                            int reps, double level, int workers) {
  dgp.validate();
  spec.validate();
  if (reps < 1) throw InvalidArgument("run_coverage: reps must be positive");
  if (!(level >= 0.0 && level < 1.0))
    throw InvalidArgument("run_coverage: level must lie in [0,1)");
  if (dgp.k < 2)
    throw InvalidArgument("run_coverage: DGP needs at least one slope covariate");
  if (dgp.p != spec.dim())
    throw InvalidArgument("run_coverage: spec dimension does not match DGP");

  const double z =
      level == 0.0
          ? 0.0
          : boost::math::quantile(boost::math::normal(), 0.5 * (1.0 + level));
  const Eigen::MatrixXd truth = dgp.effective_coef();
  const int k = dgp.k, p = dgp.p;

  std::vector<double> covered(static_cast<std::size_t>(reps), -1.0);
  parallel_for(
      static_cast<std::size_t>(reps),
      [&](std::size_t rep) {
        DgpConfig local = dgp;
        local.seed = Rng::stream(dgp.seed, rep + 1).next_u64();
        try {
          const SimulatedData sim = simulate_dgp(local);
          const MQuantileFit fit = fit_unconditional(sim.Y, spec);
          if (!fit.converged) return;
          UpeFit upe = umqpe_linear(sim.Y, sim.X, fit);
          const Eigen::MatrixXd v = asymptotic_covariance(sim.Y, sim.X, fit, upe);
          double hits = 0.0;
          int cells = 0;
          for (int j = 1; j < k; ++j) {
            for (int l = 0; l < p; ++l) {
              const int idx = l * k + j;
              const double se = std::sqrt(v(idx, idx) / sim.Y.rows());
              const double err = std::abs(upe.alpha(j, l) - truth(j, l));
              hits += (err <= z * se) ? 1.0 : 0.0;
              ++cells;
            }
          }
          covered[rep] = hits / cells;
        } catch (const Error&) {
          // leave the slot at -1: counted as a failed replication
        }
      },
      workers);

  CoverageResult out;
  out.z = z;
  out.reps_run = reps;
  double total = 0.0;
  int ok = 0;
  for (double v : covered) {
    if (v < 0.0) continue;
    total += v;
    ++ok;
  }
  out.reps_failed = reps - ok;
  if (out.reps_failed > 0.02 * reps)
    throw ConvergenceError("run_coverage: more than 2% of replications failed");
  out.coverage = ok > 0 ? total / ok : 0.0;
  return out;
}

}  // namespace mqrif
