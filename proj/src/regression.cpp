#include "mqrif/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>

#include "mqrif/errors.hpp"
#include "mqrif/parallel.hpp"
#include "mqrif/rng.hpp"

namespace mqrif {

namespace {

void check_design(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X) {
  if (Y.rows() != X.rows())
    throw InvalidArgument("regression: Y and X row mismatch");
  if (X.rows() < X.cols())
    throw DataError("regression: fewer rows than design columns");
  if (!X.allFinite()) throw DataError("regression: non-finite design values");
}

double sym_condition(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(es.eigenvalues().size() - 1);
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

Eigen::ColPivHouseholderQR<Eigen::MatrixXd> checked_qr(const Eigen::MatrixXd& X,
                                                       const char* who) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols())
    throw RankDeficiencyError(std::string(who) + ": design matrix is rank deficient");
  return qr;
}

// Fitted coefficients as a function of the center, with the scale matrix
// recomputed there.  The regression target is the recentered value
// theta + influence, the same quantity the point estimate regresses, so the
// direct theta term and the influence shift can cancel where they should.
// At the mean the recentered value is the observation itself and this map
// is constant.
Eigen::MatrixXd alpha_of_theta(const Eigen::MatrixXd& Y,
                               const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& xqr,
                               const MQuantileSpec& spec,
                               const Eigen::VectorXd& theta) {
  MQuantileFit shifted;
  shifted.theta = theta;
  shifted.spec = spec;
  shifted.converged = true;
  const RifSample rs = influence(Y, shifted);
  return xqr.solve(rs.rif);
}

// Per-row contributions to the sampling error of vec(alpha), n x kp.
Eigen::MatrixXd alpha_score_rows(const Eigen::MatrixXd& Y,
                                 const Eigen::MatrixXd& X,
                                 const MQuantileFit& fit) {
  const int n = static_cast<int>(Y.rows());
  const int k = static_cast<int>(X.cols());
  const int p = static_cast<int>(Y.cols());
  const auto xqr = checked_qr(X, "asymptotic_covariance");
  const MHat m = m_matrix(Y, fit);
  const RifSample rs = influence(Y, fit, m);

  const Eigen::MatrixXd alpha = xqr.solve(rs.rif);  // k x p

  // Numeric gradient of theta -> vec(alpha(theta)), kp x p.
  Eigen::MatrixXd grad(k * p, p);
  for (int j = 0; j < p; ++j) {
    const double h = std::cbrt(std::numeric_limits<double>::epsilon()) *
                     std::max(1.0, std::abs(fit.theta(j)));
    Eigen::VectorXd up = fit.theta, down = fit.theta;
    up(j) += h;
    down(j) -= h;
    const Eigen::MatrixXd alpha_up = alpha_of_theta(Y, xqr, fit.spec, up);
    const Eigen::MatrixXd alpha_down = alpha_of_theta(Y, xqr, fit.spec, down);
    const Eigen::MatrixXd diff = (alpha_up - alpha_down) / (2.0 * h);
    for (int l = 0; l < p; ++l)
      grad.block(l * k, j, k, 1) = diff.col(l);
  }

  const Eigen::MatrixXd omega = (X.transpose() * X) / static_cast<double>(n);
  const Eigen::LDLT<Eigen::MatrixXd> omega_ldlt(omega);
  const Eigen::MatrixXd omega_inv_xt = omega_ldlt.solve(X.transpose());  // k x n
  const Eigen::MatrixXd resid = rs.rif - X * alpha;                      // n x p

  Eigen::MatrixXd S(n, k * p);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd lead = grad * rs.influence.row(i).transpose();
    for (int l = 0; l < p; ++l)
      for (int j = 0; j < k; ++j)
        S(i, l * k + j) = lead(l * k + j) + omega_inv_xt(j, i) * resid(i, l);
  }
  return S;
}

Eigen::MatrixXd degenerate_alpha(const Eigen::MatrixXd& Y,
                                 const Eigen::MatrixXd& X) {
  // Point-mass response: the target is the common row and the influence is
  // identically zero, so only the intercept carries it.
  const int k = static_cast<int>(X.cols());
  const int p = static_cast<int>(Y.cols());
  const Eigen::VectorXd theta = Y.row(0).transpose();
  const bool has_intercept = (X.col(0).array() == 1.0).all();
  if (has_intercept) {
    Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(k, p);
    alpha.row(0) = theta.transpose();
    return alpha;
  }
  const Eigen::MatrixXd rif =
      Eigen::VectorXd::Ones(Y.rows()) * theta.transpose();
  return checked_qr(X, "bootstrap_ci").solve(rif);
}

struct SplineDesign {
  Eigen::MatrixXd Z;
  std::vector<int> z_start;  // per X column
  std::vector<int> z_count;  // 1 when the column stays linear
  std::vector<std::optional<BsplineBasis>> basis;  // engaged when expanded
  int collapsed = 0;
};

SplineDesign build_spline_design(const Eigen::MatrixXd& X,
                                 const SplineConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(X.rows());
  const int k = static_cast<int>(X.cols());
  std::vector<bool> expand(static_cast<std::size_t>(k), false);
  for (int idx : cfg.covariate_indices) {
    if (idx <= 0 || idx >= k)
      throw InvalidArgument(
          "spline: covariate index out of range (index 0 is the intercept)");
    if (expand[static_cast<std::size_t>(idx)])
      throw InvalidArgument("spline: covariate index repeated");
    expand[static_cast<std::size_t>(idx)] = true;
  }

  SplineDesign out;
  out.z_start.resize(static_cast<std::size_t>(k));
  out.z_count.resize(static_cast<std::size_t>(k));
  out.basis.resize(static_cast<std::size_t>(k));
  int cols = 0;
  for (int j = 0; j < k; ++j) {
    out.z_start[static_cast<std::size_t>(j)] = cols;
    if (!expand[static_cast<std::size_t>(j)]) {
      out.z_count[static_cast<std::size_t>(j)] = 1;
      cols += 1;
      continue;
    }
    int collapsed = 0;
    out.basis[static_cast<std::size_t>(j)] =
        BsplineBasis::from_data(X.col(j), cfg.interior_knots, cfg.degree, &collapsed);
    out.collapsed += collapsed;
    // Drop the first basis function: the basis sums to one, so together
    // with the intercept the span (and any linear fit) is unchanged.
    out.z_count[static_cast<std::size_t>(j)] =
        out.basis[static_cast<std::size_t>(j)]->size() - 1;
    cols += out.z_count[static_cast<std::size_t>(j)];
  }

  out.Z.resize(n, cols);
  for (int j = 0; j < k; ++j) {
    const int start = out.z_start[static_cast<std::size_t>(j)];
    if (!out.basis[static_cast<std::size_t>(j)]) {
      out.Z.col(start) = X.col(j);
      continue;
    }
    const auto& basis = *out.basis[static_cast<std::size_t>(j)];
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd row = basis.eval(X(i, j));
      for (int b = 1; b < basis.size(); ++b)
        out.Z(i, start + b - 1) = row(b);
    }
  }
  return out;
}

double type7_quantile(std::vector<double>& sorted, double q) {
  const std::size_t m = sorted.size();
  if (m == 1) return sorted[0];
  const double pos = q * static_cast<double>(m - 1);
  const std::size_t left = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(left);
  double v = sorted[left];
  if (left + 1 < m) v += frac * (sorted[left + 1] - v);
  return v;
}

}  // namespace

void SplineConfig::validate() const {
  if (degree < 0) throw InvalidArgument("spline: degree must be >= 0");
  if (interior_knots < 0)
    throw InvalidArgument("spline: interior_knots must be >= 0");
  if (covariate_indices.empty())
    throw InvalidArgument("spline: no covariates selected for expansion");
}

UpeFit umqpe_linear(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                    const MQuantileFit& fit) {
  check_design(Y, X);
  const auto xqr = checked_qr(X, "umqpe_linear");
  const RifSample rs = influence(Y, fit);
  UpeFit out;
  out.alpha = xqr.solve(rs.rif);
  out.spec = fit.spec;
  out.method = "linear";
  out.omega_x_cond =
      sym_condition((X.transpose() * X) / static_cast<double>(X.rows()));
  return out;
}

Eigen::VectorXd upe_binary(const Eigen::MatrixXd& Y,
                           const Eigen::VectorXd& x_binary,
                           const MQuantileFit& fit) {
  if (Y.rows() != x_binary.size())
    throw InvalidArgument("upe_binary: Y and x row mismatch");
  for (Eigen::Index i = 0; i < x_binary.size(); ++i)
    if (x_binary(i) != 0.0 && x_binary(i) != 1.0)
      throw DataError("upe_binary: x must contain only 0 and 1");
  const RifSample rs = influence(Y, fit);
  const int p = static_cast<int>(Y.cols());
  Eigen::VectorXd mean1 = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd mean0 = Eigen::VectorXd::Zero(p);
  int n1 = 0, n0 = 0;
  for (Eigen::Index i = 0; i < x_binary.size(); ++i) {
    if (x_binary(i) == 1.0) {
      mean1 += rs.rif.row(i).transpose();
      ++n1;
    } else {
      mean0 += rs.rif.row(i).transpose();
      ++n0;
    }
  }
  if (n1 == 0 || n0 == 0)
    throw DataError("upe_binary: one of the groups is empty");
  return mean1 / n1 - mean0 / n0;
}

UpeFit umqpe_splines(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                     const MQuantileFit& fit, const SplineConfig& cfg) {
  check_design(Y, X);
  const SplineDesign design = build_spline_design(X, cfg);
  const auto zqr = checked_qr(design.Z, "umqpe_splines");
  const RifSample rs = influence(Y, fit);
  const Eigen::MatrixXd gamma = zqr.solve(rs.rif);  // q x p

  const int n = static_cast<int>(Y.rows());
  const int k = static_cast<int>(X.cols());
  const int p = static_cast<int>(Y.cols());
  UpeFit out;
  out.alpha.resize(k, p);
  for (int j = 0; j < k; ++j) {
    const int start = design.z_start[static_cast<std::size_t>(j)];
    if (!design.basis[static_cast<std::size_t>(j)]) {
      out.alpha.row(j) = gamma.row(start);
      continue;
    }
    // Average derivative of the fitted coordinate functions over the
    // sample values of this covariate.
    const auto& basis = *design.basis[static_cast<std::size_t>(j)];
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(p);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd db = basis.deriv(X(i, j));
      for (int b = 1; b < basis.size(); ++b)
        acc += db(b) * gamma.row(start + b - 1);
    }
    out.alpha.row(j) = acc / static_cast<double>(n);
  }
  out.spec = fit.spec;
  out.method = "spline";
  out.omega_x_cond = sym_condition(
      (design.Z.transpose() * design.Z) / static_cast<double>(n));
  out.collapsed_knots = design.collapsed;
  return out;
}

Eigen::MatrixXd asymptotic_covariance(const Eigen::MatrixXd& Y,
                                      const Eigen::MatrixXd& X,
                                      const MQuantileFit& fit,
                                      const UpeFit& upe) {
  check_design(Y, X);
  if (upe.method != "linear")
    throw InvalidArgument(
        "asymptotic_covariance: closed-form inference covers the linear "
        "method only; use bootstrap_ci for splines");
  if (upe.alpha.rows() != X.cols() || upe.alpha.cols() != Y.cols())
    throw InvalidArgument("asymptotic_covariance: alpha shape mismatch");
  const Eigen::MatrixXd S = alpha_score_rows(Y, X, fit);
  return (S.transpose() * S) / static_cast<double>(Y.rows());
}

void attach_asymptotic_inference(UpeFit& upe, const Eigen::MatrixXd& Y,
                                 const Eigen::MatrixXd& X,
                                 const MQuantileFit& fit) {
  upe.v_hat = asymptotic_covariance(Y, X, fit, upe);
  const int k = static_cast<int>(upe.alpha.rows());
  const int p = static_cast<int>(upe.alpha.cols());
  const double n = static_cast<double>(Y.rows());
  upe.se.resize(k, p);
  for (int j = 0; j < k; ++j)
    for (int l = 0; l < p; ++l) {
      const int idx = vec_index(j, l, k);
      upe.se(j, l) = std::sqrt(upe.v_hat(idx, idx) / n);
    }
}

Eigen::MatrixXd joint_direction_covariance(
    const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
    const std::vector<MQuantileFit>& fits, const std::vector<UpeFit>& upes) {
  if (fits.empty() || fits.size() != upes.size())
    throw InvalidArgument("joint covariance: fits and upes must align");
  const double tau = fits.front().spec.tau;
  const double c = fits.front().spec.huber.c;
  for (const auto& f : fits)
    if (f.spec.tau != tau || f.spec.huber.c != c)
      throw InvalidArgument("joint covariance: all fits must share tau and c");
  for (const auto& u : upes)
    if (u.method != "linear")
      throw InvalidArgument("joint covariance: linear method only");

  const int J = static_cast<int>(fits.size());
  const int kp = static_cast<int>(X.cols() * Y.cols());
  std::vector<Eigen::MatrixXd> rows;
  rows.reserve(static_cast<std::size_t>(J));
  for (const auto& f : fits) rows.push_back(alpha_score_rows(Y, X, f));

  Eigen::MatrixXd out(J * kp, J * kp);
  for (int r = 0; r < J; ++r)
    for (int s = 0; s < J; ++s)
      out.block(r * kp, s * kp, kp, kp) =
          (rows[static_cast<std::size_t>(r)].transpose() *
           rows[static_cast<std::size_t>(s)]) /
          static_cast<double>(Y.rows());
  return out;
}

BootstrapResult bootstrap_ci(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                             const MQuantileSpec& spec,
                             const std::string& method, int B, double level,
                             std::uint64_t seed,
                             const std::optional<SplineConfig>& spline_cfg,
                             int workers) {
  check_design(Y, X);
  spec.validate();
  if (method != "linear" && method != "spline")
    throw InvalidArgument("bootstrap_ci: method must be linear or spline");
  if (method == "spline" && !spline_cfg)
    throw InvalidArgument("bootstrap_ci: spline method needs a SplineConfig");
  if (B < 100) throw InvalidArgument("bootstrap_ci: B must be at least 100");
  if (!(level > 0.0 && level < 1.0))
    throw InvalidArgument("bootstrap_ci: level must lie inside (0,1)");

  const int n = static_cast<int>(Y.rows());
  const int k = static_cast<int>(X.cols());
  const int p = static_cast<int>(Y.cols());

  const auto alpha_for = [&](const Eigen::MatrixXd& Yb,
                             const Eigen::MatrixXd& Xb) -> Eigen::MatrixXd {
    try {
      const MQuantileFit fitb = fit_unconditional(Yb, spec);
      if (!fitb.converged)
        throw ConvergenceError("bootstrap_ci: replicate fit did not converge");
      if (method == "linear") return umqpe_linear(Yb, Xb, fitb).alpha;
      return umqpe_splines(Yb, Xb, fitb, *spline_cfg).alpha;
    } catch (const DegenerateDataError&) {
      return degenerate_alpha(Yb, Xb);
    }
  };

  BootstrapResult out;
  out.b_total = B;
  out.level = level;
  out.seed = seed;
  out.estimate = alpha_for(Y, X);

  Eigen::MatrixXd reps(B, k * p);
  std::vector<std::uint8_t> ok(static_cast<std::size_t>(B), 0);
  parallel_for(
      static_cast<std::size_t>(B),
      [&](std::size_t r) {
        Rng rng = Rng::stream(seed, r);
        Eigen::MatrixXd Yb(n, p), Xb(n, k);
        for (int i = 0; i < n; ++i) {
          const auto pick = static_cast<Eigen::Index>(
              rng.below(static_cast<std::uint64_t>(n)));
          Yb.row(i) = Y.row(pick);
          Xb.row(i) = X.row(pick);
        }
        try {
          const Eigen::MatrixXd alpha = alpha_for(Yb, Xb);
          for (int j = 0; j < k; ++j)
            for (int l = 0; l < p; ++l)
              reps(static_cast<Eigen::Index>(r), vec_index(j, l, k)) = alpha(j, l);
          ok[r] = 1;
        } catch (const Error&) {
          // skipped and counted below
        }
      },
      workers);

  int n_ok = 0;
  for (auto flag : ok) n_ok += flag;
  out.n_failed = B - n_ok;
  if (out.n_failed > 0.05 * B)
    throw ConvergenceError(
        "bootstrap_ci: more than 5% of replicates failed to produce a fit");

  out.lower.resize(k, p);
  out.upper.resize(k, p);
  out.se_boot.resize(k, p);
  std::vector<double> column;
  column.reserve(static_cast<std::size_t>(n_ok));
  for (int j = 0; j < k; ++j) {
    for (int l = 0; l < p; ++l) {
      column.clear();
      const int idx = vec_index(j, l, k);
      for (int r = 0; r < B; ++r)
        if (ok[static_cast<std::size_t>(r)]) column.push_back(reps(r, idx));
      std::sort(column.begin(), column.end());
      out.lower(j, l) = type7_quantile(column, 0.5 * (1.0 - level));
      out.upper(j, l) = type7_quantile(column, 0.5 * (1.0 + level));
      double mean = 0.0;
      for (double v : column) mean += v;
      mean /= static_cast<double>(column.size());
      double ss = 0.0;
      for (double v : column) ss += (v - mean) * (v - mean);
      out.se_boot(j, l) =
          column.size() > 1
              ? std::sqrt(ss / static_cast<double>(column.size() - 1))
              : 0.0;
    }
  }
  return out;
}

LinearityTest linearity_test(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                             const MQuantileFit& fit, const SplineConfig& cfg) {
  check_design(Y, X);
  const SplineDesign design = build_spline_design(X, cfg);
  const int n = static_cast<int>(Y.rows());
  const int p = static_cast<int>(Y.cols());
  const int q = static_cast<int>(design.Z.cols() - X.cols());

  LinearityTest out;
  out.added_columns = q;
  if (q <= 0) {
    out.statistic = 0.0;
    out.approx_p = 1.0;
    return out;
  }

  const RifSample rs = influence(Y, fit);
  const auto xqr = checked_qr(X, "linearity_test");
  const auto zqr = checked_qr(design.Z, "linearity_test");
  const Eigen::MatrixXd resid_lin = rs.rif - X * xqr.solve(rs.rif);
  const Eigen::MatrixXd resid_full = rs.rif - design.Z * zqr.solve(rs.rif);
  const Eigen::MatrixXd e_lin = resid_lin.transpose() * resid_lin;
  const Eigen::MatrixXd e_full = resid_full.transpose() * resid_full;
  const Eigen::MatrixXd hyp = e_lin - e_full;

  // Pillai trace: tr[H (H + E)^-1] with E the full-model residual SSCP;
  // H + E collapses to the nested model's SSCP.
  Eigen::FullPivLU<Eigen::MatrixXd> lu(e_lin);
  if (!lu.isInvertible())
    throw SingularMatrixError(
        "linearity_test: nested residual cross-products are singular");
  double v = (lu.solve(hyp)).trace();

  const double s = std::min(p, q);
  v = std::clamp(v, 0.0, s - 1e-12);
  const double m_par = 0.5 * (std::abs(q - p) - 1.0);
  const double n_par = 0.5 * (n - design.Z.cols() - p - 1.0);
  out.df1 = s * (2.0 * m_par + s + 1.0);
  out.df2 = s * (2.0 * n_par + s + 1.0);
  if (!(out.df2 > 0.0))
    throw DataError("linearity_test: sample too small for the F approximation");
  out.statistic = v;
  out.f_stat = ((2.0 * n_par + s + 1.0) / (2.0 * m_par + s + 1.0)) * (v / s) /
               (1.0 - v / s);
  const boost::math::fisher_f f_dist(out.df1, out.df2);
  out.approx_p = boost::math::cdf(boost::math::complement(f_dist, out.f_stat));
  return out;
}

}  // namespace mqrif
