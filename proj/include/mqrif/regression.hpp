#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mqrif/bspline.hpp"
#include "mqrif/rif.hpp"
#include "mqrif/solver.hpp"

namespace mqrif {

// Partial effects of covariates on an unconditional target, obtained by
// regressing the recentered influence function on the design.
struct UpeFit {
  Eigen::MatrixXd alpha;  // k x p coefficient matrix
  Eigen::MatrixXd se;     // k x p, empty until inference is attached
  Eigen::MatrixXd v_hat;  // kp x kp, empty until inference is attached
  MQuantileSpec spec;
  std::string method;  // "linear" or "spline"
  double omega_x_cond = 0.0;
  // Spline diagnostics (empty for the linear method).
  int collapsed_knots = 0;
};

struct SplineConfig {
  int degree = 3;
  int interior_knots = 5;
  // Columns of X to expand (never 0: that is the intercept).
  std::vector<int> covariate_indices;

  void validate() const;
};

// vec() convention used for v_hat indexing: column-major stacking of the
// k x p coefficient matrix, entry (j,l) at position l*k + j.
inline int vec_index(int j, int l, int k) { return l * k + j; }

UpeFit umqpe_linear(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                    const MQuantileFit& fit);

// Difference of mean RIF between the x=1 and x=0 groups.
Eigen::VectorXd upe_binary(const Eigen::MatrixXd& Y,
                           const Eigen::VectorXd& x_binary,
                           const MQuantileFit& fit);

UpeFit umqpe_splines(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                     const MQuantileFit& fit, const SplineConfig& cfg);

// Influence-aware covariance of vec(alpha) for the linear method: the
// estimation error of theta enters through a numeric gradient of the
// coefficient map theta -> beta(theta).  Scale by 1/n for variances.
Eigen::MatrixXd asymptotic_covariance(const Eigen::MatrixXd& Y,
                                      const Eigen::MatrixXd& X,
                                      const MQuantileFit& fit,
                                      const UpeFit& upe);

// Fills se and v_hat of a linear UpeFit in place.
void attach_asymptotic_inference(UpeFit& upe, const Eigen::MatrixXd& Y,
                                 const Eigen::MatrixXd& X,
                                 const MQuantileFit& fit);

// Joint covariance across several directions sharing tau, c and X:
// J*kp square with block (r,s) the cross moment of the per-row scores.
Eigen::MatrixXd joint_direction_covariance(
    const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
    const std::vector<MQuantileFit>& fits, const std::vector<UpeFit>& upes);

struct BootstrapResult {
  Eigen::MatrixXd lower;    // k x p
  Eigen::MatrixXd upper;    // k x p
  Eigen::MatrixXd estimate; // k x p, point estimate on the full sample
  Eigen::MatrixXd se_boot;  // k x p, replicate standard deviation
  int b_total = 0;
  int n_failed = 0;
  double level = 0.0;
  std::uint64_t seed = 0;
};

// Pairs (row) resampling percentile intervals for the partial effects.
// Replicates that fail to converge are skipped and counted; more than 5%
// failures is an error.  A constant response is handled exactly: the
// target of a point mass is the point itself with zero influence, so all
// replicates produce the same coefficients and the intervals have zero
// width.
BootstrapResult bootstrap_ci(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                             const MQuantileSpec& spec,
                             const std::string& method, int B, double level,
                             std::uint64_t seed,
                             const std::optional<SplineConfig>& spline_cfg = {},
                             int workers = 0);

struct LinearityTest {
  double statistic = 0.0;  // Pillai trace of the added spline columns
  double approx_p = 1.0;
  double f_stat = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
  int added_columns = 0;
};

// Multivariate test of the linear RIF regression against its spline
// extension (the spline design nests the linear one by construction).
LinearityTest linearity_test(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                             const MQuantileFit& fit, const SplineConfig& cfg);

}  // namespace mqrif
