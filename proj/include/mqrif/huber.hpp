#pragma once

#include <Eigen/Dense>

namespace mqrif {

// Parameters of the bounded multivariate score.  c = 0 gives the pure
// directional (quantile) score, large c the expectile-type linear score.
struct HuberParams {
  double c = 1.0;
  double delta = 1.0;
  // Residual norms at or below this are treated as exactly zero.
  double epsilon_norm = 1e-10;

  void validate() const;
};

// One estimation target: an asymmetry level tau in (0,1), a nonzero
// direction u (stored normalized), and the score parameters.
struct MQuantileSpec {
  double tau = 0.5;
  Eigen::VectorXd u;
  HuberParams huber;

  MQuantileSpec() = default;
  MQuantileSpec(double tau_in, Eigen::VectorXd u_in, HuberParams h = {});

  void validate() const;
  double zeta() const { return 1.0 - 2.0 * tau; }
  int dim() const { return static_cast<int>(u.size()); }
};

// Which algebraic form of the cos(phi) <= 0 branch of the directional
// weight to evaluate.  ReductionConsistent matches the univariate weights
// 2*tau above / 2*(1-tau) below and is the default everywhere; AsPrinted
// keeps the sign pattern found in circulation for side-by-side comparison
// (it fails the univariate reduction at cos(phi) = -1).
enum class EtaForm { ReductionConsistent, AsPrinted };

// Directional asymmetry weight eta_delta(phi) as a function of
// cos(phi) in [-1,1].  Identically 1 at tau = 1/2.
double eta_weight(double cos_phi, double tau, double delta,
                  EtaForm form = EtaForm::ReductionConsistent);

// Bounded score psi(r): r/c inside the ball of radius c, r/|r| outside,
// zero when |r| <= epsilon_norm.  Continuous across |r| = c.
Eigen::VectorXd psi(const Eigen::VectorXd& r, const HuberParams& params);

// Full per-observation estimating function eta_delta(phi) * psi(y - theta).
Eigen::VectorXd score(const Eigen::VectorXd& y, const Eigen::VectorXd& theta,
                      const MQuantileSpec& spec);

enum class JacobianMethod { CentralDiff, AnalyticLimit };

// d score / d theta, a p x p matrix.  CentralDiff perturbs theta one
// coordinate at a time with step cbrt(machine eps) * max(1, |theta|).
// AnalyticLimit is the closed form valid only at tau = 1/2 where the
// directional weight is constant: -I/c inside the ball, else
// -(I - r r^T / |r|^2)/|r|.
Eigen::MatrixXd score_jacobian(const Eigen::VectorXd& y,
                               const Eigen::VectorXd& theta,
                               const MQuantileSpec& spec,
                               JacobianMethod method = JacobianMethod::CentralDiff);

}  // namespace mqrif
