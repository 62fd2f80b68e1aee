#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mqrif {

// Everything the command line (or a config file) can set.  Flags override
// config-file values, which override the defaults below.
struct RunConfig {
  // input data
  std::string data_path;
  std::vector<std::string> responses;
  std::vector<std::string> covariates;
  std::vector<std::string> categorical;  // "name=baseline" entries
  std::vector<std::string> log_columns;
  bool no_intercept = false;

  // estimation target
  std::vector<double> taus{0.5};
  std::string direction = "equal-weights";  // preset or comma separated numbers
  std::string c_arg = "1";                  // number or "cv"
  double delta = 1.0;

  // tuning-constant selection
  int k_folds = 5;
  int grid_size = 50;
  bool cv_per_tau = true;

  // bootstrap
  int bootstrap_b = 1000;
  double level = 0.95;

  // partial-effect method
  std::string method = "linear";  // or "spline"
  std::vector<std::string> spline_covariates;
  int degree = 3;
  int interior_knots = 5;

  // contours
  int n_directions = 360;

  // synthetic data
  std::string kind = "gaussian-linear";
  int sim_n = 500;
  int sim_k = 2;
  int sim_p = 2;
  double noise_scale = 1.0;
  double rho = 0.0;
  double contamination_rate = 0.1;
  double contamination_scale = 5.0;
  int reps = 500;

  // solver
  int max_iter = 200;
  double tol = 1e-8;

  // misc
  std::string config_path;  // ini file applied for options not given as flags
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  int threads = 0;
};

// Exit codes: 0 success, 2 data or argument problems, 3 convergence or
// numerical failures, 1 anything unexpected.
int run_command(const std::string& command, const RunConfig& cfg);

}  // namespace mqrif
