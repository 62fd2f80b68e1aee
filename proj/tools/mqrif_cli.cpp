#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "mqrif/cli.hpp"
#include "mqrif/errors.hpp"

namespace {

// CLI11 only reads config files registered on the top-level app, and the
// file option here lives on each subcommand, so the ini is applied by hand
// after parsing.  Options already set on the command line keep their value.
void apply_config_file(CLI::App* sub, const std::string& path) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI{}.from_file(path);
  } catch (const CLI::Error& e) {
    throw mqrif::DataError("config file '" + path + "': " + e.what());
  }
  for (const CLI::ConfigItem& item : items) {
    if (!item.parents.empty())
      throw mqrif::InvalidArgument("config file '" + path +
                                   "': sections are not supported");
    CLI::Option* op = sub->get_option_no_throw("--" + item.name);
    if (op == nullptr && item.name.size() == 1)
      op = sub->get_option_no_throw("-" + item.name);
    if (op == nullptr) op = sub->get_option_no_throw(item.name);
    if (op == nullptr)
      throw mqrif::InvalidArgument("config file '" + path +
                                   "': unknown option '" + item.name + "'");
    if (!op->empty()) continue;
    try {
      if (op->get_expected_min() == 0) {
        if (item.inputs.size() > 1)
          throw mqrif::InvalidArgument("config file '" + path +
                                       "': flag '" + item.name +
                                       "' takes at most one value");
        const std::string raw = item.inputs.empty() ? "true" : item.inputs[0];
        op->add_result(op->get_flag_value(item.name, raw));
      } else {
        op->add_result(item.inputs);
      }
      op->run_callback();
    } catch (const CLI::Error& e) {
      throw mqrif::InvalidArgument("config file '" + path + "', option '" +
                                   item.name + "': " + e.what());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  mqrif::RunConfig cfg;

  CLI::App app{
      "Directional M-quantiles for multivariate responses: point fits, "
      "influence-function partial effects, tuning-constant selection, "
      "bootstrap intervals, contours and synthetic benchmarks"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* s) {
    s->add_option("--config", cfg.config_path,
                  "Read options from a file; command-line flags win");
    s->add_option("--out", cfg.out_dir, "Output directory (created if absent)")
        ->capture_default_str();
    s->add_option("--seed", cfg.seed, "Master RNG seed")->capture_default_str();
    s->add_option("--threads", cfg.threads,
                  "Worker threads (0 = MQRIF_THREADS env or hardware)")
        ->capture_default_str();
  };
  auto add_data = [&](CLI::App* s) {
    s->add_option("--data", cfg.data_path, "Input CSV file");
    s->add_option("--response", cfg.responses,
                  "Response column names (comma separated)")
        ->delimiter(',');
    s->add_option("--covariates", cfg.covariates,
                  "Covariate column names (comma separated)")
        ->delimiter(',');
    s->add_option("--categorical", cfg.categorical,
                  "Categorical covariate with its dummy baseline, name=level")
        ->delimiter(',');
    s->add_option("--log", cfg.log_columns, "Columns to log-transform")
        ->delimiter(',');
    s->add_flag("--no-intercept", cfg.no_intercept,
                "Do not prepend an intercept column to the design");
  };
  auto add_target = [&](CLI::App* s) {
    s->add_option("--tau", cfg.taus, "Asymmetry levels in (0,1)")
        ->delimiter(',');
    s->add_option("--direction", cfg.direction,
                  "Unit direction: 'equal-weights' or comma separated numbers")
        ->capture_default_str();
    s->add_option("--c", cfg.c_arg,
                  "Tuning constant: a number >= 0, or 'cv' to cross-validate")
        ->capture_default_str();
    s->add_option("--delta", cfg.delta, "Directional weight exponent")
        ->capture_default_str();
  };
  auto add_solver = [&](CLI::App* s) {
    s->add_option("--max-iter", cfg.max_iter, "Iteration budget per fit")
        ->capture_default_str();
    s->add_option("--tol", cfg.tol, "Step-size convergence tolerance")
        ->capture_default_str();
  };
  auto add_cv = [&](CLI::App* s) {
    s->add_option("--k-folds", cfg.k_folds, "Folds for --c cv")
        ->capture_default_str();
    s->add_option("--grid-size", cfg.grid_size, "Grid points for --c cv")
        ->capture_default_str();
    s->add_option("--cv-per-tau", cfg.cv_per_tau,
                  "Re-run the c cross validation at every tau (default) or "
                  "reuse the first tau's winner")
        ->capture_default_str();
  };
  auto add_method = [&](CLI::App* s) {
    s->add_option("--method", cfg.method, "Partial effects: linear or spline")
        ->capture_default_str();
    s->add_option("--spline-covariates", cfg.spline_covariates,
                  "Design columns to expand in splines")
        ->delimiter(',');
    s->add_option("--degree", cfg.degree, "Spline degree")
        ->capture_default_str();
    s->add_option("--interior-knots", cfg.interior_knots,
                  "Interior knots per expanded covariate")
        ->capture_default_str();
  };
  auto add_sim = [&](CLI::App* s) {
    s->add_option("--kind", cfg.kind,
                  "gaussian-linear, correlated-gaussian or contaminated")
        ->capture_default_str();
    s->add_option("--n", cfg.sim_n, "Sample size")->capture_default_str();
    s->add_option("--k", cfg.sim_k, "Design columns including the intercept")
        ->capture_default_str();
    s->add_option("--p", cfg.sim_p, "Response dimension")
        ->capture_default_str();
    s->add_option("--noise-scale", cfg.noise_scale, "Noise scale")
        ->capture_default_str();
    s->add_option("--rho", cfg.rho, "Noise correlation across responses")
        ->capture_default_str();
    s->add_option("--contamination-rate", cfg.contamination_rate,
                  "Fraction of rows shocked (contaminated kind)")
        ->capture_default_str();
    s->add_option("--contamination-scale", cfg.contamination_scale,
                  "Shock scale (contaminated kind)")
        ->capture_default_str();
  };

  CLI::App* fit = app.add_subcommand(
      "fit", "Point estimates with influence diagnostics and covariances");
  add_data(fit);
  add_target(fit);
  add_cv(fit);
  add_solver(fit);
  add_common(fit);

  CLI::App* upe = app.add_subcommand(
      "upe", "Covariate partial effects via influence-function regression");
  add_data(upe);
  add_target(upe);
  add_cv(upe);
  add_method(upe);
  add_solver(upe);
  add_common(upe);

  CLI::App* cv = app.add_subcommand(
      "cv", "Cross-validate the tuning constant on a grid");
  add_data(cv);
  add_target(cv);
  add_cv(cv);
  add_solver(cv);
  add_common(cv);

  CLI::App* boot = app.add_subcommand(
      "boot", "Pairs-bootstrap percentile intervals for the partial effects");
  add_data(boot);
  add_target(boot);
  add_cv(boot);
  add_method(boot);
  boot->add_option("--bootstrap-b", cfg.bootstrap_b, "Bootstrap replicates")
      ->capture_default_str();
  boot->add_option("--level", cfg.level, "Interval level in (0,1)")
      ->capture_default_str();
  add_solver(boot);
  add_common(boot);

  CLI::App* contour = app.add_subcommand(
      "contour", "Directional sweep at fixed tau and c");
  add_data(contour);
  add_target(contour);
  add_cv(contour);
  contour->add_option("--directions", cfg.n_directions, "Sweep directions")
      ->capture_default_str();
  add_solver(contour);
  add_common(contour);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Draw a synthetic dataset and write it as CSV");
  add_sim(simulate);
  add_common(simulate);

  CLI::App* coverage = app.add_subcommand(
      "coverage", "Monte Carlo coverage of the asymptotic slope intervals");
  add_sim(coverage);
  add_target(coverage);
  coverage->add_option("--reps", cfg.reps, "Monte Carlo repetitions")
      ->capture_default_str();
  coverage->add_option("--level", cfg.level, "Interval level in (0,1)")
      ->capture_default_str();
  add_solver(coverage);
  add_common(coverage);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const auto subs = app.get_subcommands();
  if (!cfg.config_path.empty()) {
    try {
      apply_config_file(subs.front(), cfg.config_path);
    } catch (const mqrif::DataError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    } catch (const mqrif::InvalidArgument& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return mqrif::run_command(subs.front()->get_name(), cfg);
}
