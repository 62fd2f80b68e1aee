#include "mqrif/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "mqrif/contour.hpp"
#include "mqrif/dataset.hpp"
#include "mqrif/errors.hpp"
#include "mqrif/io_util.hpp"
#include "mqrif/oracle.hpp"
#include "mqrif/regression.hpp"
#include "mqrif/rif.hpp"
#include "mqrif/solver.hpp"
#include "mqrif/tuning.hpp"

namespace mqrif {
namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

std::string tau_label(double tau) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", tau);
  return buf;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

double parse_number(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw InvalidArgument(what + " is not a number: '" + s + "'");
  }
  if (pos != s.size())
    throw InvalidArgument(what + " is not a number: '" + s + "'");
  return v;
}

Eigen::VectorXd parse_direction(const std::string& s, int p) {
  if (s == "equal-weights")
    return Eigen::VectorXd::Constant(p, 1.0 / std::sqrt(double(p)));
  const auto parts = split_commas(s);
  if (static_cast<int>(parts.size()) != p)
    throw InvalidArgument("direction has " + std::to_string(parts.size()) +
                          " entries for a " + std::to_string(p) +
                          "-dimensional response");
  Eigen::VectorXd u(p);
  for (int j = 0; j < p; ++j) u[j] = parse_number(parts[j], "direction entry");
  return u;
}

DatasetSchema schema_from(const RunConfig& cfg) {
  DatasetSchema schema;
  schema.response_columns = cfg.responses;
  schema.covariate_columns = cfg.covariates;
  schema.log_transform = cfg.log_columns;
  schema.add_intercept = !cfg.no_intercept;
  for (const auto& entry : cfg.categorical) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size())
      throw InvalidArgument("categorical entries take the form name=baseline, got '" +
                            entry + "'");
    schema.categorical_baseline[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  return schema;
}

struct Loaded {
  Dataset data;
  Design design;  // empty X when the schema declares no covariates
};

Loaded load_input(const RunConfig& cfg, bool need_covariates) {
  if (cfg.data_path.empty()) throw InvalidArgument("--data is required");
  if (cfg.responses.empty())
    throw InvalidArgument("at least one --response column is required");
  const DatasetSchema schema = schema_from(cfg);
  if (need_covariates && schema.covariate_columns.empty())
    throw InvalidArgument("this command needs --covariates");
  Loaded ld;
  ld.data = load_csv(cfg.data_path, schema);
  if (!schema.covariate_columns.empty() || schema.add_intercept)
    ld.design = encode_design(ld.data, schema);
  return ld;
}

IrlsOptions solver_options(const RunConfig& cfg) {
  IrlsOptions opts;
  opts.max_iter = cfg.max_iter;
  opts.tol = cfg.tol;
  return opts;
}

// Tuning constant for one tau: a literal number, or the K-fold winner.
struct CResolution {
  double c = 0.0;
  bool from_cv = false;
  CvResult cv;
};

CResolution resolve_c(const RunConfig& cfg, double tau, const Eigen::MatrixXd& Y,
                      const Eigen::VectorXd& u) {
  CResolution res;
  if (cfg.c_arg == "cv") {
    const Eigen::VectorXd grid = c_grid(Y, cfg.grid_size);
    res.cv = cross_validate(Y, tau, u, cfg.k_folds, grid, cfg.seed, cfg.delta,
                            cfg.threads);
    res.c = res.cv.c_star;
    res.from_cv = true;
    return res;
  }
  res.c = parse_number(cfg.c_arg, "--c");
  return res;
}

// Per-tau tuning with the --cv-per-tau switch: when off, the first
// resolution is reused for every tau.
class CPlan {
 public:
  explicit CPlan(const RunConfig& cfg) : cfg_(cfg) {}

  CResolution get(double tau, const Eigen::MatrixXd& Y, const Eigen::VectorXd& u) {
    if (!cfg_.c_arg.empty() && cfg_.c_arg != "cv")
      return resolve_c(cfg_, tau, Y, u);
    if (!cfg_.cv_per_tau && shared_) return *shared_;
    CResolution res = resolve_c(cfg_, tau, Y, u);
    if (!cfg_.cv_per_tau) shared_ = res;
    return res;
  }

 private:
  const RunConfig& cfg_;
  std::optional<CResolution> shared_;
};

ordered_json config_json(const RunConfig& cfg) {
  ordered_json j;
  j["data"] = cfg.data_path;
  j["responses"] = cfg.responses;
  j["covariates"] = cfg.covariates;
  j["categorical"] = cfg.categorical;
  j["log"] = cfg.log_columns;
  j["intercept"] = !cfg.no_intercept;
  j["taus"] = cfg.taus;
  j["direction"] = cfg.direction;
  j["c"] = cfg.c_arg;
  j["delta"] = cfg.delta;
  j["k_folds"] = cfg.k_folds;
  j["grid_size"] = cfg.grid_size;
  j["cv_per_tau"] = cfg.cv_per_tau;
  j["bootstrap_b"] = cfg.bootstrap_b;
  j["level"] = cfg.level;
  j["method"] = cfg.method;
  j["spline_covariates"] = cfg.spline_covariates;
  j["degree"] = cfg.degree;
  j["interior_knots"] = cfg.interior_knots;
  j["directions"] = cfg.n_directions;
  j["kind"] = cfg.kind;
  j["n"] = cfg.sim_n;
  j["k"] = cfg.sim_k;
  j["p"] = cfg.sim_p;
  j["noise_scale"] = cfg.noise_scale;
  j["rho"] = cfg.rho;
  j["contamination_rate"] = cfg.contamination_rate;
  j["contamination_scale"] = cfg.contamination_scale;
  j["reps"] = cfg.reps;
  j["max_iter"] = cfg.max_iter;
  j["tol"] = cfg.tol;
  j["seed"] = cfg.seed;
  j["out"] = cfg.out_dir;
  j["threads"] = cfg.threads;
  return j;
}

ordered_json manifest_skeleton(const RunConfig& cfg, const std::string& command) {
  ordered_json m;
  m["tool"] = "mqrif";
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = config_json(cfg);
  return m;
}

void write_manifest(const RunConfig& cfg, const ordered_json& m) {
  write_text_file(out_path(cfg, "manifest.json"), m.dump(2) + "\n");
}

ordered_json data_summary(const Loaded& ld) {
  ordered_json j;
  j["rows_used"] = ld.data.n_rows;
  j["rows_dropped_missing"] = ld.data.n_dropped_missing;
  j["design_columns"] = ld.design.names;
  return j;
}

ordered_json fit_diagnostics(const MQuantileFit& fit, const CResolution& cr) {
  ordered_json j;
  j["tau"] = fit.spec.tau;
  j["c"] = cr.c;
  j["c_from_cv"] = cr.from_cv;
  if (cr.from_cv) {
    j["cv_failed_fits"] = cr.cv.n_failed_fits;
  }
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["eq_norm"] = fit.eq_norm;
  return j;
}

MQuantileFit fit_or_throw(const Eigen::MatrixXd& Y, const MQuantileSpec& spec,
                          const IrlsOptions& opts) {
  MQuantileFit fit = fit_unconditional(Y, spec, opts);
  if (!fit.converged)
    throw ConvergenceError("fit at tau=" + tau_label(spec.tau) +
                           " stopped after " + std::to_string(fit.iterations) +
                           " iterations with equation norm " +
                           format_double(fit.eq_norm));
  return fit;
}

std::vector<int> spline_indices(const RunConfig& cfg, const Design& design) {
  if (cfg.spline_covariates.empty())
    throw InvalidArgument("the spline method needs --spline-covariates");
  std::vector<int> idx;
  for (const auto& name : cfg.spline_covariates) {
    const auto it = std::find(design.names.begin(), design.names.end(), name);
    if (it == design.names.end())
      throw InvalidArgument("spline covariate '" + name +
                            "' is not a design column");
    idx.push_back(static_cast<int>(it - design.names.begin()));
  }
  return idx;
}

// ---------------------------------------------------------------- commands

int run_fit(const RunConfig& cfg) {
  Loaded ld = load_input(cfg, false);
  const Eigen::MatrixXd& Y = ld.data.y;
  const int p = static_cast<int>(Y.cols());
  const Eigen::VectorXd u = parse_direction(cfg.direction, p);
  const IrlsOptions opts = solver_options(cfg);
  CPlan plan(cfg);

  std::vector<std::vector<std::string>> theta_rows;
  std::vector<std::string> header{"tau"};
  for (const auto& name : ld.data.response_names) header.push_back(name);
  theta_rows.push_back(header);

  ordered_json m = manifest_skeleton(cfg, "fit");
  m["data_summary"] = data_summary(ld);
  m["fits"] = ordered_json::array();

  for (double tau : cfg.taus) {
    const CResolution cr = plan.get(tau, Y, u);
    const MQuantileSpec spec(tau, u, HuberParams{cr.c, cfg.delta});
    const MQuantileFit fit = fit_or_throw(Y, spec, opts);
    const RifMatrices cov = rif_covariance(Y, fit);
    const RifSample rs = influence(Y, fit);

    const std::string lbl = tau_label(tau);
    write_matrix_csv(out_path(cfg, "m_tau" + lbl + ".csv"), cov.m_hat,
                     ld.data.response_names);
    write_matrix_csv(out_path(cfg, "d_tau" + lbl + ".csv"), cov.d_hat,
                     ld.data.response_names);
    write_matrix_csv(out_path(cfg, "delta_tau" + lbl + ".csv"), cov.delta_hat,
                     ld.data.response_names);
    write_matrix_csv(out_path(cfg, "thetacov_tau" + lbl + ".csv"), cov.theta_cov,
                     ld.data.response_names);
    write_matrix_csv(out_path(cfg, "corr_tau" + lbl + ".csv"), cov.corr,
                     ld.data.response_names);
    write_matrix_csv(out_path(cfg, "rif_tau" + lbl + ".csv"), rs.rif,
                     ld.data.response_names);

    std::vector<std::string> row{format_double(tau)};
    for (int j = 0; j < p; ++j) row.push_back(format_double(fit.theta[j]));
    theta_rows.push_back(row);

    ordered_json fj = fit_diagnostics(fit, cr);
    fj["m_cond"] = cov.m_cond;
    fj["zero_residual_rows"] = cov.n_skipped;
    if (p == 2) fj["r12"] = cov.corr(0, 1);
    m["fits"].push_back(fj);
  }

  write_table_csv(out_path(cfg, "theta.csv"), theta_rows);
  write_manifest(cfg, m);
  return 0;
}

int run_upe(const RunConfig& cfg) {
  Loaded ld = load_input(cfg, true);
  const Eigen::MatrixXd& Y = ld.data.y;
  const Eigen::MatrixXd& X = ld.design.X;
  const int p = static_cast<int>(Y.cols());
  const int k = static_cast<int>(X.cols());
  const Eigen::VectorXd u = parse_direction(cfg.direction, p);
  const IrlsOptions opts = solver_options(cfg);
  CPlan plan(cfg);

  const bool spline = cfg.method == "spline";
  if (!spline && cfg.method != "linear")
    throw InvalidArgument("unknown method '" + cfg.method +
                          "' (expected linear or spline)");
  std::optional<SplineConfig> sc;
  if (spline) {
    sc.emplace();
    sc->degree = cfg.degree;
    sc->interior_knots = cfg.interior_knots;
    sc->covariate_indices = spline_indices(cfg, ld.design);
  }

  ordered_json m = manifest_skeleton(cfg, "upe");
  m["data_summary"] = data_summary(ld);
  m["fits"] = ordered_json::array();

  for (double tau : cfg.taus) {
    const CResolution cr = plan.get(tau, Y, u);
    const MQuantileSpec spec(tau, u, HuberParams{cr.c, cfg.delta});
    const MQuantileFit fit = fit_or_throw(Y, spec, opts);

    UpeFit upe;
    LinearityTest lt;
    if (spline) {
      upe = umqpe_splines(Y, X, fit, *sc);
      lt = linearity_test(Y, X, fit, *sc);
    } else {
      upe = umqpe_linear(Y, X, fit);
      attach_asymptotic_inference(upe, Y, X, fit);
    }
    const RifMatrices cov = rif_covariance(Y, fit);

    const std::string lbl = tau_label(tau);
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"covariate", "response", "estimate", "se"});
    const bool have_se = upe.se.size() > 0;
    for (int j = 0; j < k; ++j)
      for (int l = 0; l < p; ++l)
        rows.push_back({ld.design.names[j], ld.data.response_names[l],
                        format_double(upe.alpha(j, l)),
                        have_se ? format_double(upe.se(j, l)) : std::string()});
    write_table_csv(out_path(cfg, "upe_tau" + lbl + ".csv"), rows);
    write_matrix_csv(out_path(cfg, "corr_tau" + lbl + ".csv"), cov.corr,
                     ld.data.response_names);

    ordered_json fj = fit_diagnostics(fit, cr);
    fj["method"] = upe.method;
    fj["m_cond"] = cov.m_cond;
    fj["zero_residual_rows"] = cov.n_skipped;
    fj["design_cond"] = upe.omega_x_cond;
    if (p == 2) fj["r12"] = cov.corr(0, 1);
    if (spline) {
      fj["collapsed_knots"] = upe.collapsed_knots;
      ordered_json tj;
      tj["pillai"] = lt.statistic;
      tj["f_stat"] = lt.f_stat;
      tj["df1"] = lt.df1;
      tj["df2"] = lt.df2;
      tj["approx_p"] = lt.approx_p;
      tj["added_columns"] = lt.added_columns;
      fj["linearity_test"] = tj;
    }
    m["fits"].push_back(fj);
  }

  write_manifest(cfg, m);
  return 0;
}

int run_cv(const RunConfig& cfg) {
  Loaded ld = load_input(cfg, false);
  const Eigen::MatrixXd& Y = ld.data.y;
  const int p = static_cast<int>(Y.cols());
  const Eigen::VectorXd u = parse_direction(cfg.direction, p);
  const double tau = cfg.taus.front();

  const Eigen::VectorXd grid = c_grid(Y, cfg.grid_size);
  const CvResult cv = cross_validate(Y, tau, u, cfg.k_folds, grid, cfg.seed,
                                     cfg.delta, cfg.threads);

  std::vector<std::vector<std::string>> rows;
  rows.push_back({"c", "cv_score", "valid"});
  for (int i = 0; i < grid.size(); ++i)
    rows.push_back({format_double(cv.grid[i]), format_double(cv.cv_scores[i]),
                    cv.valid[static_cast<std::size_t>(i)] ? "1" : "0"});
  write_table_csv(out_path(cfg, "cv.csv"), rows);

  std::vector<std::vector<std::string>> folds;
  folds.push_back({"row", "fold"});
  for (std::size_t i = 0; i < cv.fold_assignment.size(); ++i)
    folds.push_back({std::to_string(i), std::to_string(cv.fold_assignment[i])});
  write_table_csv(out_path(cfg, "folds.csv"), folds);

  ordered_json m = manifest_skeleton(cfg, "cv");
  m["data_summary"] = data_summary(ld);
  m["tau"] = tau;
  m["c_star"] = cv.c_star;
  m["k_folds"] = cv.k_folds;
  m["grid_points"] = static_cast<int>(grid.size());
  m["failed_fold_fits"] = cv.n_failed_fits;
  write_manifest(cfg, m);
  return 0;
}

int run_boot(const RunConfig& cfg) {
  Loaded ld = load_input(cfg, true);
  const Eigen::MatrixXd& Y = ld.data.y;
  const Eigen::MatrixXd& X = ld.design.X;
  const int p = static_cast<int>(Y.cols());
  const int k = static_cast<int>(X.cols());
  const Eigen::VectorXd u = parse_direction(cfg.direction, p);
  CPlan plan(cfg);

  const bool spline = cfg.method == "spline";
  if (!spline && cfg.method != "linear")
    throw InvalidArgument("unknown method '" + cfg.method +
                          "' (expected linear or spline)");
  std::optional<SplineConfig> sc;
  if (spline) {
    sc.emplace();
    sc->degree = cfg.degree;
    sc->interior_knots = cfg.interior_knots;
    sc->covariate_indices = spline_indices(cfg, ld.design);
  }

  ordered_json m = manifest_skeleton(cfg, "boot");
  m["data_summary"] = data_summary(ld);
  m["fits"] = ordered_json::array();

  for (double tau : cfg.taus) {
    const CResolution cr = plan.get(tau, Y, u);
    const MQuantileSpec spec(tau, u, HuberParams{cr.c, cfg.delta});
    const BootstrapResult br =
        bootstrap_ci(Y, X, spec, cfg.method, cfg.bootstrap_b, cfg.level,
                     cfg.seed, sc, cfg.threads);

    const std::string lbl = tau_label(tau);
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"covariate", "response", "estimate", "lower", "upper",
                    "se_boot"});
    for (int j = 0; j < k; ++j)
      for (int l = 0; l < p; ++l)
        rows.push_back({ld.design.names[j], ld.data.response_names[l],
                        format_double(br.estimate(j, l)),
                        format_double(br.lower(j, l)),
                        format_double(br.upper(j, l)),
                        format_double(br.se_boot(j, l))});
    write_table_csv(out_path(cfg, "boot_tau" + lbl + ".csv"), rows);

    ordered_json fj;
    fj["tau"] = tau;
    fj["c"] = cr.c;
    fj["c_from_cv"] = cr.from_cv;
    fj["replicates"] = br.b_total;
    fj["failed_replicates"] = br.n_failed;
    fj["level"] = br.level;
    m["fits"].push_back(fj);
  }

  write_manifest(cfg, m);
  return 0;
}

int run_contour(const RunConfig& cfg) {
  Loaded ld = load_input(cfg, false);
  const Eigen::MatrixXd& Y = ld.data.y;
  const int p = static_cast<int>(Y.cols());
  const Eigen::VectorXd u = parse_direction(cfg.direction, p);  // c resolution only
  CPlan plan(cfg);

  ordered_json m = manifest_skeleton(cfg, "contour");
  m["data_summary"] = data_summary(ld);
  m["contours"] = ordered_json::array();

  std::vector<ContourSet> sets;
  for (double tau : cfg.taus) {
    const CResolution cr = plan.get(tau, Y, u);
    const ContourSet cs =
        contour(Y, tau, cr.c, cfg.n_directions, cfg.seed, cfg.delta);
    sets.push_back(cs);

    const std::string lbl = tau_label(tau);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header;
    for (int j = 0; j < p; ++j) header.push_back("u" + std::to_string(j + 1));
    for (int j = 0; j < p; ++j)
      header.push_back("theta" + std::to_string(j + 1));
    header.push_back("converged");
    rows.push_back(header);
    int n_conv = 0;
    for (int i = 0; i < cs.directions.rows(); ++i) {
      std::vector<std::string> row;
      for (int j = 0; j < p; ++j)
        row.push_back(format_double(cs.directions(i, j)));
      for (int j = 0; j < p; ++j)
        row.push_back(format_double(cs.vertices(i, j)));
      const bool conv = cs.converged[static_cast<std::size_t>(i)] != 0;
      n_conv += conv ? 1 : 0;
      row.push_back(conv ? "1" : "0");
      rows.push_back(row);
    }
    write_table_csv(out_path(cfg, "contour_tau" + lbl + ".csv"), rows);

    if (p == 2) {
      Eigen::MatrixXd poly(n_conv, 2);
      int r = 0;
      for (int i = 0; i < cs.vertices.rows(); ++i)
        if (cs.converged[static_cast<std::size_t>(i)] != 0)
          poly.row(r++) = cs.vertices.row(i);
      write_polygon_svg(out_path(cfg, "contour_tau" + lbl + ".svg"), poly, &Y);
    }

    ordered_json cj;
    cj["tau"] = tau;
    cj["c"] = cr.c;
    cj["c_from_cv"] = cr.from_cv;
    cj["directions"] = cfg.n_directions;
    cj["converged"] = n_conv;
    m["contours"].push_back(cj);
  }

  if (p == 2 && sets.size() >= 2) {
    std::vector<std::size_t> order(sets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return sets[a].tau < sets[b].tau;
    });
    m["nesting"] = ordered_json::array();
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const ContourSet& outer = sets[order[i]];
      const ContourSet& inner = sets[order[i + 1]];
      ordered_json nj;
      nj["outer_tau"] = outer.tau;
      nj["inner_tau"] = inner.tau;
      if (inner.c == outer.c && inner.tau > outer.tau) {
        const NestingReport rep = nesting_report(inner, outer);
        nj["nested"] = rep.nested;
        nj["violations"] = static_cast<int>(rep.violations.size());
      } else {
        nj["nested"] = nullptr;  // not comparable (different c or equal tau)
      }
      m["nesting"].push_back(nj);
    }
  }

  write_manifest(cfg, m);
  return 0;
}

DgpConfig dgp_from(const RunConfig& cfg) {
  DgpConfig dg;
  dg.kind = cfg.kind;
  dg.n = cfg.sim_n;
  dg.k = cfg.sim_k;
  dg.p = cfg.sim_p;
  dg.noise_scale = cfg.noise_scale;
  dg.rho = cfg.rho;
  dg.contamination_rate = cfg.contamination_rate;
  dg.contamination_scale = cfg.contamination_scale;
  dg.seed = cfg.seed;
  return dg;
}

int run_simulate(const RunConfig& cfg) {
  const DgpConfig dg = dgp_from(cfg);
  const SimulatedData sim = simulate_dgp(dg);
  const int p = static_cast<int>(sim.Y.cols());
  const int k = static_cast<int>(sim.X.cols());

  // Column names line up with what the fitting commands expect back:
  // responses y1..yp, covariates x1..x{k-1} (the intercept is implicit).
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header;
  for (int j = 0; j < p; ++j) header.push_back("y" + std::to_string(j + 1));
  for (int j = 1; j < k; ++j) header.push_back("x" + std::to_string(j));
  rows.push_back(header);
  for (int i = 0; i < sim.Y.rows(); ++i) {
    std::vector<std::string> row;
    for (int j = 0; j < p; ++j) row.push_back(format_double(sim.Y(i, j)));
    for (int j = 1; j < k; ++j) row.push_back(format_double(sim.X(i, j)));
    rows.push_back(row);
  }
  write_table_csv(out_path(cfg, "data.csv"), rows);

  ordered_json m = manifest_skeleton(cfg, "simulate");
  ordered_json coef = ordered_json::array();
  for (int j = 0; j < sim.coef.rows(); ++j) {
    ordered_json row = ordered_json::array();
    for (int l = 0; l < sim.coef.cols(); ++l) row.push_back(sim.coef(j, l));
    coef.push_back(row);
  }
  m["true_coef"] = coef;
  write_manifest(cfg, m);
  return 0;
}

int run_coverage(const RunConfig& cfg) {
  if (cfg.c_arg == "cv")
    throw InvalidArgument("coverage runs at a fixed c, not --c cv");
  const DgpConfig dg = dgp_from(cfg);
  const Eigen::VectorXd u = parse_direction(cfg.direction, dg.p);
  const double c = parse_number(cfg.c_arg, "--c");
  const MQuantileSpec spec(cfg.taus.front(), u, HuberParams{c, cfg.delta});

  const CoverageResult cr =
      mqrif::run_coverage(dg, spec, cfg.reps, cfg.level, cfg.threads);

  std::vector<std::vector<std::string>> rows;
  rows.push_back({"level", "coverage", "reps_run", "reps_failed", "z"});
  rows.push_back({format_double(cfg.level), format_double(cr.coverage),
                  std::to_string(cr.reps_run), std::to_string(cr.reps_failed),
                  format_double(cr.z)});
  write_table_csv(out_path(cfg, "coverage.csv"), rows);

  ordered_json m = manifest_skeleton(cfg, "coverage");
  m["coverage"] = cr.coverage;
  m["reps_run"] = cr.reps_run;
  m["reps_failed"] = cr.reps_failed;
  m["z"] = cr.z;
  write_manifest(cfg, m);
  return 0;
}

}  // namespace

int run_command(const std::string& command, const RunConfig& cfg) {
  try {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec)
      throw InvalidArgument("cannot create output directory '" + cfg.out_dir +
                            "': " + ec.message());
    if (cfg.taus.empty()) throw InvalidArgument("at least one tau is required");
    if (command == "fit") return run_fit(cfg);
    if (command == "upe") return run_upe(cfg);
    if (command == "cv") return run_cv(cfg);
    if (command == "boot") return run_boot(cfg);
    if (command == "contour") return run_contour(cfg);
    if (command == "simulate") return run_simulate(cfg);
    if (command == "coverage") return run_coverage(cfg);
    throw InvalidArgument("unknown command '" + command + "'");
  } catch (const SingularMatrixError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mqrif
