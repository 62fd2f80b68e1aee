#include "mqrif/tuning.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "mqrif/errors.hpp"
#include "mqrif/parallel.hpp"
#include "mqrif/rng.hpp"
#include "mqrif/solver.hpp"

namespace mqrif {

Eigen::VectorXd c_grid(const Eigen::MatrixXd& Y, int n_grid) {
  if (n_grid < 2) throw InvalidArgument("c_grid: need at least two grid points");
  if (Y.rows() < 1) throw DataError("c_grid: empty sample");
  double max_norm = 0.0;
  for (Eigen::Index i = 0; i < Y.rows(); ++i)
    max_norm = std::max(max_norm, Y.row(i).norm());
  const double lo = 0.1;
  if (!(max_norm > lo))
    throw DataError(
        "c_grid: max row norm at or below 0.1; rescale the data or supply "
        "an explicit grid");
  Eigen::VectorXd grid(n_grid);
  for (int i = 0; i < n_grid; ++i)
    grid(i) = lo + (max_norm - lo) * static_cast<double>(i) / (n_grid - 1);
  return grid;
}

CvResult cross_validate(const Eigen::MatrixXd& Y, double tau,
                        const Eigen::VectorXd& u, int k_folds,
                        const Eigen::VectorXd& grid, std::uint64_t seed,
                        double delta, int workers) {
  const int n = static_cast<int>(Y.rows());
  if (k_folds < 2) throw InvalidArgument("cross_validate: need at least 2 folds");
  if (n < k_folds)
    throw DataError("cross_validate: fewer rows than folds");
  if (grid.size() < 1) throw InvalidArgument("cross_validate: empty grid");
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    if (!(grid(g) >= 0.0))
      throw InvalidArgument("cross_validate: grid values must be non-negative");
    if (g > 0 && !(grid(g) > grid(g - 1)))
      throw InvalidArgument("cross_validate: grid must be strictly increasing");
  }

  CvResult out;
  out.grid = grid;
  out.k_folds = k_folds;
  out.seed = seed;

  // Seeded shuffle, then round-robin assignment: fold sizes differ by at
  // most one and the partition is a pure function of (n, K, seed).
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  out.fold_assignment.assign(static_cast<std::size_t>(n), 0);
  for (int pos = 0; pos < n; ++pos)
    out.fold_assignment[static_cast<std::size_t>(perm[static_cast<std::size_t>(pos)])] =
        pos % k_folds;

  const int n_c = static_cast<int>(grid.size());
  const int p = static_cast<int>(Y.cols());

  // Train-fold fits for every (c, fold) pair; each task fills its own slot.
  struct FoldFit {
    Eigen::VectorXd theta;
    bool usable = false;
  };
  std::vector<FoldFit> fits(static_cast<std::size_t>(n_c * k_folds));
  parallel_for(
      static_cast<std::size_t>(n_c * k_folds),
      [&](std::size_t task) {
        const int ci = static_cast<int>(task) / k_folds;
        const int fold = static_cast<int>(task) % k_folds;
        int rows = 0;
        for (int i = 0; i < n; ++i)
          if (out.fold_assignment[static_cast<std::size_t>(i)] != fold) ++rows;
        Eigen::MatrixXd train(rows, p);
        int at = 0;
        for (int i = 0; i < n; ++i)
          if (out.fold_assignment[static_cast<std::size_t>(i)] != fold)
            train.row(at++) = Y.row(i);
        try {
          HuberParams hp;
          hp.c = grid(ci);
          hp.delta = delta;
          const MQuantileSpec spec(tau, u, hp);
          const MQuantileFit fit = fit_unconditional(train, spec);
          if (fit.converged) {
            fits[task].theta = fit.theta;
            fits[task].usable = true;
          }
        } catch (const Error&) {
          // slot stays unusable
        }
      },
      workers);

  out.cv_scores.resize(n_c);
  out.valid.assign(static_cast<std::size_t>(n_c), 1);
  for (int ci = 0; ci < n_c; ++ci) {
    double total = 0.0;
    for (int fold = 0; fold < k_folds; ++fold) {
      const FoldFit& ff = fits[static_cast<std::size_t>(ci * k_folds + fold)];
      if (!ff.usable) {
        out.valid[static_cast<std::size_t>(ci)] = 0;
        ++out.n_failed_fits;
        continue;
      }
      for (int i = 0; i < n; ++i) {
        if (out.fold_assignment[static_cast<std::size_t>(i)] != fold) continue;
        total += (Y.row(i).transpose() - ff.theta).squaredNorm();
      }
    }
    out.cv_scores(ci) = total / static_cast<double>(n);
  }

  int best = -1;
  for (int ci = 0; ci < n_c; ++ci) {
    if (!out.valid[static_cast<std::size_t>(ci)]) continue;
    if (best < 0 || out.cv_scores(ci) < out.cv_scores(best)) best = ci;
  }
  if (best < 0)
    throw ConvergenceError("cross_validate: every grid value had a failed fold");
  out.c_star = out.grid(best);
  return out;
}

}  // namespace mqrif
