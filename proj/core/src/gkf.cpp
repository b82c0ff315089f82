#include "maxstable/gkf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "maxstable/ebf.hpp"
#include "maxstable/rng.hpp"

namespace maxstable {

Eigen::MatrixX2d spacefilling_knots(const SiteSet& sites, int L,
                                    std::uint64_t seed) {
  const int n = sites.size();
  if (L < 1 || L > n) {
    throw ValidationError("knot count must satisfy 1 <= L <= n_sites");
  }
  // Tie-breaking order fixed by the seed.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());

  const Eigen::RowVector2d centroid = sites.coords.colwise().mean();
  constexpr double kTieTol = 1e-12;

  std::vector<int> chosen;
  std::vector<bool> used(n, false);
  {
    double best = std::numeric_limits<double>::infinity();
    int pick = -1;
    for (const int i : order) {
      const double d = (sites.coords.row(i) - centroid).norm();
      if (d < best - kTieTol) {
        best = d;
        pick = i;
      }
    }
    chosen.push_back(pick);
    used[pick] = true;
  }

  Eigen::VectorXd min_dist(n);
  for (int i = 0; i < n; ++i) {
    min_dist(i) = (sites.coords.row(i) - sites.coords.row(chosen[0])).norm();
  }
  while (static_cast<int>(chosen.size()) < L) {
    double best = -1.0;
    int pick = -1;
    for (const int i : order) {
      if (used[i]) continue;
      if (min_dist(i) > best + kTieTol) {
        best = min_dist(i);
        pick = i;
      }
    }
    chosen.push_back(pick);
    used[pick] = true;
    for (int i = 0; i < n; ++i) {
      min_dist(i) = std::min(
          min_dist(i), (sites.coords.row(i) - sites.coords.row(pick)).norm());
    }
  }

  Eigen::MatrixX2d knots(L, 2);
  for (int l = 0; l < L; ++l) knots.row(l) = sites.coords.row(chosen[l]);
  return knots;
}

Eigen::MatrixXd gkf_basis_at(const Eigen::MatrixX2d& points,
                             const Eigen::MatrixX2d& knots, double rho) {
  if (!(rho > 0.0)) {
    throw ValidationError("rho must be positive");
  }
  const int n = static_cast<int>(points.rows());
  const int L = static_cast<int>(knots.rows());
  Eigen::MatrixXd B(n, L);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd log_w(L);
    for (int l = 0; l < L; ++l) {
      const double d = (points.row(i) - knots.row(l)).norm() / rho;
      log_w(l) = -d * d;
    }
    const double m = log_w.maxCoeff();
    const Eigen::VectorXd w = (log_w.array() - m).exp();
    B.row(i) = w / w.sum();
  }
  return B;
}

Eigen::MatrixXd gkf_basis(const SiteSet& sites, const Eigen::MatrixX2d& knots,
                          double rho) {
  return gkf_basis_at(sites.coords, knots, rho);
}

std::vector<double> default_rho_grid(const SiteSet& sites, int n) {
  double diameter = 0.0;
  for (int i = 0; i < sites.size(); ++i) {
    for (int j = i + 1; j < sites.size(); ++j) {
      diameter = std::max(
          diameter, (sites.coords.row(i) - sites.coords.row(j)).norm());
    }
  }
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) {
    const double f = (n == 1) ? 0.0 : static_cast<double>(i) / (n - 1);
    grid[i] = diameter * 0.1 * std::pow(20.0, f);
  }
  return grid;
}

double estimate_rho(const Eigen::MatrixXd& theta_tilde, const SiteSet& sites,
                    const Eigen::MatrixX2d& knots, double alpha,
                    const std::vector<double>& rho_grid) {
  if (rho_grid.empty()) {
    throw ValidationError("rho grid must be nonempty");
  }
  std::vector<double> grid(rho_grid);
  std::sort(grid.begin(), grid.end());

  auto loss_at = [&](double rho) {
    return ebf_loss(gkf_basis(sites, knots, rho), alpha, theta_tilde);
  };

  int best = 0;
  double best_loss = loss_at(grid[0]);
  for (size_t i = 1; i < grid.size(); ++i) {
    const double l = loss_at(grid[i]);
    if (l < best_loss - 1e-12 * std::max(1.0, best_loss)) {
      best_loss = l;
      best = static_cast<int>(i);
    }
  }

  // Golden-section refinement in log space between the grid neighbors.
  double lo = std::log(grid[std::max(best - 1, 0)]);
  double hi = std::log(grid[std::min<size_t>(best + 1, grid.size() - 1)]);
  if (hi - lo < 1e-12) return grid[best];
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - phi * (hi - lo);
  double b = lo + phi * (hi - lo);
  double fa = loss_at(std::exp(a));
  double fb = loss_at(std::exp(b));
  for (int it = 0; it < 40 && hi - lo > 1e-6; ++it) {
    if (fa <= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - phi * (hi - lo);
      fa = loss_at(std::exp(a));
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + phi * (hi - lo);
      fb = loss_at(std::exp(b));
    }
  }
  const double refined = std::exp(0.5 * (lo + hi));
  return (loss_at(refined) <= best_loss) ? refined : grid[best];
}

}  // namespace maxstable
