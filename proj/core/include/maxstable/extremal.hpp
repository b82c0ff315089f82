#pragma once

#include <cstdint>
#include <vector>

#include "maxstable/data.hpp"

namespace maxstable {

// Pairwise extremal coefficients theta in [1, 2]:
// theta = 1 is perfect dependence, theta = 2 independence. Matrices are
// symmetric with unit diagonal; entries for pairs with insufficient shared
// data are NaN and are skipped by the smoothing and selection routines.

// F-madogram estimate over the pairwise-complete times of sites i and j,
// ranks computed within those times. Always in [0, 1/4).
double fmadogram(const FieldPanel& panel, int i, int j);

// theta_hat(i,j) = (1 + 2 nu) / (1 - 2 nu), clamped to [1, 2].
Eigen::MatrixXd empirical_theta(const FieldPanel& panel);

// Gaussian-kernel smoothing of theta_hat with bandwidth delta,
// w(i,u) = exp{-(|s_i - s_u| / delta)^2}, w(i,i) = 0 and all u = v terms
// excluded from numerator and denominator.
Eigen::MatrixXd smooth_theta(const Eigen::MatrixXd& theta_hat,
                             const SiteSet& sites, double delta);

// Geometric grid of n bandwidth candidates spanning
// [lo, hi] x median inter-site distance.
std::vector<double> default_bandwidth_grid(const SiteSet& sites, int n = 8,
                                           double lo = 0.1, double hi = 1.0);

// k-fold cross-validation over unordered site pairs: each held-out pair is
// predicted by the smoother computed from training pairs only; returns the
// candidate with smallest CV squared error (ties toward the smallest delta).
double select_bandwidth(const Eigen::MatrixXd& theta_hat, const SiteSet& sites,
                        const std::vector<double>& candidates, int k,
                        std::uint64_t seed);

// Model-based extremal coefficient for basis matrix B (rows on the simplex):
// theta(i,j) = sum_l (B_il^{1/alpha} + B_jl^{1/alpha})^alpha, i != j.
Eigen::MatrixXd model_theta(const Eigen::MatrixXd& B, double alpha);

// Single-pair version (also valid for coincident rows, giving 2^alpha).
double model_theta_pair(const Eigen::VectorXd& b1, const Eigen::VectorXd& b2,
                        double alpha);

// theta(ref, s) evaluated at every row of B_at_grid.
Eigen::VectorXd theta_map(const Eigen::MatrixXd& B_at_grid,
                          const Eigen::VectorXd& B_ref, double alpha);

}  // namespace maxstable
