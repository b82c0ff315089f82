#pragma once

#include <cstdint>
#include <vector>

#include "maxstable/data.hpp"

namespace maxstable {

// Standardized Gaussian kernel basis functions centered at spatial knots.

// Greedy farthest-point knot selection among the site locations: the first
// knot is the site nearest the centroid, each next knot maximizes its
// minimum distance to the chosen knots. The seed only breaks residual ties.
Eigen::MatrixX2d spacefilling_knots(const SiteSet& sites, int L,
                                    std::uint64_t seed);

// B(i,l) = exp{-(|s_i - k_l|/rho)^2} / sum_j exp{-(|s_i - k_j|/rho)^2};
// evaluated in log space, rows on the simplex.
Eigen::MatrixXd gkf_basis(const SiteSet& sites, const Eigen::MatrixX2d& knots,
                          double rho);
Eigen::MatrixXd gkf_basis_at(const Eigen::MatrixX2d& points,
                             const Eigen::MatrixX2d& knots, double rho);

// Default grid: n log-spaced values spanning [0.1, 2] x domain diameter.
std::vector<double> default_rho_grid(const SiteSet& sites, int n = 12);

// Bandwidth minimizing the extremal-coefficient mismatch of the kernel
// basis against theta_tilde, grid search refined by golden-section search
// around the best grid point. Ties go to the smallest rho.
double estimate_rho(const Eigen::MatrixXd& theta_tilde, const SiteSet& sites,
                    const Eigen::MatrixX2d& knots, double alpha,
                    const std::vector<double>& rho_grid);

}  // namespace maxstable
