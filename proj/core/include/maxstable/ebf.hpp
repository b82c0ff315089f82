#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "maxstable/data.hpp"

namespace maxstable {

struct EbfFitConfig {
  int L = 1;
  int restarts = 3;
  int max_iter = 5000;
  double grad_tol = 1e-8;
  std::uint64_t seed = 0;
};

struct EbfFitResult {
  Eigen::MatrixXd B;       // n_s x L, columns ordered by contribution
  Eigen::VectorXd v;       // contributions, nonincreasing, sums to 1
  double loss = 0.0;       // sum over i<j of squared mismatch
  double alpha = 0.5;
  int iterations = 0;
  bool converged = false;
};

// Rows nonnegative, summing to one within tol.
bool is_simplex_rows(const Eigen::MatrixXd& B, double tol = 1e-10);

// alpha_hat = log2(mean of theta_tilde over the closest
// ceil(neighbor_fraction * n_pairs) pairs), clamped to (0.01, 0.99).
double estimate_alpha(const Eigen::MatrixXd& theta_tilde, const SiteSet& sites,
                      double neighbor_fraction = 0.01);

// sum_{i<j} (theta_tilde_ij - theta_ij(B, alpha))^2; NaN pairs are skipped.
double ebf_loss(const Eigen::MatrixXd& B, double alpha,
                const Eigen::MatrixXd& theta_tilde);

// Exact gradient of ebf_loss composed with the row-softmax map
// B(i,l) = exp(g_il) / sum_m exp(g_im).
Eigen::MatrixXd ebf_loss_grad(const Eigen::MatrixXd& logits, double alpha,
                              const Eigen::MatrixXd& theta_tilde);

// Gradient descent with Armijo backtracking on softmax logits over
// cfg.restarts initializations; the best final loss is kept and columns
// are reordered by nonincreasing contribution. If sites are given, the
// first restart starts from a Gaussian kernel basis on space-filling knots.
EbfFitResult fit_ebf(const Eigen::MatrixXd& theta_tilde, double alpha,
                     const EbfFitConfig& cfg, const SiteSet* sites = nullptr);

// Same, from an explicit initial basis for the first restart.
EbfFitResult fit_ebf_init(const Eigen::MatrixXd& theta_tilde, double alpha,
                          const EbfFitConfig& cfg,
                          const std::optional<Eigen::MatrixXd>& init,
                          const SiteSet* sites = nullptr);

// Column means of B; sums to 1 for simplex rows.
Eigen::VectorXd contributions(const Eigen::MatrixXd& B);

// Gaussian-kernel interpolation of basis rows to new locations,
// rows renormalized to the simplex.
Eigen::MatrixXd interpolate_basis(const Eigen::MatrixXd& B,
                                  const SiteSet& sites,
                                  const Eigen::MatrixX2d& new_points,
                                  double delta);

// fit_ebf per L (warm-starting each L from the previous solution padded
// with small columns, alongside the configured restarts); losses are
// normalized by the pair count.
std::vector<std::pair<int, double>> elbow_curve(
    const Eigen::MatrixXd& theta_tilde, double alpha,
    const std::vector<int>& L_list, const EbfFitConfig& cfg,
    const SiteSet* sites = nullptr);

}  // namespace maxstable
