#pragma once

#include <cstdint>
#include <vector>

#include "maxstable/data.hpp"
#include "maxstable/rng.hpp"
#include "maxstable/stable.hpp"

namespace maxstable {

// Latent positive-stable variables A (L x n_t) with fixed dependence alpha.
struct LatentState {
  Eigen::MatrixXd A;
  double alpha = 0.5;
};

struct McmcConfig {
  int iterations = 10000;
  int burn_in = 2000;
  int thin = 10;
  double initial_step = 1.0;
  double adapt_target = 0.40;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SweepStats {
  long long proposals = 0;
  long long accepts = 0;
};

// theta(s) = {sum_l B_l(s)^{1/alpha} A_l}^alpha in log-sum-exp form.
double theta_at(const Eigen::VectorXd& B_row, const Eigen::VectorXd& A_col,
                double alpha);

// Log-likelihood of a unit Frechet observation z given theta:
// the scaling law gives z | theta ~ GEV(theta, alpha*theta, alpha).
double conditional_loglik(double z, double theta, double alpha);

// One systematic Metropolis-Hastings sweep over all (l, t) with log-normal
// random-walk proposals of width step(l, t); panel must be on the unit
// Frechet scale. Returns acceptance statistics.
SweepStats mh_sweep(LatentState& state, const FieldPanel& panel,
                    const Eigen::MatrixXd& B, const Eigen::MatrixXd& step,
                    const PsDensity& prior, Rng& rng);

struct McmcResult {
  std::vector<Eigen::MatrixXd> draws;  // thinned post-burn-in A matrices
  Eigen::MatrixXd acceptance;          // post-burn-in rate per variable
  Eigen::MatrixXd step;                // final adapted step sizes
};

// Chains start at A = 1; per-variable step sizes adapt toward
// cfg.adapt_target during burn-in (Robbins-Monro) and are frozen after.
McmcResult run_mcmc(const FieldPanel& panel, const Eigen::MatrixXd& B,
                    double alpha, const McmcConfig& cfg);

// Per retained draw: Z = theta_at(B_row, A_col, alpha) * eps with fresh
// eps ~ GEV(1, alpha, alpha). Column t of each draw is used.
std::vector<double> posterior_predict(const std::vector<Eigen::MatrixXd>& draws,
                                      const Eigen::VectorXd& B_row,
                                      int t, double alpha, Rng& rng);

double median(std::vector<double> x);

// Mean absolute deviation between point predictions and observations.
double mad_score(const std::vector<double>& predicted,
                 const std::vector<double>& observed);

enum class BasisMethod { kEbf, kGkf };

struct CvConfig {
  int k = 5;
  std::uint64_t seed = 0;
  McmcConfig mcmc;
  int ebf_restarts = 2;
  int ebf_max_iter = 2000;
  double neighbor_fraction = 0.01;
  int n_threads = 1;
};

struct CvScore {
  BasisMethod method;
  int L = 0;
  std::vector<double> fold_scores;
  double mean_mad = 0.0;
};

// 5-fold style cross-validation: per fold, the training cells go through
// the full estimation pipeline (alpha, bandwidth, basis), the MCMC runs on
// the training panel, and held-out cells are scored by the MAD of their
// posterior predictive medians. The panel must be on the unit Frechet scale.
std::vector<CvScore> crossvalidate(const FieldPanel& panel,
                                   const SiteSet& sites, BasisMethod method,
                                   const std::vector<int>& L_list,
                                   const CvConfig& cfg);

}  // namespace maxstable
