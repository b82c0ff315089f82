#pragma once

#include <cstdint>
#include <vector>

#include "maxstable/data.hpp"
#include "maxstable/rng.hpp"

namespace maxstable {

// Scenario for the simulation-study harness: n_s sites uniform on the
// domain rectangle, true basis a Gaussian kernel basis with bandwidth rho
// on a sqrt(L) x sqrt(L) knot grid spanning the domain.
struct SimScenario {
  int L_true = 9;  // perfect square
  double alpha = 0.3;
  int n_t = 50;
  int n_s = 100;
  double rho = 2.5;
  double x_min = 1.0, x_max = 10.0;
  double y_min = 1.0, y_max = 10.0;
  int n_datasets = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

// Draw from the positive-stable low-rank model: per time t,
// A_lt ~ PS(alpha) iid, theta_t(s_i) = {sum_l B_il^{1/alpha} A_lt}^alpha,
// Z_t(s_i) = theta_t(s_i) * eps with eps ~ GEV(1, alpha, alpha) iid.
FieldPanel simulate_rs(const Eigen::MatrixXd& B, double alpha, int n_t,
                       Rng& rng, const std::vector<std::string>* ids = nullptr);

// Max-linear process: Z_t(s_i) = max_l B_il Z_lt, Z_lt iid unit Frechet.
FieldPanel simulate_maxlinear(const Eigen::MatrixXd& B, int n_t, Rng& rng,
                              const std::vector<std::string>* ids = nullptr);

// Knot grid spanning the scenario domain, and the scenario's true model.
Eigen::MatrixX2d scenario_knot_grid(const SimScenario& sc);
SiteSet scenario_sites(const SimScenario& sc, Rng& rng);

// Per-dataset results of the full estimation pipeline against the truth.
struct StudyRecord {
  double alpha_hat = 0.0;
  double delta_hat = 0.0;
  double mse_initial = 0.0;   // x100
  double mse_smoothed = 0.0;  // x100
  std::vector<double> mse_ebf;  // x100, one per fit L
};

struct StudySummary {
  SimScenario scenario;
  std::vector<int> fit_Ls;
  std::vector<StudyRecord> records;

  double mean_alpha() const;
  double sd_alpha() const;
  double mean_mse_initial() const;
  double mean_mse_smoothed() const;
  double mean_mse_ebf(int which) const;
};

// Full Table-style study: simulate each dataset, run the estimation
// pipeline (empirical theta, bandwidth CV, smoothing, alpha, EBF fit per
// requested L), and record MSE x 100 of each extremal-coefficient
// estimator against the truth. Datasets run in parallel on n_threads.
StudySummary run_simulation_study(const SimScenario& scenario,
                                  const std::vector<int>& fit_Ls,
                                  int n_threads = 1,
                                  int ebf_restarts = 2,
                                  int ebf_max_iter = 2000);

}  // namespace maxstable
