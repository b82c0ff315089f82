#pragma once

#include <vector>

#include "maxstable/rng.hpp"

namespace maxstable {

// Positive stable PS(alpha), 0 < alpha < 1, with Laplace transform
// E exp(-t A) = exp(-t^alpha).

// Kernel c(psi) on (0, pi):
//   c(psi) = {sin(alpha psi) / sin(psi)}^{1/(1-alpha)}
//            * sin((1-alpha) psi) / sin(alpha psi)
double ps_c(double psi, double alpha);
double ps_log_c(double psi, double alpha);

// Grid approximation of the PS(alpha) density f(x) = int_0^1 h(x, y) dy,
// midpoint rule with n_grid evenly spaced Beta(0.5, 0.5) quantiles as
// midpoints. Reusable across evaluations at fixed alpha.
class PsDensity {
 public:
  explicit PsDensity(double alpha, int n_grid = 50);

  double operator()(double x) const;
  double log_density(double x) const;
  double alpha() const { return alpha_; }

 private:
  double alpha_;
  std::vector<double> log_c_;   // log c(pi y_i) at the midpoints
  std::vector<double> width_;   // quantile-interval lengths
};

double ps_density(double x, double alpha, int n_grid = 50);

// Exact sampler: A = {c(pi U) / W}^{(1-alpha)/alpha},
// U uniform(0,1), W standard exponential.
double ps_sample(double alpha, Rng& rng);

}  // namespace maxstable
