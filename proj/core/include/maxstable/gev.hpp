#pragma once

#include "maxstable/rng.hpp"

namespace maxstable {

// Generalized extreme value distribution GEV(mu, sigma, xi).
// Unit Frechet is GEV(1, 1, 1).
struct GevParams {
  double mu = 0.0;
  double sigma = 1.0;  // > 0
  double xi = 0.0;
};

// CDF; total function (0 below the lower support endpoint for xi > 0,
// 1 above the upper endpoint for xi < 0). |xi| < 1e-8 uses the Gumbel limit.
double gev_cdf(double y, const GevParams& p);

// Log density, -inf outside the support.
double gev_logpdf(double y, const GevParams& p);

// Closed-form inverse of the CDF; requires 0 < u < 1.
double gev_quantile(double u, const GevParams& p);

double gev_sample(const GevParams& p, Rng& rng);

}  // namespace maxstable
