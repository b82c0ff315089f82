#include "maxstable/gev.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace maxstable {

namespace {
constexpr double kXiGumbelCutoff = 1e-8;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

double gev_cdf(double y, const GevParams& p) {
  const double s = (y - p.mu) / p.sigma;
  if (std::abs(p.xi) < kXiGumbelCutoff) {
    return std::exp(-std::exp(-s));
  }
  const double t = 1.0 + p.xi * s;
  if (t <= 0.0) {
    return p.xi > 0.0 ? 0.0 : 1.0;
  }
  return std::exp(-std::pow(t, -1.0 / p.xi));
}

double gev_logpdf(double y, const GevParams& p) {
  const double s = (y - p.mu) / p.sigma;
  if (std::abs(p.xi) < kXiGumbelCutoff) {
    return -std::log(p.sigma) - s - std::exp(-s);
  }
  const double t = 1.0 + p.xi * s;
  if (t <= 0.0) {
    return kNegInf;
  }
  const double log_t = std::log(t);
  return -std::log(p.sigma) - (1.0 / p.xi + 1.0) * log_t -
         std::exp(-log_t / p.xi);
}

double gev_quantile(double u, const GevParams& p) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::invalid_argument("gev_quantile requires 0 < u < 1");
  }
  const double w = -std::log(u);  // > 0
  if (std::abs(p.xi) < kXiGumbelCutoff) {
    return p.mu - p.sigma * std::log(w);
  }
  return p.mu + p.sigma * (std::pow(w, -p.xi) - 1.0) / p.xi;
}

double gev_sample(const GevParams& p, Rng& rng) {
  return gev_quantile(rng.uniform(), p);
}

}  // namespace maxstable
