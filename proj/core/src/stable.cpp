#include "maxstable/stable.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace maxstable {

namespace {
constexpr double kPi = 3.14159265358979323846;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must be in (0, 1)");
  }
}
}  // namespace

double ps_log_c(double psi, double alpha) {
  check_alpha(alpha);
  if (!(psi > 0.0 && psi < kPi)) {
    throw std::invalid_argument("psi must be in (0, pi)");
  }
  // All three sine arguments lie in (0, pi), so the logs are finite.
  const double ls_a = std::log(std::sin(alpha * psi));
  const double ls = std::log(std::sin(psi));
  const double ls_1a = std::log(std::sin((1.0 - alpha) * psi));
  return (ls_a - ls) / (1.0 - alpha) + ls_1a - ls_a;
}

double ps_c(double psi, double alpha) { return std::exp(ps_log_c(psi, alpha)); }

PsDensity::PsDensity(double alpha, int n_grid) : alpha_(alpha) {
  check_alpha(alpha);
  if (n_grid < 1) {
    throw std::invalid_argument("n_grid must be >= 1");
  }
  log_c_.resize(n_grid);
  width_.resize(n_grid);
  // Beta(0.5, 0.5) quantile: Q(p) = sin^2(pi p / 2). Midpoints at
  // p = (i - 0.5)/n, cell widths Q(i/n) - Q((i-1)/n).
  auto q = [](double p) {
    const double s = std::sin(0.5 * kPi * p);
    return s * s;
  };
  for (int i = 1; i <= n_grid; ++i) {
    const double mid = q((i - 0.5) / n_grid);
    log_c_[i - 1] = ps_log_c(kPi * mid, alpha);
    width_[i - 1] = q(static_cast<double>(i) / n_grid) -
                    q(static_cast<double>(i - 1) / n_grid);
  }
}

double PsDensity::operator()(double x) const {
  if (!(x > 0.0)) {
    throw std::invalid_argument("ps_density requires x > 0");
  }
  // h(x, y) = a/(1-a) x^{-1/(1-a)} c(pi y) exp{-c(pi y) x^{-a/(1-a)}},
  // evaluated in log space: c spans many orders of magnitude near y in {0,1}.
  const double log_x = std::log(x);
  const double log_pref =
      std::log(alpha_ / (1.0 - alpha_)) - log_x / (1.0 - alpha_);
  const double xpow = std::exp(-alpha_ / (1.0 - alpha_) * log_x);
  double sum = 0.0;
  for (size_t i = 0; i < log_c_.size(); ++i) {
    const double log_h = log_pref + log_c_[i] - std::exp(log_c_[i]) * xpow;
    sum += std::exp(log_h) * width_[i];
  }
  return sum;
}

double PsDensity::log_density(double x) const {
  const double f = (*this)(x);
  return f > 0.0 ? std::log(f) : -std::numeric_limits<double>::infinity();
}

double ps_density(double x, double alpha, int n_grid) {
  return PsDensity(alpha, n_grid)(x);
}

double ps_sample(double alpha, Rng& rng) {
  check_alpha(alpha);
  // Conditional on the uniform auxiliary variable Y = u,
  // V = A^{-alpha/(1-alpha)} is exponential with rate c(pi u).
  double u = rng.uniform();
  u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
  const double w = rng.exponential();
  const double log_a =
      (1.0 - alpha) / alpha * (ps_log_c(kPi * u, alpha) - std::log(w));
  return std::exp(log_a);
}

}  // namespace maxstable
