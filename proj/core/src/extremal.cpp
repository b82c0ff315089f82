#include "maxstable/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "maxstable/rng.hpp"

namespace maxstable {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double clamp_theta(double x) { return std::clamp(x, 1.0, 2.0); }

// log{(e^a)^(1/alpha) + (e^b)^(1/alpha)}^alpha with a = log B1, b = log B2.
double log_theta_term(double log_b1, double log_b2, double alpha) {
  const double a = log_b1 / alpha;
  const double b = log_b2 / alpha;
  const double m = std::max(a, b);
  if (m == -std::numeric_limits<double>::infinity()) {
    return -std::numeric_limits<double>::infinity();
  }
  return alpha * (m + std::log1p(std::exp(std::min(a, b) - m)));
}

}  // namespace

double fmadogram(const FieldPanel& panel, int i, int j) {
  if (i == j) {
    throw ValidationError("fmadogram requires distinct sites");
  }
  std::vector<double> xi, xj;
  for (int t = 0; t < panel.n_times(); ++t) {
    if (panel.mask(i, t) && panel.mask(j, t)) {
      xi.push_back(panel.values(i, t));
      xj.push_back(panel.values(j, t));
    }
  }
  const int m = static_cast<int>(xi.size());
  if (m < 2) {
    throw ValidationError("fewer than 2 pairwise-complete times");
  }
  const std::vector<double> ri = average_ranks(xi);
  const std::vector<double> rj = average_ranks(xj);
  double sum = 0.0;
  for (int t = 0; t < m; ++t) {
    sum += std::abs(ri[t] - rj[t]) / (m + 1.0);
  }
  return sum / (2.0 * m);
}

Eigen::MatrixXd empirical_theta(const FieldPanel& panel) {
  panel.validate();
  const int n = panel.n_sites();
  Eigen::MatrixXd theta = Eigen::MatrixXd::Ones(n, n);

  if (panel.fully_observed()) {
    // Ranks per site over all times, computed once.
    const int m = panel.n_times();
    Eigen::MatrixXd ranks(n, m);
    for (int i = 0; i < n; ++i) {
      std::vector<double> row(m);
      for (int t = 0; t < m; ++t) row[t] = panel.values(i, t);
      const std::vector<double> r = average_ranks(row);
      for (int t = 0; t < m; ++t) ranks(i, t) = r[t];
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double nu =
            (ranks.row(i) - ranks.row(j)).cwiseAbs().sum() /
            ((m + 1.0) * 2.0 * m);
        theta(i, j) = theta(j, i) = clamp_theta((1.0 + 2.0 * nu) /
                                                (1.0 - 2.0 * nu));
      }
    }
    return theta;
  }

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double value = kNaN;
      try {
        const double nu = fmadogram(panel, i, j);
        value = clamp_theta((1.0 + 2.0 * nu) / (1.0 - 2.0 * nu));
      } catch (const ValidationError&) {
        // Pairs without enough shared times stay NaN and are skipped
        // downstream.
      }
      theta(i, j) = theta(j, i) = value;
    }
  }
  return theta;
}

namespace {

struct SmoothingTerms {
  Eigen::MatrixXd W;      // kernel weights, zero diagonal
  Eigen::MatrixXd num;    // W * Theta0 * W^T
  Eigen::MatrixXd den;    // W * Valid * W^T
  Eigen::MatrixXd theta0; // theta_hat with NaN and diagonal zeroed
  Eigen::MatrixXd valid;  // indicator of usable off-diagonal entries
};

SmoothingTerms smoothing_terms(const Eigen::MatrixXd& theta_hat,
                               const SiteSet& sites, double delta) {
  if (!(delta > 0.0)) {
    throw ValidationError("bandwidth delta must be positive");
  }
  const int n = static_cast<int>(theta_hat.rows());
  SmoothingTerms s;
  const Eigen::MatrixXd d = pairwise_distances(sites);
  s.W = (-(d / delta).array().square()).exp().matrix();
  s.W.diagonal().setZero();

  s.theta0 = Eigen::MatrixXd::Zero(n, n);
  s.valid = Eigen::MatrixXd::Zero(n, n);
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u != v && std::isfinite(theta_hat(u, v))) {
        s.theta0(u, v) = theta_hat(u, v);
        s.valid(u, v) = 1.0;
      }
    }
  }
  s.num = s.W * s.theta0 * s.W.transpose();
  s.den = s.W * s.valid * s.W.transpose();
  return s;
}

}  // namespace

Eigen::MatrixXd smooth_theta(const Eigen::MatrixXd& theta_hat,
                             const SiteSet& sites, double delta) {
  const int n = static_cast<int>(theta_hat.rows());
  const SmoothingTerms s = smoothing_terms(theta_hat, sites, delta);
  Eigen::MatrixXd out = Eigen::MatrixXd::Ones(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (s.den(i, j) <= 0.0 || !std::isfinite(s.num(i, j) / s.den(i, j))) {
        throw NumericalError(
            "empty effective weight set while smoothing; delta too small");
      }
      out(i, j) = out(j, i) = clamp_theta(s.num(i, j) / s.den(i, j));
    }
  }
  return out;
}

std::vector<double> default_bandwidth_grid(const SiteSet& sites, int n,
                                           double lo, double hi) {
  const Eigen::MatrixXd d = pairwise_distances(sites);
  std::vector<double> offdiag;
  for (int i = 0; i < d.rows(); ++i) {
    for (int j = i + 1; j < d.cols(); ++j) offdiag.push_back(d(i, j));
  }
  std::nth_element(offdiag.begin(), offdiag.begin() + offdiag.size() / 2,
                   offdiag.end());
  const double med = offdiag[offdiag.size() / 2];
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) {
    const double f = (n == 1) ? 0.0 : static_cast<double>(i) / (n - 1);
    grid[i] = med * lo * std::pow(hi / lo, f);
  }
  return grid;
}

double select_bandwidth(const Eigen::MatrixXd& theta_hat, const SiteSet& sites,
                        const std::vector<double>& candidates, int k,
                        std::uint64_t seed) {
  if (candidates.empty()) {
    throw ValidationError("need at least one bandwidth candidate");
  }
  if (k < 2) {
    throw ValidationError("bandwidth CV requires k >= 2");
  }
  const int n = static_cast<int>(theta_hat.rows());
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::isfinite(theta_hat(i, j))) pairs.emplace_back(i, j);
    }
  }
  if (static_cast<int>(pairs.size()) < k) {
    throw ValidationError("fewer valid pairs than CV folds");
  }
  Rng rng(seed);
  rng.shuffle(pairs.begin(), pairs.end());

  std::vector<double> sorted(candidates);
  std::sort(sorted.begin(), sorted.end());

  double best_delta = sorted.front();
  double best_err = std::numeric_limits<double>::infinity();
  for (const double delta : sorted) {
    const SmoothingTerms s = smoothing_terms(theta_hat, sites, delta);
    double err = 0.0;
    bool degenerate = false;
    for (int f = 0; f < k && !degenerate; ++f) {
      // Held-out pairs of this fold, removed from the training sums.
      std::vector<size_t> held;
      for (size_t p = f; p < pairs.size(); p += k) held.push_back(p);
      for (const size_t p : held) {
        const auto [i, j] = pairs[p];
        double num = s.num(i, j);
        double den = s.den(i, j);
        for (const size_t q : held) {
          const auto [a, b] = pairs[q];
          const double wij = s.W(i, a) * s.W(j, b) + s.W(i, b) * s.W(j, a);
          num -= wij * s.theta0(a, b);
          den -= wij;
        }
        if (den <= 1e-300) {
          degenerate = true;
          break;
        }
        const double pred = clamp_theta(num / den);
        const double r = pred - theta_hat(i, j);
        err += r * r;
      }
    }
    if (degenerate) continue;
    if (err < best_err - 1e-12 * std::max(1.0, best_err)) {
      best_err = err;
      best_delta = delta;
    }
  }
  return best_delta;
}

double model_theta_pair(const Eigen::VectorXd& b1, const Eigen::VectorXd& b2,
                        double alpha) {
  double theta = 0.0;
  for (int l = 0; l < b1.size(); ++l) {
    if (b1(l) <= 0.0 && b2(l) <= 0.0) continue;
    theta += std::exp(log_theta_term(std::log(b1(l)), std::log(b2(l)), alpha));
  }
  return theta;
}

Eigen::MatrixXd model_theta(const Eigen::MatrixXd& B, double alpha) {
  const int n = static_cast<int>(B.rows());
  const Eigen::MatrixXd logB = B.array().max(0.0).log().matrix();
  Eigen::MatrixXd theta = Eigen::MatrixXd::Ones(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double t = 0.0;
      for (int l = 0; l < B.cols(); ++l) {
        if (B(i, l) <= 0.0 && B(j, l) <= 0.0) continue;
        t += std::exp(log_theta_term(logB(i, l), logB(j, l), alpha));
      }
      theta(i, j) = theta(j, i) = t;
    }
  }
  return theta;
}

Eigen::VectorXd theta_map(const Eigen::MatrixXd& B_at_grid,
                          const Eigen::VectorXd& B_ref, double alpha) {
  Eigen::VectorXd out(B_at_grid.rows());
  for (int g = 0; g < B_at_grid.rows(); ++g) {
    out(g) = model_theta_pair(B_at_grid.row(g), B_ref, alpha);
  }
  return out;
}

}  // namespace maxstable
