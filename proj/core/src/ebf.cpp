#include "maxstable/ebf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "maxstable/extremal.hpp"
#include "maxstable/gkf.hpp"
#include "maxstable/rng.hpp"

namespace maxstable {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd row_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd B(logits.rows(), logits.cols());
  for (int i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd w = (logits.row(i).array() - m).exp();
    B.row(i) = w / w.sum();
  }
  return B;
}

// Valid upper-triangle pairs of the target matrix.
std::vector<std::pair<int, int>> valid_pairs(const Eigen::MatrixXd& theta) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < theta.rows(); ++i) {
    for (int j = i + 1; j < theta.cols(); ++j) {
      if (std::isfinite(theta(i, j))) pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

double loss_from_basis(const Eigen::MatrixXd& B, double alpha,
                       const Eigen::MatrixXd& theta_tilde,
                       const std::vector<std::pair<int, int>>& pairs) {
  const Eigen::MatrixXd logB = B.array().log().matrix();
  const int L = static_cast<int>(B.cols());
  double loss = 0.0;
  for (const auto& [i, j] : pairs) {
    double theta = 0.0;
    for (int l = 0; l < L; ++l) {
      const double a = logB(i, l) / alpha;
      const double b = logB(j, l) / alpha;
      const double m = std::max(a, b);
      if (m == -kInf) continue;
      theta += std::exp(alpha * (m + std::log1p(std::exp(std::min(a, b) - m))));
    }
    const double r = theta - theta_tilde(i, j);
    loss += r * r;
  }
  return loss;
}

// Loss and its gradient with respect to the softmax logits.
double loss_and_grad(const Eigen::MatrixXd& logits, double alpha,
                     const Eigen::MatrixXd& theta_tilde,
                     const std::vector<std::pair<int, int>>& pairs,
                     Eigen::MatrixXd& grad) {
  const Eigen::MatrixXd B = row_softmax(logits);
  const Eigen::MatrixXd logB = B.array().log().matrix();
  const int L = static_cast<int>(B.cols());
  Eigen::MatrixXd dB = Eigen::MatrixXd::Zero(B.rows(), L);
  double loss = 0.0;
  std::vector<double> lse(L);
  for (const auto& [i, j] : pairs) {
    double theta = 0.0;
    for (int l = 0; l < L; ++l) {
      const double a = logB(i, l) / alpha;
      const double b = logB(j, l) / alpha;
      const double m = std::max(a, b);
      lse[l] = (m == -kInf) ? -kInf
                            : m + std::log1p(std::exp(std::min(a, b) - m));
      if (lse[l] != -kInf) theta += std::exp(alpha * lse[l]);
    }
    const double r = theta - theta_tilde(i, j);
    loss += r * r;
    const double scale = 2.0 * r;
    // d theta / d B_il = (B_il^{1/a} + B_jl^{1/a})^{a-1} B_il^{(1-a)/a}
    for (int l = 0; l < L; ++l) {
      if (!std::isfinite(lse[l])) continue;  // both entries underflowed
      const double common = (alpha - 1.0) * lse[l];
      dB(i, l) +=
          scale * std::exp(common + (1.0 - alpha) / alpha * logB(i, l));
      dB(j, l) +=
          scale * std::exp(common + (1.0 - alpha) / alpha * logB(j, l));
    }
  }
  // Chain rule through the row softmax.
  grad.resize(B.rows(), L);
  for (int i = 0; i < B.rows(); ++i) {
    const double dot = dB.row(i).dot(B.row(i));
    grad.row(i) = B.row(i).array() * (dB.row(i).array() - dot);
  }
  return loss;
}

struct Descent {
  Eigen::MatrixXd logits;
  double loss = kInf;
  int iterations = 0;
  bool converged = false;
};

Descent descend(Eigen::MatrixXd logits, double alpha,
                const Eigen::MatrixXd& theta_tilde,
                const std::vector<std::pair<int, int>>& pairs,
                const EbfFitConfig& cfg) {
  Descent d;
  Eigen::MatrixXd grad;
  double loss = loss_and_grad(logits, alpha, theta_tilde, pairs, grad);
  double step = 1.0;
  constexpr double kArmijoSlope = 1e-4;
  int it = 0;
  for (; it < cfg.max_iter; ++it) {
    const double gmax = grad.cwiseAbs().maxCoeff();
    if (gmax < cfg.grad_tol) {
      d.converged = true;
      break;
    }
    const double gsq = grad.squaredNorm();
    bool moved = false;
    for (int half = 0; half < 60; ++half) {
      const Eigen::MatrixXd trial = logits - step * grad;
      const double trial_loss =
          loss_from_basis(row_softmax(trial), alpha, theta_tilde, pairs);
      if (trial_loss <= loss - kArmijoSlope * step * gsq) {
        logits = trial;
        loss = loss_and_grad(logits, alpha, theta_tilde, pairs, grad);
        // trial_loss and the recomputed loss agree; keep the fresh gradient
        step *= 2.0;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;  // line search stalled at machine precision
  }
  d.logits = std::move(logits);
  d.loss = loss;
  d.iterations = it;
  return d;
}

Eigen::MatrixXd safe_log(const Eigen::MatrixXd& B) {
  return (B.array() + 1e-12).log().matrix();
}

}  // namespace

bool is_simplex_rows(const Eigen::MatrixXd& B, double tol) {
  if ((B.array() < 0.0).any()) return false;
  return ((B.rowwise().sum().array() - 1.0).abs() < tol).all();
}

double estimate_alpha(const Eigen::MatrixXd& theta_tilde, const SiteSet& sites,
                      double neighbor_fraction) {
  if (!(neighbor_fraction > 0.0 && neighbor_fraction <= 1.0)) {
    throw ValidationError("neighbor_fraction must be in (0, 1]");
  }
  const Eigen::MatrixXd d = pairwise_distances(sites);
  struct Pair {
    double dist;
    double theta;
  };
  std::vector<Pair> pairs;
  for (int i = 0; i < sites.size(); ++i) {
    for (int j = i + 1; j < sites.size(); ++j) {
      if (std::isfinite(theta_tilde(i, j))) {
        pairs.push_back({d(i, j), theta_tilde(i, j)});
      }
    }
  }
  if (pairs.empty()) {
    throw ValidationError("no valid pairs for alpha estimation");
  }
  const int m = std::min<int>(
      static_cast<int>(pairs.size()),
      static_cast<int>(std::ceil(neighbor_fraction * pairs.size())));
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& a, const Pair& b) { return a.dist < b.dist; });
  double mean = 0.0;
  for (int p = 0; p < m; ++p) mean += pairs[p].theta;
  mean /= m;
  const double alpha = std::log2(mean);
  return std::clamp(alpha, 0.01, 0.99);
}

double ebf_loss(const Eigen::MatrixXd& B, double alpha,
                const Eigen::MatrixXd& theta_tilde) {
  return loss_from_basis(B, alpha, theta_tilde, valid_pairs(theta_tilde));
}

Eigen::MatrixXd ebf_loss_grad(const Eigen::MatrixXd& logits, double alpha,
                              const Eigen::MatrixXd& theta_tilde) {
  Eigen::MatrixXd grad;
  loss_and_grad(logits, alpha, theta_tilde, valid_pairs(theta_tilde), grad);
  return grad;
}

Eigen::VectorXd contributions(const Eigen::MatrixXd& B) {
  return B.colwise().mean();
}

EbfFitResult fit_ebf_init(const Eigen::MatrixXd& theta_tilde, double alpha,
                          const EbfFitConfig& cfg,
                          const std::optional<Eigen::MatrixXd>& init,
                          const SiteSet* sites) {
  if (cfg.L < 1 || cfg.restarts < 1 || cfg.max_iter < 1 ||
      !(cfg.grad_tol > 0.0)) {
    throw ValidationError("invalid EBF fit configuration");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("alpha must be in (0, 1)");
  }
  const int n = static_cast<int>(theta_tilde.rows());
  const auto pairs = valid_pairs(theta_tilde);

  EbfFitResult result;
  result.alpha = alpha;

  if (cfg.L == 1) {
    result.B = Eigen::MatrixXd::Ones(n, 1);
    result.v = Eigen::VectorXd::Ones(1);
    result.loss = loss_from_basis(result.B, alpha, theta_tilde, pairs);
    result.converged = true;
    return result;
  }

  std::vector<Eigen::MatrixXd> starts;
  if (init) {
    if (init->rows() != n || init->cols() != cfg.L) {
      throw ValidationError("initial basis has the wrong shape");
    }
    starts.push_back(safe_log(*init));
  }
  Rng rng(cfg.seed);
  for (int r = static_cast<int>(starts.size()); r < cfg.restarts; ++r) {
    if (r == 0 && sites != nullptr && cfg.L <= n) {
      // Structured start: Gaussian kernel basis on space-filling knots,
      // bandwidth at the mean nearest-knot spacing.
      const Eigen::MatrixX2d knots =
          spacefilling_knots(*sites, cfg.L, cfg.seed);
      double spacing = 0.0;
      for (int a = 0; a < cfg.L; ++a) {
        double nn = kInf;
        for (int b = 0; b < cfg.L; ++b) {
          if (a != b) nn = std::min(nn, (knots.row(a) - knots.row(b)).norm());
        }
        spacing += nn;
      }
      spacing /= cfg.L;
      starts.push_back(safe_log(gkf_basis(*sites, knots, spacing)));
      continue;
    }
    // Dirichlet(1) rows via normalized exponentials.
    Rng stream = rng.stream(static_cast<std::uint64_t>(r));
    Eigen::MatrixXd logits(n, cfg.L);
    for (int i = 0; i < n; ++i) {
      for (int l = 0; l < cfg.L; ++l) {
        logits(i, l) = std::log(stream.exponential());
      }
    }
    starts.push_back(std::move(logits));
  }

  Descent best;
  for (const auto& start : starts) {
    Descent d = descend(start, alpha, theta_tilde, pairs, cfg);
    if (d.loss < best.loss) best = std::move(d);
  }

  Eigen::MatrixXd B = row_softmax(best.logits);
  Eigen::VectorXd v = contributions(B);
  std::vector<int> order(cfg.L);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return v(a) > v(b); });
  result.B.resize(n, cfg.L);
  result.v.resize(cfg.L);
  for (int l = 0; l < cfg.L; ++l) {
    result.B.col(l) = B.col(order[l]);
    result.v(l) = v(order[l]);
  }
  result.loss = best.loss;
  result.iterations = best.iterations;
  result.converged = best.converged;
  return result;
}

EbfFitResult fit_ebf(const Eigen::MatrixXd& theta_tilde, double alpha,
                     const EbfFitConfig& cfg, const SiteSet* sites) {
  return fit_ebf_init(theta_tilde, alpha, cfg, std::nullopt, sites);
}

Eigen::MatrixXd interpolate_basis(const Eigen::MatrixXd& B,
                                  const SiteSet& sites,
                                  const Eigen::MatrixX2d& new_points,
                                  double delta) {
  if (!(delta > 0.0)) {
    throw ValidationError("delta must be positive");
  }
  const int n = sites.size();
  Eigen::MatrixXd out(new_points.rows(), B.cols());
  for (int g = 0; g < new_points.rows(); ++g) {
    Eigen::VectorXd log_w(n);
    for (int i = 0; i < n; ++i) {
      const double d = (new_points.row(g) - sites.coords.row(i)).norm() / delta;
      log_w(i) = -d * d;
    }
    const double m = log_w.maxCoeff();
    if (!std::isfinite(m)) {
      throw NumericalError("all interpolation weights underflow");
    }
    const Eigen::VectorXd w = (log_w.array() - m).exp();
    Eigen::RowVectorXd row = (w.transpose() * B) / w.sum();
    out.row(g) = row / row.sum();
  }
  return out;
}

std::vector<std::pair<int, double>> elbow_curve(
    const Eigen::MatrixXd& theta_tilde, double alpha,
    const std::vector<int>& L_list, const EbfFitConfig& cfg,
    const SiteSet* sites) {
  if (L_list.empty()) {
    throw ValidationError("L list must be nonempty");
  }
  const double n_pairs =
      static_cast<double>(valid_pairs(theta_tilde).size());
  std::vector<std::pair<int, double>> curve;
  std::optional<Eigen::MatrixXd> prev_B;
  for (const int L : L_list) {
    EbfFitConfig c = cfg;
    c.L = L;
    std::optional<Eigen::MatrixXd> warm;
    if (prev_B && prev_B->cols() < L) {
      // Previous solution padded with near-zero columns, rows renormalized.
      Eigen::MatrixXd padded =
          Eigen::MatrixXd::Constant(prev_B->rows(), L, 1e-6);
      padded.leftCols(prev_B->cols()) = *prev_B;
      padded.array().colwise() /= padded.rowwise().sum().array();
      warm = padded;
      c.restarts += 1;  // warm start in addition to the configured restarts
    }
    const EbfFitResult fit = fit_ebf_init(theta_tilde, alpha, c, warm, sites);
    curve.emplace_back(L, fit.loss / n_pairs);
    prev_B = fit.B;
  }
  return curve;
}

}  // namespace maxstable
