#include "maxstable/mcmc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>

#include "maxstable/ebf.hpp"
#include "maxstable/extremal.hpp"
#include "maxstable/gev.hpp"
#include "maxstable/gkf.hpp"

namespace maxstable {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void McmcConfig::validate() const {
  if (iterations < 1 || burn_in < 0 || burn_in >= iterations || thin < 1 ||
      !(initial_step > 0.0) ||
      !(adapt_target > 0.0 && adapt_target < 1.0)) {
    throw ValidationError("invalid MCMC configuration");
  }
}

double theta_at(const Eigen::VectorXd& B_row, const Eigen::VectorXd& A_col,
                double alpha) {
  double m = kNegInf;
  for (int l = 0; l < B_row.size(); ++l) {
    if (B_row(l) <= 0.0) continue;
    m = std::max(m, std::log(B_row(l)) / alpha + std::log(A_col(l)));
  }
  if (m == kNegInf) return 0.0;
  double sum = 0.0;
  for (int l = 0; l < B_row.size(); ++l) {
    if (B_row(l) <= 0.0) continue;
    sum += std::exp(std::log(B_row(l)) / alpha + std::log(A_col(l)) - m);
  }
  return std::exp(alpha * (m + std::log(sum)));
}

double conditional_loglik(double z, double theta, double alpha) {
  return gev_logpdf(z, GevParams{theta, alpha * theta, alpha});
}

namespace {

// Sweep state with per-site rescaled kernel weights. For site i,
// M_i = max_l log B_il and c_il = exp{(log B_il - M_i)/alpha}, so that
// S_it = sum_l c_il A_lt stays in range and
// log theta_it = alpha log S_it + M_i.
struct SweepWorkspace {
  double alpha;
  Eigen::MatrixXd C;           // n_s x L rescaled weights
  Eigen::VectorXd M;           // n_s shifts
  Eigen::MatrixXd S;           // n_s x n_t sums
  Eigen::MatrixXd cur_ll;      // cached log-likelihood per observed cell
  std::vector<std::vector<int>> obs;  // observed site indices per time

  SweepWorkspace(const FieldPanel& panel, const Eigen::MatrixXd& B,
                 const Eigen::MatrixXd& A, double alpha_in) {
    alpha = alpha_in;
    const int n_s = static_cast<int>(B.rows());
    const int L = static_cast<int>(B.cols());
    const int n_t = static_cast<int>(A.cols());
    C.resize(n_s, L);
    M.resize(n_s);
    for (int i = 0; i < n_s; ++i) {
      double m = kNegInf;
      for (int l = 0; l < L; ++l) {
        if (B(i, l) > 0.0) m = std::max(m, std::log(B(i, l)));
      }
      M(i) = m;
      for (int l = 0; l < L; ++l) {
        C(i, l) = B(i, l) > 0.0
                      ? std::exp((std::log(B(i, l)) - m) / alpha)
                      : 0.0;
      }
    }
    S = C * A;
    obs.resize(n_t);
    cur_ll = Eigen::MatrixXd::Zero(n_s, n_t);
    for (int t = 0; t < n_t; ++t) {
      for (int i = 0; i < n_s; ++i) {
        if (panel.n_sites() > 0 && panel.mask(i, t)) {
          obs[t].push_back(i);
          cur_ll(i, t) = loglik_cell(panel.values(i, t), i, t);
        }
      }
    }
  }

  double log_theta(int i, int t) const {
    return alpha * std::log(S(i, t)) + M(i);
  }

  double loglik_cell(double z, int i, int t) const {
    return conditional_loglik(z, std::exp(log_theta(i, t)), alpha);
  }

  // One variable update; returns the acceptance probability.
  double update(Eigen::MatrixXd& A, const FieldPanel& panel, int l, int t,
                double step, const PsDensity& prior, Rng& rng,
                std::vector<double>& ll_buf) {
    const double a_old = A(l, t);
    const double log_a_new = std::log(a_old) + step * rng.normal();
    const double a_new = std::exp(log_a_new);
    if (!(a_new > 0.0) || !std::isfinite(a_new)) return 0.0;

    double delta = prior.log_density(a_new) - prior.log_density(a_old) +
                   log_a_new - std::log(a_old);  // log-normal Jacobian
    ll_buf.clear();
    for (const int i : obs[t]) {
      const double s_new = S(i, t) + C(i, l) * (a_new - a_old);
      const double theta_new = std::exp(alpha * std::log(s_new) + M(i));
      const double ll_new =
          conditional_loglik(panel.values(i, t), theta_new, alpha);
      ll_buf.push_back(ll_new);
      delta += ll_new - cur_ll(i, t);
    }
    const double acc_prob = std::min(1.0, std::exp(delta));
    if (std::log(rng.uniform()) < delta) {
      for (size_t k = 0; k < obs[t].size(); ++k) {
        const int i = obs[t][k];
        S(i, t) += C(i, l) * (a_new - a_old);
        cur_ll(i, t) = ll_buf[k];
      }
      A(l, t) = a_new;
    }
    return acc_prob;
  }
};

}  // namespace

SweepStats mh_sweep(LatentState& state, const FieldPanel& panel,
                    const Eigen::MatrixXd& B, const Eigen::MatrixXd& step,
                    const PsDensity& prior, Rng& rng) {
  SweepWorkspace ws(panel, B, state.A, state.alpha);
  SweepStats stats;
  std::vector<double> ll_buf;
  for (int t = 0; t < state.A.cols(); ++t) {
    for (int l = 0; l < state.A.rows(); ++l) {
      const double a_before = state.A(l, t);
      const double p =
          ws.update(state.A, panel, l, t, step(l, t), prior, rng, ll_buf);
      ++stats.proposals;
      if (state.A(l, t) != a_before) ++stats.accepts;
      (void)p;
    }
  }
  return stats;
}

McmcResult run_mcmc(const FieldPanel& panel, const Eigen::MatrixXd& B,
                    double alpha, const McmcConfig& cfg) {
  cfg.validate();
  const int L = static_cast<int>(B.cols());
  const int n_t = static_cast<int>(panel.values.cols());
  const PsDensity prior(alpha);

  Eigen::MatrixXd A = Eigen::MatrixXd::Ones(L, n_t);
  Eigen::MatrixXd log_step =
      Eigen::MatrixXd::Constant(L, n_t, std::log(cfg.initial_step));
  Eigen::MatrixXd accepts = Eigen::MatrixXd::Zero(L, n_t);

  SweepWorkspace ws(panel, B, A, alpha);
  Rng base(cfg.seed);
  std::vector<double> ll_buf;

  McmcResult result;
  int post = 0;
  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    // Per-(iteration, column) streams: columns are conditionally
    // independent, so the draw layout does not depend on sweep order.
    Rng iter_rng = base.stream(static_cast<std::uint64_t>(iter));
    const bool adapting = iter <= cfg.burn_in;
    const double gain = 1.0 / std::pow(static_cast<double>(iter), 0.6);
    for (int t = 0; t < n_t; ++t) {
      Rng col_rng = iter_rng.stream(static_cast<std::uint64_t>(t));
      for (int l = 0; l < L; ++l) {
        const double step = std::exp(log_step(l, t));
        const double a_before = A(l, t);
        const double p =
            ws.update(A, panel, l, t, step, prior, col_rng, ll_buf);
        if (adapting) {
          log_step(l, t) += gain * (p - cfg.adapt_target);
          log_step(l, t) = std::clamp(log_step(l, t), -10.0, 5.0);
        } else if (A(l, t) != a_before) {
          accepts(l, t) += 1.0;
        }
      }
    }
    if (!adapting) {
      ++post;
      if (post % cfg.thin == 0) result.draws.push_back(A);
    }
  }
  result.acceptance = accepts / std::max(1, post);
  result.step = log_step.array().exp();
  return result;
}

std::vector<double> posterior_predict(const std::vector<Eigen::MatrixXd>& draws,
                                      const Eigen::VectorXd& B_row,
                                      int t, double alpha, Rng& rng) {
  const GevParams noise{1.0, alpha, alpha};
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& A : draws) {
    const double theta = theta_at(B_row, A.col(t), alpha);
    out.push_back(theta * gev_sample(noise, rng));
  }
  return out;
}

double median(std::vector<double> x) {
  if (x.empty()) {
    throw ValidationError("median of empty sample");
  }
  const size_t h = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + h, x.end());
  double m = x[h];
  if (x.size() % 2 == 0) {
    std::nth_element(x.begin(), x.begin() + h - 1, x.begin() + h);
    m = 0.5 * (m + x[h - 1]);
  }
  return m;
}

double mad_score(const std::vector<double>& predicted,
                 const std::vector<double>& observed) {
  if (predicted.size() != observed.size() || predicted.empty()) {
    throw ValidationError("mad_score requires equal nonempty lengths");
  }
  double sum = 0.0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    sum += std::abs(predicted[i] - observed[i]);
  }
  return sum / static_cast<double>(predicted.size());
}

namespace {

struct FoldPipeline {
  FieldPanel train;
  Eigen::MatrixXd theta_tilde;
  double delta_hat = 0.0;
  double alpha_hat = 0.5;
};

FoldPipeline fit_fold_pipeline(const FieldPanel& panel, const SiteSet& sites,
                               const FoldAssignment& folds, int fold,
                               const CvConfig& cfg) {
  FoldPipeline fp;
  fp.train = panel;
  for (int i = 0; i < panel.n_sites(); ++i) {
    for (int t = 0; t < panel.n_times(); ++t) {
      if (folds.fold(i, t) == fold) fp.train.mask(i, t) = false;
    }
  }
  fp.train.validate();
  const Eigen::MatrixXd theta_hat = empirical_theta(fp.train);
  fp.delta_hat =
      select_bandwidth(theta_hat, sites, default_bandwidth_grid(sites), 10,
                       cfg.seed + 17ull * fold);
  fp.theta_tilde = smooth_theta(theta_hat, sites, fp.delta_hat);
  // The close-pair mean is taken on the unsmoothed estimate; smoothing
  // pulls short-distance coefficients toward larger separations.
  fp.alpha_hat = estimate_alpha(theta_hat, sites, cfg.neighbor_fraction);
  return fp;
}

}  // namespace

std::vector<CvScore> crossvalidate(const FieldPanel& panel,
                                   const SiteSet& sites, BasisMethod method,
                                   const std::vector<int>& L_list,
                                   const CvConfig& cfg) {
  if (cfg.k < 2) {
    throw ValidationError("cross-validation requires k >= 2");
  }
  panel.validate();
  const FoldAssignment folds = kfold_split(panel, cfg.k, cfg.seed);

  // fold -> L -> MAD
  std::vector<std::vector<double>> scores(cfg.k,
                                          std::vector<double>(L_list.size()));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int f = next.fetch_add(1); f < cfg.k; f = next.fetch_add(1)) {
      const FoldPipeline fp = fit_fold_pipeline(panel, sites, folds, f, cfg);
      for (size_t li = 0; li < L_list.size(); ++li) {
        const int L = L_list[li];
        Eigen::MatrixXd B;
        if (method == BasisMethod::kEbf) {
          EbfFitConfig ecfg;
          ecfg.L = L;
          ecfg.restarts = cfg.ebf_restarts;
          ecfg.max_iter = cfg.ebf_max_iter;
          ecfg.seed = cfg.seed + 101ull * f + L;
          B = fit_ebf(fp.theta_tilde, fp.alpha_hat, ecfg, &sites).B;
        } else {
          const Eigen::MatrixX2d knots =
              spacefilling_knots(sites, L, cfg.seed);
          const double rho = estimate_rho(fp.theta_tilde, sites, knots,
                                          fp.alpha_hat,
                                          default_rho_grid(sites));
          B = gkf_basis(sites, knots, rho);
        }
        McmcConfig mcfg = cfg.mcmc;
        mcfg.seed = cfg.mcmc.seed + 1000ull * f + L;
        const McmcResult chain =
            run_mcmc(fp.train, B, fp.alpha_hat, mcfg);

        Rng pred_rng(mcfg.seed + 0xabcdef);
        std::vector<double> pred, obs;
        for (int i = 0; i < panel.n_sites(); ++i) {
          for (int t = 0; t < panel.n_times(); ++t) {
            if (folds.fold(i, t) != f) continue;
            const std::vector<double> z = posterior_predict(
                chain.draws, B.row(i), t, fp.alpha_hat, pred_rng);
            pred.push_back(median(z));
            obs.push_back(panel.values(i, t));
          }
        }
        scores[f][li] = mad_score(pred, obs);
      }
    }
  };
  const int threads = std::max(1, cfg.n_threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::future<void>> futures;
    for (int w = 0; w < threads; ++w) {
      futures.push_back(std::async(std::launch::async, worker));
    }
    for (auto& f : futures) f.get();
  }

  std::vector<CvScore> out;
  for (size_t li = 0; li < L_list.size(); ++li) {
    CvScore s;
    s.method = method;
    s.L = L_list[li];
    double mean = 0.0;
    for (int f = 0; f < cfg.k; ++f) {
      s.fold_scores.push_back(scores[f][li]);
      mean += scores[f][li];
    }
    s.mean_mad = mean / cfg.k;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace maxstable
