#include <benchmark/benchmark.h>

#include "maxstable/ebf.hpp"
#include "maxstable/extremal.hpp"
#include "maxstable/gkf.hpp"
#include "maxstable/mcmc.hpp"
#include "maxstable/rng.hpp"
#include "maxstable/simulate.hpp"
#include "maxstable/stable.hpp"

namespace {

using namespace maxstable;

struct Fixture {
  SiteSet sites;
  Eigen::MatrixXd B;
  FieldPanel panel;
  Eigen::MatrixXd theta_hat;

  Fixture(int n_s, int L, int n_t) {
    Rng rng(99);
    SimScenario sc;
    sc.n_s = n_s;
    sc.L_true = L;
    sites = scenario_sites(sc, rng);
    B = gkf_basis(sites, scenario_knot_grid(sc), sc.rho);
    panel = simulate_rs(B, 0.3, n_t, rng);
    theta_hat = empirical_theta(panel);
  }
};

const Fixture& fixture() {
  static const Fixture f(100, 9, 50);
  return f;
}

void BM_PsDensity(benchmark::State& state) {
  const PsDensity f(0.3);
  double x = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f(x));
    x = x < 100.0 ? x * 1.001 : 0.01;
  }
}
BENCHMARK(BM_PsDensity);

void BM_PsSample(benchmark::State& state) {
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(ps_sample(0.3, rng));
}
BENCHMARK(BM_PsSample);

void BM_EmpiricalTheta(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(empirical_theta(f.panel));
}
BENCHMARK(BM_EmpiricalTheta);

void BM_SmoothTheta(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(smooth_theta(f.theta_hat, f.sites, 2.0));
  }
}
BENCHMARK(BM_SmoothTheta);

void BM_EbfLossGrad(benchmark::State& state) {
  const Fixture& f = fixture();
  const Eigen::MatrixXd logits = (4.0 * f.B.array() + 1.0).log().matrix();
  const Eigen::MatrixXd theta = model_theta(f.B, 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ebf_loss_grad(logits, 0.3, theta));
  }
}
BENCHMARK(BM_EbfLossGrad);

void BM_EbfFit(benchmark::State& state) {
  const Fixture& f = fixture();
  const Eigen::MatrixXd theta = smooth_theta(f.theta_hat, f.sites, 2.0);
  EbfFitConfig cfg;
  cfg.L = 9;
  cfg.restarts = 1;
  cfg.max_iter = 500;
  cfg.seed = 7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_ebf(theta, 0.3, cfg, &f.sites));
  }
}
BENCHMARK(BM_EbfFit)->Unit(benchmark::kMillisecond);

void BM_McmcSweep(benchmark::State& state) {
  const Fixture& f = fixture();
  LatentState st;
  st.alpha = 0.3;
  st.A = Eigen::MatrixXd::Ones(f.B.cols(), f.panel.n_times());
  const Eigen::MatrixXd step =
      Eigen::MatrixXd::Ones(f.B.cols(), f.panel.n_times());
  const PsDensity prior(0.3);
  Rng rng(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mh_sweep(st, f.panel, f.B, step, prior, rng));
  }
  state.SetItemsProcessed(state.iterations() * st.A.size());
}
BENCHMARK(BM_McmcSweep)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
