#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "maxstable/ebf.hpp"
#include "maxstable/extremal.hpp"
#include "maxstable/gkf.hpp"
#include "maxstable/rng.hpp"

using namespace maxstable;

namespace {

SiteSet make_sites(const std::vector<std::pair<double, double>>& pts) {
  SiteSet s;
  s.coords.resize(static_cast<int>(pts.size()), 2);
  for (size_t i = 0; i < pts.size(); ++i) {
    s.ids.push_back("s" + std::to_string(i + 1));
    s.coords(static_cast<int>(i), 0) = pts[i].first;
    s.coords(static_cast<int>(i), 1) = pts[i].second;
  }
  return s;
}

SiteSet random_sites(int n, Rng& rng, double scale = 10.0) {
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < n; ++i) {
    pts.push_back({scale * rng.uniform(), scale * rng.uniform()});
  }
  return make_sites(pts);
}

double min_pair_distance(const Eigen::MatrixX2d& a, const Eigen::MatrixX2d& b,
                         int la, int lb) {
  return (a.row(la) - b.row(lb)).norm();
}

}  // namespace

TEST_CASE("knot selection exhaustion and single knot") {
  const SiteSet sites = make_sites({{0, 0}, {4, 0}, {2, 1}, {0, 3}});
  const Eigen::MatrixX2d all = spacefilling_knots(sites, 4, 1);
  std::set<std::pair<double, double>> got, want;
  for (int l = 0; l < 4; ++l) {
    got.insert({all(l, 0), all(l, 1)});
    want.insert({sites.coords(l, 0), sites.coords(l, 1)});
  }
  CHECK(got == want);

  // Centroid is (1.5, 1); nearest site is (2, 1).
  const Eigen::MatrixX2d one = spacefilling_knots(sites, 1, 1);
  CHECK(one(0, 0) == 2.0);
  CHECK(one(0, 1) == 1.0);

  CHECK_THROWS(spacefilling_knots(sites, 5, 1));
}

TEST_CASE("two knots on a line achieve the brute-force optimum") {
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i <= 10; ++i) pts.push_back({static_cast<double>(i), 0.0});
  const SiteSet sites = make_sites(pts);
  const Eigen::MatrixX2d knots = spacefilling_knots(sites, 2, 3);
  // Greedy: first knot nearest the centroid (x = 5), second the farthest
  // site from it. Min-distance of the chosen pair must equal the brute-force
  // best achievable given the first knot is fixed at x = 5, i.e. distance 5.
  const double chosen = min_pair_distance(knots, knots, 0, 1);
  CHECK(chosen == doctest::Approx(5.0));
  // And the independent brute-force oracle over all pairs confirms no pair
  // containing x = 5 does better.
  double best = 0.0;
  for (int j = 0; j < sites.size(); ++j) {
    best = std::max(best, std::abs(sites.coords(j, 0) - 5.0));
  }
  CHECK(chosen == doctest::Approx(best));
}

TEST_CASE("greedy min-distances are nonincreasing and permutation-stable") {
  Rng rng(17);
  const SiteSet sites = random_sites(20, rng);
  const int L = 7;
  const Eigen::MatrixX2d knots = spacefilling_knots(sites, L, 5);

  // Each successive knot's min distance to its predecessors is nonincreasing.
  double prev = std::numeric_limits<double>::infinity();
  for (int l = 1; l < L; ++l) {
    double mind = std::numeric_limits<double>::infinity();
    for (int m = 0; m < l; ++m) {
      mind = std::min(mind, min_pair_distance(knots, knots, l, m));
    }
    CHECK(mind <= prev + 1e-12);
    prev = mind;
  }

  // Reversing site order yields the same knot set (no ties here).
  SiteSet rev = sites;
  std::reverse(rev.ids.begin(), rev.ids.end());
  rev.coords = sites.coords.colwise().reverse().eval();
  const Eigen::MatrixX2d kr = spacefilling_knots(rev, L, 5);
  std::set<std::pair<double, double>> a, b;
  for (int l = 0; l < L; ++l) {
    a.insert({knots(l, 0), knots(l, 1)});
    b.insert({kr(l, 0), kr(l, 1)});
  }
  CHECK(a == b);
}

TEST_CASE("kernel basis closed-form rows") {
  const SiteSet sites = make_sites({{0, 0}, {1, 0}, {0.5, 2}});
  Eigen::MatrixX2d knots(2, 2);
  knots << 0, 0, 1, 0;

  const Eigen::MatrixXd B = gkf_basis(sites, knots, 0.7);
  for (int i = 0; i < 3; ++i) {
    CHECK(B.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (int l = 0; l < 2; ++l) CHECK(B(i, l) >= 0.0);
  }
  // Site 3 is equidistant from both knots.
  CHECK(B(2, 0) == doctest::Approx(0.5));
  CHECK(B(2, 1) == doctest::Approx(0.5));
  // Direct formula at site 1.
  const double w0 = 1.0, w1 = std::exp(-std::pow(1.0 / 0.7, 2));
  CHECK(B(0, 0) == doctest::Approx(w0 / (w0 + w1)));

  // Single knot: all rows are exactly 1.
  const Eigen::MatrixXd B1 = gkf_basis(sites, knots.topRows(1), 0.7);
  for (int i = 0; i < 3; ++i) CHECK(B1(i, 0) == 1.0);
}

TEST_CASE("kernel basis limits: flat and concentrated") {
  Rng rng(31);
  const SiteSet sites = random_sites(12, rng);
  const Eigen::MatrixX2d knots = spacefilling_knots(sites, 5, 1);
  const Eigen::MatrixXd d = pairwise_distances(sites);
  const double dmax = d.maxCoeff();

  const Eigen::MatrixXd flat = gkf_basis(sites, knots, 1e6 * dmax);
  for (int i = 0; i < sites.size(); ++i) {
    for (int l = 0; l < 5; ++l) {
      CHECK(std::abs(flat(i, l) - 0.2) < 1e-9);
    }
  }

  // Dense knots (L = n_s) with tiny rho: each row concentrates on the
  // knot at the row's own site.
  const Eigen::MatrixX2d all = spacefilling_knots(sites, sites.size(), 1);
  double dmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < sites.size(); ++i) {
    for (int j = i + 1; j < sites.size(); ++j) dmin = std::min(dmin, d(i, j));
  }
  const Eigen::MatrixXd sharp = gkf_basis(sites, all, 0.01 * dmin);
  for (int i = 0; i < sites.size(); ++i) {
    int own = -1;
    for (int l = 0; l < all.rows(); ++l) {
      if ((all.row(l) - sites.coords.row(i)).norm() == 0.0) own = l;
    }
    REQUIRE(own >= 0);
    CHECK(sharp(i, own) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("kernel basis is continuous in site position") {
  const SiteSet sites = make_sites({{0.3, 0.4}, {2, 1}});
  Eigen::MatrixX2d knots(3, 2);
  knots << 0, 0, 1, 1, 2, 0;
  const double eps = 1e-6;
  SiteSet moved = sites;
  moved.coords(0, 0) += eps;
  const Eigen::MatrixXd a = gkf_basis(sites, knots, 0.8);
  const Eigen::MatrixXd b = gkf_basis(moved, knots, 0.8);
  CHECK((a.row(0) - b.row(0)).cwiseAbs().maxCoeff() < 100 * eps);
}

TEST_CASE("rho recovery from noiseless kernel-basis coefficients") {
  Rng rng(53);
  const SiteSet sites = random_sites(25, rng);
  const Eigen::MatrixX2d knots = spacefilling_knots(sites, 6, 1);
  const double rho_true = 2.5, alpha = 0.4;
  const Eigen::MatrixXd theta =
      model_theta(gkf_basis(sites, knots, rho_true), alpha);
  const double rho_hat =
      estimate_rho(theta, sites, knots, alpha, default_rho_grid(sites));
  CHECK(std::abs(rho_hat - rho_true) / rho_true < 0.05);

  // Argmin property against the grid.
  const double loss_hat =
      ebf_loss(gkf_basis(sites, knots, rho_hat), alpha, theta);
  for (const double rho : default_rho_grid(sites)) {
    CHECK(loss_hat <=
          ebf_loss(gkf_basis(sites, knots, rho), alpha, theta) + 1e-12);
  }
}

TEST_CASE("flat loss falls back to the smallest grid rho") {
  const SiteSet sites = make_sites({{0, 0}, {1, 0}, {0, 1}, {1, 1}});
  Eigen::MatrixX2d knots(2, 2);
  knots << 0.5, 0.5, 0.5, 0.5;  // co-located: basis is (0.5, 0.5) always
  const double alpha = 0.6;
  Eigen::MatrixXd theta =
      Eigen::MatrixXd::Constant(4, 4, std::pow(2.0, alpha));
  theta.diagonal().setOnes();
  const std::vector<double> grid = {0.4, 1.0, 3.0};
  CHECK(estimate_rho(theta, sites, knots, alpha, grid) ==
        doctest::Approx(0.4));
}

TEST_CASE("default rho grid is log-spaced over the diameter span") {
  Rng rng(61);
  const SiteSet sites = random_sites(10, rng);
  const double diam = pairwise_distances(sites).maxCoeff();
  const std::vector<double> g = default_rho_grid(sites);
  REQUIRE(g.size() == 12);
  CHECK(g.front() == doctest::Approx(0.1 * diam));
  CHECK(g.back() == doctest::Approx(2.0 * diam));
  for (size_t i = 2; i < g.size(); ++i) {
    CHECK(g[i] / g[i - 1] == doctest::Approx(g[1] / g[0]).epsilon(1e-9));
  }
}
