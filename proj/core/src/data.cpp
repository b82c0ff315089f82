#include "maxstable/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "maxstable/rng.hpp"

namespace maxstable {

void SiteSet::validate() const {
  if (static_cast<int>(ids.size()) != coords.rows()) {
    throw ValidationError("site ids and coordinates disagree in length");
  }
  if (size() < 2) {
    throw ValidationError("need at least 2 sites");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw ValidationError("duplicate site id: " + id);
    }
  }
  if (!coords.allFinite()) {
    throw ValidationError("non-finite site coordinate");
  }
}

void FieldPanel::validate() const {
  if (n_times() < 2) {
    throw ValidationError("need at least 2 time replicates");
  }
  if (static_cast<int>(site_ids.size()) != n_sites() ||
      mask.rows() != values.rows() || mask.cols() != values.cols()) {
    throw ValidationError("panel shape mismatch");
  }
  for (int i = 0; i < n_sites(); ++i) {
    int observed = 0;
    for (int t = 0; t < n_times(); ++t) {
      if (mask(i, t)) {
        ++observed;
        if (!std::isfinite(values(i, t))) {
          throw ValidationError("non-finite observed value at site " +
                                site_ids[i]);
        }
      }
    }
    if (observed < 2) {
      throw ValidationError("site " + site_ids[i] +
                            " has fewer than 2 observed times");
    }
  }
}

Eigen::MatrixXd pairwise_distances(const SiteSet& sites) {
  const int n = sites.size();
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = (sites.coords.row(i) - sites.coords.row(j)).norm();
    }
  }
  return d;
}

std::vector<double> average_ranks(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return x[a] < x[b]; });
  std::vector<double> ranks(n, 0.0);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * (i + j) + 1.0;  // mean of 1-based ranks i+1..j+1
    for (int k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

FieldPanel rank_transform_frechet(const FieldPanel& panel) {
  panel.validate();
  FieldPanel out = panel;
  for (int i = 0; i < panel.n_sites(); ++i) {
    std::vector<double> obs;
    std::vector<int> idx;
    for (int t = 0; t < panel.n_times(); ++t) {
      if (panel.mask(i, t)) {
        obs.push_back(panel.values(i, t));
        idx.push_back(t);
      }
    }
    const double m = static_cast<double>(obs.size());
    const std::vector<double> ranks = average_ranks(obs);
    for (size_t k = 0; k < idx.size(); ++k) {
      out.values(i, idx[k]) = -1.0 / std::log(ranks[k] / (m + 1.0));
    }
  }
  return out;
}

FoldAssignment kfold_split(const FieldPanel& panel, int k,
                           std::uint64_t seed) {
  if (k < 2) {
    throw ValidationError("kfold_split requires k >= 2");
  }
  std::vector<std::pair<int, int>> cells;
  for (int i = 0; i < panel.n_sites(); ++i) {
    for (int t = 0; t < panel.n_times(); ++t) {
      if (panel.mask(i, t)) cells.emplace_back(i, t);
    }
  }
  if (static_cast<int>(cells.size()) < k) {
    throw ValidationError("fewer observed cells than folds");
  }
  Rng rng(seed);
  rng.shuffle(cells.begin(), cells.end());

  FoldAssignment out;
  out.k = k;
  out.fold = Eigen::ArrayXXi::Constant(panel.n_sites(), panel.n_times(), -1);
  for (size_t c = 0; c < cells.size(); ++c) {
    out.fold(cells[c].first, cells[c].second) = static_cast<int>(c % k);
  }
  return out;
}

}  // namespace maxstable
