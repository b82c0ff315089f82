#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace maxstable {

// Thrown for invalid inputs (bad files, broken invariants).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a numerical procedure cannot produce a result
// (degenerate bandwidth, underflowing weights, ...).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Planar observation locations.
struct SiteSet {
  std::vector<std::string> ids;
  Eigen::MatrixX2d coords;  // one row per site

  int size() const { return static_cast<int>(ids.size()); }
  void validate() const;
};

// n_s x n_t observation matrix, one column per time replicate.
// mask(i, t) == true means the cell is observed.
struct FieldPanel {
  std::vector<std::string> site_ids;
  Eigen::MatrixXd values;
  BoolArray mask;

  int n_sites() const { return static_cast<int>(values.rows()); }
  int n_times() const { return static_cast<int>(values.cols()); }
  bool fully_observed() const { return mask.all(); }
  int observed_count() const { return static_cast<int>(mask.count()); }
  void validate() const;
};

// Fold index in [0, k) for every observed cell, -1 for missing cells.
struct FoldAssignment {
  int k = 0;
  Eigen::ArrayXXi fold;
};

// Euclidean distance matrix between site coordinates.
Eigen::MatrixXd pairwise_distances(const SiteSet& sites);

// Average ranks (1-based, ties get the mean of tied ranks).
std::vector<double> average_ranks(const std::vector<double>& x);

// Per-site rank transform to the unit Frechet scale:
// z = -1 / log(rank / (m + 1)) over each site's observed entries.
FieldPanel rank_transform_frechet(const FieldPanel& panel);

// Uniformly random partition of the observed cells into k folds whose
// sizes differ by at most one. Deterministic given the seed.
FoldAssignment kfold_split(const FieldPanel& panel, int k, std::uint64_t seed);

}  // namespace maxstable
