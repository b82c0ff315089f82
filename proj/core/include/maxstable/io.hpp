#pragma once

#include <string>

#include "maxstable/data.hpp"

namespace maxstable {

// Sites CSV: header `id,x,y`.
SiteSet load_sites(const std::string& path);
void save_sites(const std::string& path, const SiteSet& sites);

// Panel CSV: header `id,t1,...,tN`; empty cells denote missing values.
FieldPanel load_panel(const std::string& path, const SiteSet& sites);
void save_panel(const std::string& path, const FieldPanel& panel);

// Fold CSV: header `site_id,time_index,fold` (time_index 1-based).
void save_folds(const std::string& path, const FieldPanel& panel,
                const FoldAssignment& folds);

// Theta CSV: long form `i,j,theta` over the upper triangle (i < j, 1-based).
void save_theta(const std::string& path, const Eigen::MatrixXd& theta);
Eigen::MatrixXd load_theta(const std::string& path, int n_sites);

// Basis CSV: header `id,b1,...,bL`.
void save_basis(const std::string& path, const std::vector<std::string>& ids,
                const Eigen::MatrixXd& basis);
Eigen::MatrixXd load_basis(const std::string& path, const SiteSet& sites);

// Grid field CSV: long form `x,y,value`.
void save_grid_field(const std::string& path, const Eigen::MatrixX2d& points,
                     const Eigen::VectorXd& values);

// 8-bit binary PGM heatmap, values scaled linearly min -> 0, max -> 255.
void save_pgm(const std::string& path, const Eigen::MatrixXd& image);

// Lossless double formatting (17 significant digits).
std::string format_double(double x);

}  // namespace maxstable
