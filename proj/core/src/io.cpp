#include "maxstable/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace maxstable {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_strict_double(const std::string& s, const std::string& what) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ValidationError("cannot parse " + what + ": '" + s + "'");
  }
  if (pos != s.size() || !std::isfinite(v)) {
    throw ValidationError("invalid " + what + ": '" + s + "'");
  }
  return v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

SiteSet load_sites(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) !=
      std::vector<std::string>{"id", "x", "y"}) {
    throw ValidationError(path + ": expected header 'id,x,y'");
  }
  SiteSet sites;
  std::vector<std::array<double, 2>> coords;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw ValidationError(path + ": expected 3 columns, got line '" + line +
                            "'");
    }
    sites.ids.push_back(fields[0]);
    coords.push_back({parse_strict_double(fields[1], "x coordinate"),
                      parse_strict_double(fields[2], "y coordinate")});
  }
  sites.coords.resize(static_cast<int>(coords.size()), 2);
  for (size_t i = 0; i < coords.size(); ++i) {
    sites.coords(static_cast<int>(i), 0) = coords[i][0];
    sites.coords(static_cast<int>(i), 1) = coords[i][1];
  }
  sites.validate();
  return sites;
}

void save_sites(const std::string& path, const SiteSet& sites) {
  std::ofstream out = open_output(path);
  out << "id,x,y\n";
  for (int i = 0; i < sites.size(); ++i) {
    out << sites.ids[i] << ',' << format_double(sites.coords(i, 0)) << ','
        << format_double(sites.coords(i, 1)) << '\n';
  }
}

FieldPanel load_panel(const std::string& path, const SiteSet& sites) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError(path + ": empty panel file");
  }
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "id") {
    throw ValidationError(path + ": panel header must start with 'id'");
  }
  const int n_t = static_cast<int>(header.size()) - 1;
  const int n_s = sites.size();

  std::unordered_map<std::string, int> index;
  for (int i = 0; i < n_s; ++i) index[sites.ids[i]] = i;

  FieldPanel panel;
  panel.site_ids = sites.ids;
  panel.values = Eigen::MatrixXd::Zero(n_s, n_t);
  panel.mask = BoolArray::Constant(n_s, n_t, false);
  std::vector<bool> seen(n_s, false);

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != n_t + 1) {
      throw ValidationError(path + ": row length mismatch for id '" +
                            fields[0] + "'");
    }
    const auto it = index.find(fields[0]);
    if (it == index.end()) {
      throw ValidationError(path + ": unknown site id '" + fields[0] + "'");
    }
    const int i = it->second;
    if (seen[i]) {
      throw ValidationError(path + ": duplicate panel row for id '" +
                            fields[0] + "'");
    }
    seen[i] = true;
    for (int t = 0; t < n_t; ++t) {
      if (fields[t + 1].empty()) continue;
      panel.values(i, t) = parse_strict_double(fields[t + 1], "panel value");
      panel.mask(i, t) = true;
    }
  }
  for (int i = 0; i < n_s; ++i) {
    if (!seen[i]) {
      throw ValidationError(path + ": no panel row for site '" +
                            sites.ids[i] + "'");
    }
  }
  panel.validate();
  return panel;
}

void save_panel(const std::string& path, const FieldPanel& panel) {
  std::ofstream out = open_output(path);
  out << "id";
  for (int t = 0; t < panel.n_times(); ++t) out << ",t" << (t + 1);
  out << '\n';
  for (int i = 0; i < panel.n_sites(); ++i) {
    out << panel.site_ids[i];
    for (int t = 0; t < panel.n_times(); ++t) {
      out << ',';
      if (panel.mask(i, t)) out << format_double(panel.values(i, t));
    }
    out << '\n';
  }
}

void save_folds(const std::string& path, const FieldPanel& panel,
                const FoldAssignment& folds) {
  std::ofstream out = open_output(path);
  out << "site_id,time_index,fold\n";
  for (int i = 0; i < panel.n_sites(); ++i) {
    for (int t = 0; t < panel.n_times(); ++t) {
      if (folds.fold(i, t) >= 0) {
        out << panel.site_ids[i] << ',' << (t + 1) << ','
            << (folds.fold(i, t) + 1) << '\n';
      }
    }
  }
}

void save_theta(const std::string& path, const Eigen::MatrixXd& theta) {
  std::ofstream out = open_output(path);
  out << "i,j,theta\n";
  for (int i = 0; i < theta.rows(); ++i) {
    for (int j = i + 1; j < theta.cols(); ++j) {
      out << (i + 1) << ',' << (j + 1) << ',' << format_double(theta(i, j))
          << '\n';
    }
  }
}

Eigen::MatrixXd load_theta(const std::string& path, int n_sites) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) !=
      std::vector<std::string>{"i", "j", "theta"}) {
    throw ValidationError(path + ": expected header 'i,j,theta'");
  }
  Eigen::MatrixXd theta = Eigen::MatrixXd::Ones(n_sites, n_sites);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw ValidationError(path + ": malformed theta row '" + line + "'");
    }
    const int i = static_cast<int>(parse_strict_double(fields[0], "i")) - 1;
    const int j = static_cast<int>(parse_strict_double(fields[1], "j")) - 1;
    if (i < 0 || j < 0 || i >= n_sites || j >= n_sites) {
      throw ValidationError(path + ": theta index out of range");
    }
    theta(i, j) = theta(j, i) = parse_strict_double(fields[2], "theta");
  }
  return theta;
}

void save_basis(const std::string& path, const std::vector<std::string>& ids,
                const Eigen::MatrixXd& basis) {
  if (static_cast<int>(ids.size()) != basis.rows()) {
    throw ValidationError("basis rows and ids disagree in length");
  }
  std::ofstream out = open_output(path);
  out << "id";
  for (int l = 0; l < basis.cols(); ++l) out << ",b" << (l + 1);
  out << '\n';
  for (int i = 0; i < basis.rows(); ++i) {
    out << ids[i];
    for (int l = 0; l < basis.cols(); ++l) {
      out << ',' << format_double(basis(i, l));
    }
    out << '\n';
  }
}

Eigen::MatrixXd load_basis(const std::string& path, const SiteSet& sites) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError(path + ": empty basis file");
  }
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "id") {
    throw ValidationError(path + ": basis header must start with 'id'");
  }
  const int L = static_cast<int>(header.size()) - 1;
  std::unordered_map<std::string, int> index;
  for (int i = 0; i < sites.size(); ++i) index[sites.ids[i]] = i;

  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(sites.size(), L);
  std::vector<bool> seen(sites.size(), false);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != L + 1) {
      throw ValidationError(path + ": basis row length mismatch");
    }
    const auto it = index.find(fields[0]);
    if (it == index.end()) {
      throw ValidationError(path + ": unknown site id '" + fields[0] + "'");
    }
    seen[it->second] = true;
    for (int l = 0; l < L; ++l) {
      basis(it->second, l) = parse_strict_double(fields[l + 1], "basis value");
    }
  }
  for (int i = 0; i < sites.size(); ++i) {
    if (!seen[i]) {
      throw ValidationError(path + ": no basis row for site '" +
                            sites.ids[i] + "'");
    }
  }
  return basis;
}

void save_grid_field(const std::string& path, const Eigen::MatrixX2d& points,
                     const Eigen::VectorXd& values) {
  std::ofstream out = open_output(path);
  out << "x,y,value\n";
  for (int i = 0; i < points.rows(); ++i) {
    out << format_double(points(i, 0)) << ',' << format_double(points(i, 1))
        << ',' << format_double(values(i)) << '\n';
  }
}

void save_pgm(const std::string& path, const Eigen::MatrixXd& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  const double lo = image.minCoeff();
  const double hi = image.maxCoeff();
  const double scale = (hi > lo) ? 255.0 / (hi - lo) : 0.0;
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  for (int r = 0; r < image.rows(); ++r) {
    for (int c = 0; c < image.cols(); ++c) {
      const int v = static_cast<int>(std::lround((image(r, c) - lo) * scale));
      out.put(static_cast<char>(std::clamp(v, 0, 255)));
    }
  }
}

}  // namespace maxstable
