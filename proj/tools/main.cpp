// Command-line front end for the max-stable basis-function pipeline.
//
// Subcommands: transform, fit-ebf, fit-gkf, simulate, study, mcmc, cv, map.
// Every run writes resolved_config.json to its output directory; exit codes
// are 0 (success), 2 (usage), 3 (data validation), 4 (numerical failure).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "maxstable/data.hpp"
#include "maxstable/ebf.hpp"
#include "maxstable/extremal.hpp"
#include "maxstable/gkf.hpp"
#include "maxstable/io.hpp"
#include "maxstable/mcmc.hpp"
#include "maxstable/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace maxstable;

namespace {

std::uint64_t env_seed_fallback() {
  if (const char* s = std::getenv("MAXSTABLE_SEED")) {
    return std::strtoull(s, nullptr, 10);
  }
  return 0;
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw ValidationError("invalid config JSON: " + std::string(e.what()));
  }
  return cfg;
}

// Config-file values apply only where the flag was not passed explicitly.
template <typename T>
void resolve(const json& file_cfg, const CLI::Option* opt,
             const std::string& key, T& value) {
  if (opt->count() == 0 && file_cfg.contains(key)) {
    value = file_cfg.at(key).get<T>();
  }
}

void write_resolved_config(const fs::path& dir, const json& resolved) {
  fs::create_directories(dir);
  std::ofstream out(dir / "resolved_config.json");
  out << resolved.dump(2) << '\n';
}

SimScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("invalid scenario JSON: " + std::string(e.what()));
  }
  SimScenario sc;
  sc.L_true = j.value("L_true", sc.L_true);
  sc.alpha = j.value("alpha", sc.alpha);
  sc.n_t = j.value("n_t", sc.n_t);
  sc.n_s = j.value("n_s", sc.n_s);
  sc.rho = j.value("rho", sc.rho);
  sc.n_datasets = j.value("n_datasets", sc.n_datasets);
  sc.seed = j.value("seed", sc.seed);
  if (j.contains("domain")) {
    const auto& d = j.at("domain");
    sc.x_min = d.at(0).get<double>();
    sc.x_max = d.at(1).get<double>();
    sc.y_min = d.at(2).get<double>();
    sc.y_max = d.at(3).get<double>();
  }
  sc.validate();
  return sc;
}

json scenario_to_json(const SimScenario& sc) {
  return json{{"L_true", sc.L_true},
              {"alpha", sc.alpha},
              {"n_t", sc.n_t},
              {"n_s", sc.n_s},
              {"rho", sc.rho},
              {"domain", {sc.x_min, sc.x_max, sc.y_min, sc.y_max}},
              {"n_datasets", sc.n_datasets},
              {"seed", sc.seed}};
}

struct Pipeline {
  Eigen::MatrixXd theta_hat;
  Eigen::MatrixXd theta_tilde;
  double delta = 0.0;
  double alpha = 0.0;
};

Pipeline run_pipeline(const FieldPanel& panel, const SiteSet& sites,
                      const std::string& delta_spec, double alpha_override,
                      double neighbor_frac, std::uint64_t seed) {
  Pipeline p;
  p.theta_hat = empirical_theta(panel);
  if (delta_spec == "auto") {
    p.delta = select_bandwidth(p.theta_hat, sites,
                               default_bandwidth_grid(sites), 10, seed);
  } else {
    p.delta = std::stod(delta_spec);
    if (!(p.delta > 0.0)) throw ValidationError("delta must be positive");
  }
  p.theta_tilde = smooth_theta(p.theta_hat, sites, p.delta);
  p.alpha = (alpha_override > 0.0)
                ? alpha_override
                : estimate_alpha(p.theta_hat, sites, neighbor_frac);
  return p;
}

Eigen::MatrixX2d make_grid(const SiteSet& sites, int nx, int ny) {
  const double x0 = sites.coords.col(0).minCoeff();
  const double x1 = sites.coords.col(0).maxCoeff();
  const double y0 = sites.coords.col(1).minCoeff();
  const double y1 = sites.coords.col(1).maxCoeff();
  Eigen::MatrixX2d grid(nx * ny, 2);
  int k = 0;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      grid(k, 0) = x0 + (nx == 1 ? 0.5 : static_cast<double>(ix) / (nx - 1)) *
                            (x1 - x0);
      grid(k, 1) = y0 + (ny == 1 ? 0.5 : static_cast<double>(iy) / (ny - 1)) *
                            (y1 - y0);
      ++k;
    }
  }
  return grid;
}

// Grid fields are stored bottom row first; images want the top row first.
Eigen::MatrixXd field_to_image(const Eigen::VectorXd& values, int nx, int ny) {
  Eigen::MatrixXd img(ny, nx);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      img(ny - 1 - iy, ix) = values(iy * nx + ix);
    }
  }
  return img;
}

double median_distance(const SiteSet& sites) {
  return default_bandwidth_grid(sites, 1, 1.0, 1.0)[0];
}

int run(int argc, char** argv) {
  CLI::App app{"Low-rank max-stable modeling of spatial extremes"};
  app.require_subcommand(1);

  std::string config_path;
  int threads = 1;
  app.add_option("--config", config_path, "JSON config file (flags override)");
  app.add_option("--threads", threads, "Worker thread cap");

  // ---- transform ----
  auto* transform = app.add_subcommand(
      "transform", "Rank-transform a panel to unit Frechet margins");
  std::string t_sites, t_panel, t_out;
  auto* t_sites_o = transform->add_option("--sites", t_sites)->required();
  auto* t_panel_o = transform->add_option("--panel", t_panel)->required();
  auto* t_out_o = transform->add_option("--out", t_out)->required();

  // ---- fit-ebf / fit-gkf ----
  std::string f_sites, f_panel, f_outdir, f_delta = "auto";
  int f_L = 10;
  double f_alpha = -1.0, f_neighbor = 0.01;
  int f_restarts = 3, f_max_iter = 5000;
  std::uint64_t f_seed = env_seed_fallback();
  auto add_fit_options = [&](CLI::App* cmd) {
    cmd->add_option("--sites", f_sites)->required();
    cmd->add_option("--panel", f_panel)->required();
    cmd->add_option("--out-dir", f_outdir)->required();
    cmd->add_option("--L", f_L, "Number of basis functions");
    cmd->add_option("--delta", f_delta, "Smoothing bandwidth or 'auto'");
    cmd->add_option("--alpha", f_alpha, "Override the alpha estimate");
    cmd->add_option("--neighbor-frac", f_neighbor);
    cmd->add_option("--restarts", f_restarts);
    cmd->add_option("--max-iter", f_max_iter);
    cmd->add_option("--seed", f_seed);
  };
  auto* fit_ebf_cmd =
      app.add_subcommand("fit-ebf", "Estimate empirical basis functions");
  add_fit_options(fit_ebf_cmd);
  auto* fit_gkf_cmd = app.add_subcommand(
      "fit-gkf", "Fit the Gaussian kernel basis baseline");
  add_fit_options(fit_gkf_cmd);

  // ---- simulate / study ----
  std::string s_scenario, s_outdir, s_fit_Ls = "9,25";
  int s_restarts = 2, s_max_iter = 2000;
  auto* simulate_cmd =
      app.add_subcommand("simulate", "Simulate datasets from a scenario");
  simulate_cmd->add_option("--scenario", s_scenario)->required();
  simulate_cmd->add_option("--out-dir", s_outdir)->required();
  auto* study_cmd = app.add_subcommand(
      "study", "Run the simulation study (scenario JSON, summary CSV)");
  study_cmd->add_option("--scenario", s_scenario)->required();
  study_cmd->add_option("--out-dir", s_outdir)->required();
  study_cmd->add_option("--fit-Ls", s_fit_Ls, "Comma-separated EBF sizes");
  study_cmd->add_option("--restarts", s_restarts);
  study_cmd->add_option("--max-iter", s_max_iter);

  // ---- mcmc / cv ----
  std::string m_sites, m_panel, m_basis, m_outdir, m_method = "ebf";
  std::string m_L_list = "2,5,10";
  double m_alpha = 0.5, m_step = 1.0, m_neighbor = 0.01;
  int m_iterations = 10000, m_burn_in = 2000, m_thin = 10, m_k = 5;
  int m_restarts = 2, m_max_iter = 2000;
  bool m_rank_transform = false;
  std::uint64_t m_seed = env_seed_fallback();
  auto* mcmc_cmd = app.add_subcommand(
      "mcmc", "Sample the latent positive-stable variables");
  mcmc_cmd->add_option("--sites", m_sites)->required();
  mcmc_cmd->add_option("--panel", m_panel)->required();
  mcmc_cmd->add_option("--basis", m_basis)->required();
  mcmc_cmd->add_option("--alpha", m_alpha)->required();
  mcmc_cmd->add_option("--out-dir", m_outdir)->required();
  mcmc_cmd->add_option("--iterations", m_iterations);
  mcmc_cmd->add_option("--burn-in", m_burn_in);
  mcmc_cmd->add_option("--thin", m_thin);
  mcmc_cmd->add_option("--step", m_step);
  mcmc_cmd->add_option("--seed", m_seed);
  mcmc_cmd->add_flag("--rank-transform", m_rank_transform,
                     "Transform the panel to unit Frechet first");

  auto* cv_cmd = app.add_subcommand(
      "cv", "Cross-validated MAD scores per method and L");
  cv_cmd->add_option("--sites", m_sites)->required();
  cv_cmd->add_option("--panel", m_panel)->required();
  cv_cmd->add_option("--out-dir", m_outdir)->required();
  cv_cmd->add_option("--method", m_method, "ebf, gkf, or both");
  cv_cmd->add_option("--L-list", m_L_list);
  cv_cmd->add_option("--k", m_k);
  cv_cmd->add_option("--iterations", m_iterations);
  cv_cmd->add_option("--burn-in", m_burn_in);
  cv_cmd->add_option("--thin", m_thin);
  cv_cmd->add_option("--restarts", m_restarts);
  cv_cmd->add_option("--max-iter", m_max_iter);
  cv_cmd->add_option("--neighbor-frac", m_neighbor);
  cv_cmd->add_option("--seed", m_seed);
  cv_cmd->add_flag("--rank-transform", m_rank_transform);

  // ---- map ----
  std::string g_sites, g_basis, g_outdir, g_grid = "50,50", g_ref;
  double g_alpha = 0.5, g_delta = -1.0;
  auto* map_cmd = app.add_subcommand(
      "map", "Interpolate basis functions and extremal-coefficient maps");
  map_cmd->add_option("--sites", g_sites)->required();
  map_cmd->add_option("--basis", g_basis)->required();
  map_cmd->add_option("--alpha", g_alpha)->required();
  map_cmd->add_option("--out-dir", g_outdir)->required();
  map_cmd->add_option("--grid", g_grid, "NX,NY");
  map_cmd->add_option("--ref-site", g_ref);
  map_cmd->add_option("--delta", g_delta,
                      "Interpolation bandwidth (default: median distance)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const json file_cfg = load_config_file(config_path);
  resolve(file_cfg, app.get_option("--threads"), "threads", threads);

  auto parse_int_list = [](const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    if (out.empty()) throw ValidationError("empty integer list");
    return out;
  };

  if (*transform) {
    resolve(file_cfg, t_sites_o, "sites", t_sites);
    resolve(file_cfg, t_panel_o, "panel", t_panel);
    resolve(file_cfg, t_out_o, "out", t_out);
    const SiteSet sites = load_sites(t_sites);
    const FieldPanel panel = load_panel(t_panel, sites);
    save_panel(t_out, rank_transform_frechet(panel));
    const fs::path dir = fs::path(t_out).has_parent_path()
                             ? fs::path(t_out).parent_path()
                             : fs::path(".");
    write_resolved_config(dir, json{{"command", "transform"},
                                    {"sites", t_sites},
                                    {"panel", t_panel},
                                    {"out", t_out},
                                    {"threads", threads}});
    return 0;
  }

  if (*fit_ebf_cmd || *fit_gkf_cmd) {
    CLI::App* cmd = *fit_ebf_cmd ? fit_ebf_cmd : fit_gkf_cmd;
    for (auto [key, var] : std::initializer_list<
             std::pair<const char*, std::string*>>{
             {"sites", &f_sites}, {"panel", &f_panel}, {"out-dir", &f_outdir},
             {"delta", &f_delta}}) {
      resolve(file_cfg, cmd->get_option("--" + std::string(key)), key, *var);
    }
    resolve(file_cfg, cmd->get_option("--L"), "L", f_L);
    resolve(file_cfg, cmd->get_option("--alpha"), "alpha", f_alpha);
    resolve(file_cfg, cmd->get_option("--neighbor-frac"), "neighbor_frac",
            f_neighbor);
    resolve(file_cfg, cmd->get_option("--restarts"), "restarts", f_restarts);
    resolve(file_cfg, cmd->get_option("--max-iter"), "max_iter", f_max_iter);
    resolve(file_cfg, cmd->get_option("--seed"), "seed", f_seed);

    const SiteSet sites = load_sites(f_sites);
    const FieldPanel panel = load_panel(f_panel, sites);
    const Pipeline p =
        run_pipeline(panel, sites, f_delta, f_alpha, f_neighbor, f_seed);

    fs::create_directories(f_outdir);
    const fs::path dir(f_outdir);
    save_theta((dir / "theta_hat.csv").string(), p.theta_hat);
    save_theta((dir / "theta_tilde.csv").string(), p.theta_tilde);

    json report{{"alpha", p.alpha}, {"delta", p.delta}, {"L", f_L},
                {"seed", f_seed}};
    if (*fit_ebf_cmd) {
      EbfFitConfig cfg;
      cfg.L = f_L;
      cfg.restarts = f_restarts;
      cfg.max_iter = f_max_iter;
      cfg.seed = f_seed;
      const EbfFitResult fit = fit_ebf(p.theta_tilde, p.alpha, cfg, &sites);
      save_basis((dir / "basis.csv").string(), sites.ids, fit.B);
      report["loss"] = fit.loss;
      report["v"] = std::vector<double>(fit.v.data(), fit.v.data() + fit.v.size());
      report["iterations"] = fit.iterations;
      report["converged"] = fit.converged;
    } else {
      const Eigen::MatrixX2d knots = spacefilling_knots(sites, f_L, f_seed);
      const double rho = estimate_rho(p.theta_tilde, sites, knots, p.alpha,
                                      default_rho_grid(sites));
      const Eigen::MatrixXd B = gkf_basis(sites, knots, rho);
      SiteSet knot_set;
      knot_set.coords = knots;
      for (int l = 0; l < f_L; ++l) {
        knot_set.ids.push_back("k" + std::to_string(l + 1));
      }
      save_sites((dir / "knots.csv").string(), knot_set);
      save_basis((dir / "basis.csv").string(), sites.ids, B);
      report["rho"] = rho;
      report["loss"] = ebf_loss(B, p.alpha, p.theta_tilde);
    }
    {
      std::ofstream out(dir / "report.json");
      out << report.dump(2) << '\n';
    }
    json resolved{{"command", *fit_ebf_cmd ? "fit-ebf" : "fit-gkf"},
                  {"sites", f_sites},
                  {"panel", f_panel},
                  {"out_dir", f_outdir},
                  {"L", f_L},
                  {"delta", f_delta},
                  {"delta_resolved", p.delta},
                  {"alpha", p.alpha},
                  {"neighbor_frac", f_neighbor},
                  {"restarts", f_restarts},
                  {"max_iter", f_max_iter},
                  {"seed", f_seed},
                  {"threads", threads}};
    write_resolved_config(dir, resolved);
    return 0;
  }

  if (*simulate_cmd || *study_cmd) {
    CLI::App* cmd = *simulate_cmd ? simulate_cmd : study_cmd;
    resolve(file_cfg, cmd->get_option("--scenario"), "scenario", s_scenario);
    resolve(file_cfg, cmd->get_option("--out-dir"), "out_dir", s_outdir);
    const SimScenario sc = load_scenario(s_scenario);
    fs::create_directories(s_outdir);
    const fs::path dir(s_outdir);

    if (*simulate_cmd) {
      for (int d = 0; d < sc.n_datasets; ++d) {
        Rng rng = Rng(sc.seed).stream(static_cast<std::uint64_t>(d));
        const SiteSet sites = scenario_sites(sc, rng);
        const Eigen::MatrixXd B =
            gkf_basis(sites, scenario_knot_grid(sc), sc.rho);
        const FieldPanel panel = simulate_rs(B, sc.alpha, sc.n_t, rng);
        const std::string tag = std::to_string(d + 1);
        save_sites((dir / ("sites_" + tag + ".csv")).string(), sites);
        save_panel((dir / ("panel_" + tag + ".csv")).string(), panel);
      }
      write_resolved_config(dir, json{{"command", "simulate"},
                                      {"scenario", scenario_to_json(sc)},
                                      {"out_dir", s_outdir},
                                      {"threads", threads}});
      return 0;
    }

    resolve(file_cfg, study_cmd->get_option("--fit-Ls"), "fit_Ls", s_fit_Ls);
    resolve(file_cfg, study_cmd->get_option("--restarts"), "restarts",
            s_restarts);
    resolve(file_cfg, study_cmd->get_option("--max-iter"), "max_iter",
            s_max_iter);
    const std::vector<int> fit_Ls = parse_int_list(s_fit_Ls);
    const StudySummary summary =
        run_simulation_study(sc, fit_Ls, threads, s_restarts, s_max_iter);

    {
      std::ofstream out(dir / "summary.csv");
      out << "estimator,mean,sd\n";
      out << "alpha_hat," << format_double(summary.mean_alpha()) << ','
          << format_double(summary.sd_alpha()) << '\n';
      out << "mse_initial_x100," << format_double(summary.mean_mse_initial())
          << ",\n";
      out << "mse_smoothed_x100," << format_double(summary.mean_mse_smoothed())
          << ",\n";
      for (size_t i = 0; i < fit_Ls.size(); ++i) {
        out << "mse_ebf_L" << fit_Ls[i] << "_x100,"
            << format_double(summary.mean_mse_ebf(static_cast<int>(i)))
            << ",\n";
      }
    }
    {
      std::ofstream out(dir / "records.csv");
      out << "dataset,alpha_hat,delta_hat,mse_initial,mse_smoothed";
      for (const int L : fit_Ls) out << ",mse_ebf_L" << L;
      out << '\n';
      for (size_t d = 0; d < summary.records.size(); ++d) {
        const auto& r = summary.records[d];
        out << (d + 1) << ',' << format_double(r.alpha_hat) << ','
            << format_double(r.delta_hat) << ','
            << format_double(r.mse_initial) << ','
            << format_double(r.mse_smoothed);
        for (const double m : r.mse_ebf) out << ',' << format_double(m);
        out << '\n';
      }
    }
    write_resolved_config(dir, json{{"command", "study"},
                                    {"scenario", scenario_to_json(sc)},
                                    {"fit_Ls", fit_Ls},
                                    {"restarts", s_restarts},
                                    {"max_iter", s_max_iter},
                                    {"out_dir", s_outdir},
                                    {"threads", threads}});
    return 0;
  }

  if (*mcmc_cmd) {
    const SiteSet sites = load_sites(m_sites);
    FieldPanel panel = load_panel(m_panel, sites);
    if (m_rank_transform) panel = rank_transform_frechet(panel);
    const Eigen::MatrixXd B = load_basis(m_basis, sites);

    McmcConfig cfg;
    cfg.iterations = m_iterations;
    cfg.burn_in = m_burn_in;
    cfg.thin = m_thin;
    cfg.initial_step = m_step;
    cfg.seed = m_seed;
    const McmcResult result = run_mcmc(panel, B, m_alpha, cfg);

    fs::create_directories(m_outdir);
    const fs::path dir(m_outdir);
    {
      std::ofstream out(dir / "draws.csv");
      out << "iter,l,t,A\n";
      for (size_t d = 0; d < result.draws.size(); ++d) {
        for (int l = 0; l < result.draws[d].rows(); ++l) {
          for (int t = 0; t < result.draws[d].cols(); ++t) {
            out << (d + 1) << ',' << (l + 1) << ',' << (t + 1) << ','
                << format_double(result.draws[d](l, t)) << '\n';
          }
        }
      }
    }
    {
      std::ofstream out(dir / "report.json");
      out << json{{"draws", result.draws.size()},
                  {"mean_acceptance", result.acceptance.mean()}}
                 .dump(2)
          << '\n';
    }
    write_resolved_config(dir, json{{"command", "mcmc"},
                                    {"sites", m_sites},
                                    {"panel", m_panel},
                                    {"basis", m_basis},
                                    {"alpha", m_alpha},
                                    {"iterations", m_iterations},
                                    {"burn_in", m_burn_in},
                                    {"thin", m_thin},
                                    {"step", m_step},
                                    {"rank_transform", m_rank_transform},
                                    {"seed", m_seed},
                                    {"out_dir", m_outdir},
                                    {"threads", threads}});
    return 0;
  }

  if (*cv_cmd) {
    const SiteSet sites = load_sites(m_sites);
    FieldPanel panel = load_panel(m_panel, sites);
    if (m_rank_transform) panel = rank_transform_frechet(panel);

    CvConfig cfg;
    cfg.k = m_k;
    cfg.seed = m_seed;
    cfg.mcmc.iterations = m_iterations;
    cfg.mcmc.burn_in = m_burn_in;
    cfg.mcmc.thin = m_thin;
    cfg.mcmc.seed = m_seed;
    cfg.ebf_restarts = m_restarts;
    cfg.ebf_max_iter = m_max_iter;
    cfg.neighbor_fraction = m_neighbor;
    cfg.n_threads = threads;
    const std::vector<int> L_list = parse_int_list(m_L_list);

    std::vector<BasisMethod> methods;
    if (m_method == "ebf") {
      methods = {BasisMethod::kEbf};
    } else if (m_method == "gkf") {
      methods = {BasisMethod::kGkf};
    } else if (m_method == "both") {
      methods = {BasisMethod::kEbf, BasisMethod::kGkf};
    } else {
      throw CLI::ValidationError("--method must be ebf, gkf, or both");
    }

    json report = json::array();
    for (const BasisMethod method : methods) {
      for (const CvScore& s : crossvalidate(panel, sites, method, L_list, cfg)) {
        report.push_back(
            json{{"method", s.method == BasisMethod::kEbf ? "ebf" : "gkf"},
                 {"L", s.L},
                 {"fold_scores", s.fold_scores},
                 {"mean_mad", s.mean_mad}});
      }
    }
    fs::create_directories(m_outdir);
    {
      std::ofstream out(fs::path(m_outdir) / "cv_report.json");
      out << report.dump(2) << '\n';
    }
    write_resolved_config(fs::path(m_outdir),
                          json{{"command", "cv"},
                               {"sites", m_sites},
                               {"panel", m_panel},
                               {"method", m_method},
                               {"L_list", L_list},
                               {"k", m_k},
                               {"iterations", m_iterations},
                               {"burn_in", m_burn_in},
                               {"thin", m_thin},
                               {"restarts", m_restarts},
                               {"max_iter", m_max_iter},
                               {"neighbor_frac", m_neighbor},
                               {"rank_transform", m_rank_transform},
                               {"seed", m_seed},
                               {"out_dir", m_outdir},
                               {"threads", threads}});
    return 0;
  }

  if (*map_cmd) {
    const SiteSet sites = load_sites(g_sites);
    const Eigen::MatrixXd B = load_basis(g_basis, sites);
    const std::vector<int> dims = parse_int_list(g_grid);
    if (dims.size() != 2 || dims[0] < 1 || dims[1] < 1) {
      throw ValidationError("--grid expects NX,NY");
    }
    const int nx = dims[0], ny = dims[1];
    const double delta = g_delta > 0.0 ? g_delta : median_distance(sites);

    const Eigen::MatrixX2d grid = make_grid(sites, nx, ny);
    const Eigen::MatrixXd B_grid = interpolate_basis(B, sites, grid, delta);

    fs::create_directories(g_outdir);
    const fs::path dir(g_outdir);
    for (int l = 0; l < B_grid.cols(); ++l) {
      const std::string tag = std::to_string(l + 1);
      save_grid_field((dir / ("basis_" + tag + ".csv")).string(), grid,
                      B_grid.col(l));
      save_pgm((dir / ("basis_" + tag + ".pgm")).string(),
               field_to_image(B_grid.col(l), nx, ny));
    }
    if (!g_ref.empty()) {
      const auto it = std::find(sites.ids.begin(), sites.ids.end(), g_ref);
      if (it == sites.ids.end()) {
        throw ValidationError("unknown reference site: " + g_ref);
      }
      const int ref = static_cast<int>(it - sites.ids.begin());
      const Eigen::VectorXd theta = theta_map(B_grid, B.row(ref), g_alpha);
      save_grid_field((dir / "theta_ref.csv").string(), grid, theta);
      save_pgm((dir / "theta_ref.pgm").string(),
               field_to_image(theta, nx, ny));
    }
    write_resolved_config(dir, json{{"command", "map"},
                                    {"sites", g_sites},
                                    {"basis", g_basis},
                                    {"alpha", g_alpha},
                                    {"grid", g_grid},
                                    {"ref_site", g_ref},
                                    {"delta", delta},
                                    {"out_dir", g_outdir},
                                    {"threads", threads}});
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
