// Command-line front end: simulate closed-loop runs, sweep trigger
// parameters, verify gain certificates, print bound constants, and
// rerun the shipped batch-reactor study.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stqc/config.hpp"
#include "stqc/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitBreach = 3;

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw stqc::ValidationError("cannot write " + path.string());
  out << content;
}

struct RunOutputs {
  stqc::Scenario scenario;
  stqc::SimTrace trace;
  stqc::DecayFit fit;
  bool fitted = false;
};

RunOutputs execute(const stqc::Config& cfg) {
  RunOutputs out{stqc::build_scenario(cfg), {}, {}, false};
  out.trace = stqc::run_closed_loop(out.scenario);
  try {
    out.fit = stqc::estimate_decay(out.trace);
    out.fitted = true;
  } catch (const stqc::DegenerateTraceError&) {
    // all-zero or too-short traces simply ship without a fit
  }
  return out;
}

void write_run_outputs(const stqc::Config& cfg, const RunOutputs& run,
                       const fs::path& dir, const std::string& stem) {
  write_file(dir / (stem + ".csv"),
             stqc::trace_csv_string(run.trace, run.scenario.model));
  write_file(dir / (stem + "_summary.json"),
             stqc::summary_json(run.scenario, run.trace,
                                run.fitted ? &run.fit : nullptr));
  write_file(dir / (stem + "_resolved_config.json"),
             stqc::resolved_config_json(cfg, run.scenario));
}

int cmd_simulate(const std::string& config_path, std::string out_dir) {
  const stqc::Config cfg = stqc::load_config(config_path);
  if (out_dir.empty()) out_dir = cfg.out_dir.empty() ? "out" : cfg.out_dir;
  const RunOutputs run = execute(cfg);
  write_run_outputs(cfg, run, out_dir, "trace");
  std::cout << stqc::summary_json(run.scenario, run.trace,
                                  run.fitted ? &run.fit : nullptr);
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& grid_path,
              std::string out_dir) {
  const stqc::Config cfg = stqc::load_config(config_path);
  if (out_dir.empty()) out_dir = cfg.out_dir.empty() ? "out" : cfg.out_dir;

  std::ifstream in(grid_path);
  if (!in) throw stqc::ValidationError("cannot open grid file " + grid_path);
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const ordered_json::parse_error& e) {
    throw stqc::SchemaError(std::string("grid: not valid JSON: ") + e.what());
  }
  std::vector<double> sigmas;
  std::vector<long> levels, tau_maxes;
  for (const auto& v : doc.value("sigma", ordered_json::array())) {
    sigmas.push_back(v.get<double>());
  }
  for (const auto& v : doc.value("N", ordered_json::array())) {
    levels.push_back(v.get<long>());
  }
  for (const auto& v : doc.value("tau_max", ordered_json::array())) {
    tau_maxes.push_back(v.get<long>());
  }
  if (sigmas.empty()) sigmas.push_back(cfg.sigma);
  if (levels.empty()) levels.push_back(cfg.levels);
  if (tau_maxes.empty()) tau_maxes.push_back(cfg.tau_max);

  const stqc::Scenario base = stqc::build_scenario(cfg);
  const auto rows = stqc::sweep_tradeoff(base, sigmas, levels, tau_maxes);
  std::ostringstream os;
  stqc::write_sweep_csv(os, rows);
  write_file(fs::path(out_dir) / "sweep.csv", os.str());
  std::cout << os.str();
  return kExitOk;
}

int cmd_verify_gains(const std::string& config_path) {
  const stqc::Config cfg = stqc::load_config(config_path);
  const stqc::Scenario sc = stqc::build_scenario(cfg);
  const stqc::SystemModel& m = sc.model;

  std::cout << "variant: " << stqc::to_string(sc.variant) << "\n";
  std::cout << "rho(A + B K) = "
            << stqc::format_double(
                   stqc::spectral_radius_estimate(m.A + m.B * sc.gains.K))
            << "  (Schur: " << (stqc::is_schur(m.A + m.B * sc.gains.K) ? "yes" : "no")
            << ")\n";
  if (sc.gains.L) {
    const stqc::Matrix a_cl = m.A - *sc.gains.L * m.C;
    std::cout << "rho(A - L C) = "
              << stqc::format_double(stqc::spectral_radius_estimate(a_cl))
              << "  (Schur: " << (stqc::is_schur(a_cl) ? "yes" : "no") << ")\n";
  }
  if (sc.gains.M) {
    std::cout << "deadbeat residual ||(At + Bt K)^eta|| = "
              << stqc::format_double(
                     stqc::verify_deadbeat_gain(m.At, m.Bt, sc.gains.K, m.eta))
              << "\n";
    std::cout << "rho(At^eta (I - M C)) = "
              << stqc::format_double(stqc::spectral_radius_estimate(sc.arts->abar_cl))
              << "  (Schur: " << (stqc::is_schur(sc.arts->abar_cl) ? "yes" : "no")
              << ")\n";
  }
  std::cout << "certificate: gamma = " << stqc::format_double(sc.cert.gamma)
            << ", Gamma = " << stqc::format_double(sc.cert.Gamma) << "\n";
  const stqc::SigmaInterval win = stqc::sigma_interval(sc.trigger.levels,
                                                       sc.trigger.alpha);
  std::cout << "sigma window: [" << stqc::format_double(win.lo) << ", "
            << stqc::format_double(win.hi) << ")  sigma = "
            << stqc::format_double(sc.trigger.sigma)
            << (sc.trigger.sigma_below_floor ? "  (below 1/N floor)" : "") << "\n";
  return kExitOk;
}

int cmd_bounds(const std::string& config_path) {
  const stqc::Config cfg = stqc::load_config(config_path);
  const stqc::Scenario sc = stqc::build_scenario(cfg);
  const stqc::SigmaInterval win = stqc::sigma_interval(sc.trigger.levels,
                                                       sc.trigger.alpha);
  ordered_json doc;
  doc["alpha"] = sc.trigger.alpha;
  doc["gamma"] = sc.cert.gamma;
  doc["Gamma"] = sc.cert.Gamma;
  doc["sigma_window"] = {win.lo, win.hi};
  doc["sigma"] = sc.trigger.sigma;
  doc["sigma_below_floor"] = sc.trigger.sigma_below_floor;
  doc["omega1"] = sc.trigger.omega1;
  doc["omega_a"] = sc.growth.omega_a;
  doc["dos_bound"] = stqc::dos_bound(sc.trigger.omega1, sc.growth.omega_a);
  std::cout << doc.dump(2) << "\n";
  return kExitOk;
}

std::string norm_expr(long first_col, long count) {
  // gnuplot expression for the max abs over `count` CSV columns
  std::string expr;
  for (long i = 0; i < count; ++i) {
    const std::string term = "abs($" + std::to_string(first_col + i) + ")";
    expr = (i == 0) ? term : "max2(" + expr + ", " + term + ")";
  }
  return expr;
}

struct FigureRun {
  std::string config_name;
  std::string stem;
  double sigma_override = 0.0;  // 0 = keep
};

int cmd_reproduce(int fig, const std::string& configs_dir, const std::string& out_root) {
  std::map<int, std::vector<FigureRun>> plan;
  plan[3] = {{"batch_reactor_standard_n31.json", "fig3_standard_n31"},
             {"batch_reactor_standard_n101.json", "fig3_standard_n101"},
             {"batch_reactor_deadbeat_n11.json", "fig3_deadbeat_n11"},
             {"batch_reactor_deadbeat_n101.json", "fig3_deadbeat_n101"}};
  plan[4] = {{"batch_reactor_standard_n31.json", "fig4_standard_n31_sigma0193", 0.0193},
             {"batch_reactor_standard_n31.json", "fig4_standard_n31_sigma0343", 0.0343},
             {"batch_reactor_deadbeat_n11.json", "fig4_deadbeat_n11_sigma0193", 0.0193},
             {"batch_reactor_deadbeat_n11.json", "fig4_deadbeat_n11_sigma0343", 0.0343}};
  plan[6] = {{"batch_reactor_standard_n101_dos.json", "fig6_standard_n101_dos"},
             {"batch_reactor_deadbeat_n101_dos.json", "fig6_deadbeat_n101_dos"}};

  std::vector<int> figures;
  if (fig == 0) {
    figures = {3, 4, 5, 6};
  } else {
    figures = {fig};
  }

  for (int f : figures) {
    const fs::path out_dir = fs::path(out_root) / ("fig" + std::to_string(f));
    if (f == 5) {
      // trade-off sweep: admissible attack duty against sigma and tau_max
      stqc::Config cfg =
          stqc::load_config((fs::path(configs_dir) / "batch_reactor_standard_n101.json").string());
      const stqc::Scenario base = stqc::build_scenario(cfg);
      const stqc::SigmaInterval win =
          stqc::sigma_interval(base.trigger.levels, base.trigger.alpha);
      std::vector<double> sigmas;
      for (int i = 0; i < 12; ++i) {
        sigmas.push_back(win.lo + (win.hi - win.lo) * (0.02 + 0.96 * i / 11.0));
      }
      const std::vector<long> taus = {5, 10, 20, 40};
      const auto rows =
          stqc::sweep_tradeoff(base, sigmas, {base.trigger.levels}, taus);
      std::ostringstream os;
      stqc::write_sweep_csv(os, rows);
      write_file(out_dir / "fig5_sweep.csv", os.str());
      std::string gp =
          "set datafile separator \",\"\nset key top right\n"
          "set xlabel \"sigma\"\nset ylabel \"admissible attack duty 1/nu_d\"\n";
      gp += "plot ";
      for (std::size_t i = 0; i < taus.size(); ++i) {
        if (i) gp += ", \\\n     ";
        gp += "\"fig5_sweep.csv\" using 1:($3 == " + std::to_string(taus[i]) +
              " && $4 == 1 ? $6 : 1/0) with linespoints title \"tau_max = " +
              std::to_string(taus[i]) + "\"";
      }
      gp += "\npause -1\n";
      write_file(out_dir / "fig5.gp", gp);
      std::cout << "fig5: wrote " << (out_dir / "fig5_sweep.csv").string() << "\n";
      continue;
    }

    std::string gp = "set datafile separator \",\"\nmax2(a, b) = (a > b) ? a : b\n";
    gp += "set xlabel \"step s\"\nset key top right\n";
    std::vector<std::string> plots;
    for (const FigureRun& fr : plan[f]) {
      stqc::Config cfg = stqc::load_config((fs::path(configs_dir) / fr.config_name).string());
      if (fr.sigma_override > 0.0) cfg.sigma = fr.sigma_override;
      const RunOutputs run = execute(cfg);
      write_run_outputs(cfg, run, out_dir, fr.stem);
      const long nx = run.scenario.model.nx();
      plots.push_back("\"" + fr.stem + ".csv\" using 1:(" + norm_expr(3, nx) +
                      ") with lines title \"" + fr.stem + " ||x||\"");
      std::cout << "fig" << f << ": wrote " << (out_dir / (fr.stem + ".csv")).string()
                << " (samples = " << run.trace.sample_count
                << ", attacks = " << run.trace.effective_attacks << ")\n";
    }
    gp += "plot ";
    for (std::size_t i = 0; i < plots.size(); ++i) {
      if (i) gp += ", \\\n     ";
      gp += plots[i];
    }
    gp += "\npause -1\n";
    write_file(out_dir / ("fig" + std::to_string(f) + ".gp"), gp);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-triggered quantized-output stabilization toolkit"};
  app.require_subcommand(1);

  std::string config_path, grid_path, out_dir, configs_dir = "configs";
  int fig = 0;

  auto* simulate = app.add_subcommand("simulate", "run one closed-loop scenario");
  simulate->add_option("--config", config_path, "scenario config file")->required();
  simulate->add_option("--out", out_dir, "output directory");

  auto* sweep = app.add_subcommand("sweep", "run a (sigma, N, tau_max) grid");
  sweep->add_option("--config", config_path, "base scenario config file")->required();
  sweep->add_option("--grid", grid_path, "grid file")->required();
  sweep->add_option("--out", out_dir, "output directory");

  auto* verify = app.add_subcommand("verify-gains", "check gain certificates");
  verify->add_option("--config", config_path, "scenario config file")->required();

  auto* bounds = app.add_subcommand("bounds", "print derived bound constants");
  bounds->add_option("--config", config_path, "scenario config file")->required();

  auto* repro = app.add_subcommand("reproduce-paper",
                                   "rerun the shipped batch-reactor study");
  repro->add_option("--fig", fig, "figure number (3, 4, 5 or 6; default all)")
      ->check(CLI::IsMember({3, 4, 5, 6}));
  repro->add_option("--configs", configs_dir, "shipped config directory");
  repro->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, out_dir);
    if (sweep->parsed()) return cmd_sweep(config_path, grid_path, out_dir);
    if (verify->parsed()) return cmd_verify_gains(config_path);
    if (bounds->parsed()) return cmd_bounds(config_path);
    if (repro->parsed()) {
      return cmd_reproduce(fig, configs_dir, out_dir.empty() ? "out" : out_dir);
    }
  } catch (const stqc::InvariantBreachError& e) {
    std::cerr << "invariant breach: " << e.what() << "\n";
    return kExitBreach;
  } catch (const stqc::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitBreach;
  }
  return kExitUsage;
}
