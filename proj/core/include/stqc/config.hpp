#pragma once

#include <optional>
#include <string>

#include "stqc/sim.hpp"

namespace stqc {

/// Parsed run description. One concrete JSON layout, schema-validated:
/// unknown keys are errors, every dimension cross-checked before any
/// computation. See the annotated example shipped with the tool.
struct Config {
  // plant
  std::optional<Matrix> a_cont, b_cont;  // continuous-time pair
  std::optional<Matrix> a_disc, b_disc;  // coarse discrete pair
  std::optional<Matrix> at_disc, bt_disc;  // sub-step discrete pair
  Matrix c;
  double Delta = 0.0;
  long eta = 0;  // 0 = "auto": resolved by the eta-scan (continuous plants)

  // gains
  std::optional<Matrix> k_gain;  // absent = synthesize-deadbeat
  bool synthesize_deadbeat_k = false;
  long deadbeat_order = 0;  // 0 = controllability index
  std::optional<Matrix> l_gain;
  std::optional<Matrix> m_gain;
  std::optional<Matrix> mbar_gain;

  // trigger
  double sigma = 0.0;
  long tau_max = 1;
  long levels = 2;
  double e_in = 0.0;

  // dos
  DosMode dos_mode = DosMode::none;
  double kappa_d = 0.0;
  double nu_d = 1.0;
  std::uint64_t dos_seed = 0;
  std::string schedule_path;

  // run
  Variant variant = Variant::standard;
  Vector x0;
  long horizon = 1;
  std::string out_dir;
  bool check_invariants = false;
  double fit_decay_margin = 0.5;
};

/// Parse and validate a config document. Throws SchemaError (with the
/// offending key path) or DimensionError.
Config parse_config(const std::string& text);

/// Read and parse a config file.
Config load_config(const std::string& path);

/// Resolve the plant, gains and every derived constant into a runnable
/// scenario. Deadbeat gain synthesis happens here when requested.
Scenario build_scenario(const Config& cfg);

/// The fully resolved config (defaults expanded, synthesized gains and
/// derived constants included under "derived") as a JSON document that
/// parse_config accepts again; re-running from it reproduces outputs.
std::string resolved_config_json(const Config& cfg, const Scenario& sc);

/// Run summary as a JSON document: fit, sample count, attack count and
/// the certificate constants.
std::string summary_json(const Scenario& sc, const SimTrace& trace,
                         const DecayFit* fit);

}  // namespace stqc
