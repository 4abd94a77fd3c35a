#include "stqc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "stqc/errors.hpp"
#include "stqc/quantizer.hpp"

namespace stqc {

namespace {

using json = nlohmann::ordered_json;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& path) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw SchemaError("config: unknown key \"" + path + item.key() + "\"");
    }
  }
}

const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError("config: missing key \"" + path + key + "\"");
  }
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError("config: \"" + path + "\" must be a number");
  return v.get<double>();
}

long as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) {
    throw SchemaError("config: \"" + path + "\" must be an integer");
  }
  return v.get<long>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw SchemaError("config: \"" + path + "\" must be a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw SchemaError("config: \"" + path + "\" must be a string");
  return v.get<std::string>();
}

Matrix as_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) {
    throw SchemaError("config: \"" + path + "\" must be a non-empty array of rows");
  }
  const auto rows = static_cast<long>(v.size());
  if (!v[0].is_array() || v[0].empty()) {
    throw SchemaError("config: \"" + path + "\" rows must be non-empty arrays");
  }
  const auto cols = static_cast<long>(v[0].size());
  Matrix m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    const json& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<long>(row.size()) != cols) {
      throw DimensionError("config: \"" + path + "\" is not rectangular");
    }
    for (long c = 0; c < cols; ++c) {
      m(r, c) = as_number(row[static_cast<std::size_t>(c)],
                          path + "[" + std::to_string(r) + "]");
    }
  }
  if (!m.allFinite()) {
    throw SchemaError("config: \"" + path + "\" has non-finite entries");
  }
  return m;
}

Vector as_vector(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) {
    throw SchemaError("config: \"" + path + "\" must be a non-empty array");
  }
  Vector x(static_cast<long>(v.size()));
  for (long i = 0; i < x.size(); ++i) {
    x[i] = as_number(v[static_cast<std::size_t>(i)], path);
  }
  return x;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (long r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (long i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

DosMode parse_dos_mode(const std::string& text, const std::string& path) {
  if (text == "none") return DosMode::none;
  if (text == "random") return DosMode::random;
  if (text == "worst-case-at-samples") return DosMode::worst_case_at_samples;
  if (text == "scripted") return DosMode::scripted;
  throw SchemaError("config: \"" + path + "\" must be one of none, random, "
                    "worst-case-at-samples, scripted");
}

std::string dos_mode_name(DosMode mode) {
  switch (mode) {
    case DosMode::none: return "none";
    case DosMode::random: return "random";
    case DosMode::worst_case_at_samples: return "worst-case-at-samples";
    case DosMode::scripted: return "scripted";
  }
  return "none";
}

}  // namespace

Config parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("config: top level must be an object");
  check_keys(doc, {"plant", "gains", "trigger", "dos", "run", "derived"}, "");
  if (doc.contains("derived") && !doc["derived"].is_object()) {
    throw SchemaError("config: \"derived\" must be an object");
  }

  Config cfg;

  // plant
  {
    const json& plant = require(doc, "plant", "");
    check_keys(plant, {"continuous", "discrete", "discrete_substep", "C", "Delta", "eta"},
               "plant.");
    int sources = 0;
    if (plant.contains("continuous")) {
      const json& blk = plant["continuous"];
      check_keys(blk, {"A", "B"}, "plant.continuous.");
      cfg.a_cont = as_matrix(require(blk, "A", "plant.continuous."), "plant.continuous.A");
      cfg.b_cont = as_matrix(require(blk, "B", "plant.continuous."), "plant.continuous.B");
      ++sources;
    }
    if (plant.contains("discrete")) {
      const json& blk = plant["discrete"];
      check_keys(blk, {"A", "B"}, "plant.discrete.");
      cfg.a_disc = as_matrix(require(blk, "A", "plant.discrete."), "plant.discrete.A");
      cfg.b_disc = as_matrix(require(blk, "B", "plant.discrete."), "plant.discrete.B");
      ++sources;
    }
    if (plant.contains("discrete_substep")) {
      const json& blk = plant["discrete_substep"];
      check_keys(blk, {"At", "Bt"}, "plant.discrete_substep.");
      cfg.at_disc = as_matrix(require(blk, "At", "plant.discrete_substep."),
                              "plant.discrete_substep.At");
      cfg.bt_disc = as_matrix(require(blk, "Bt", "plant.discrete_substep."),
                              "plant.discrete_substep.Bt");
      ++sources;
    }
    if (sources != 1) {
      throw SchemaError(
          "config: \"plant\" needs exactly one of continuous, discrete, "
          "discrete_substep");
    }
    cfg.c = as_matrix(require(plant, "C", "plant."), "plant.C");
    cfg.Delta = as_number(require(plant, "Delta", "plant."), "plant.Delta");
    if (plant.contains("eta")) {
      const json& eta = plant["eta"];
      if (eta.is_string()) {
        if (eta.get<std::string>() != "auto") {
          throw SchemaError("config: \"plant.eta\" must be an integer or \"auto\"");
        }
        cfg.eta = 0;
      } else {
        cfg.eta = as_integer(eta, "plant.eta");
        if (cfg.eta < 1) throw SchemaError("config: \"plant.eta\" must be >= 1");
      }
    } else {
      cfg.eta = cfg.a_cont ? 0 : 1;
    }
    if (cfg.at_disc && cfg.eta == 0) {
      throw SchemaError("config: sub-step plants need an explicit \"plant.eta\"");
    }
    if (cfg.a_disc && cfg.eta != 1) {
      throw SchemaError("config: coarse discrete plants fix eta = 1");
    }
  }

  // gains
  {
    const json& gains = require(doc, "gains", "");
    check_keys(gains, {"K", "deadbeat_order", "L", "M", "M_bar"}, "gains.");
    const json& k = require(gains, "K", "gains.");
    if (k.is_string()) {
      if (k.get<std::string>() != "synthesize-deadbeat") {
        throw SchemaError("config: \"gains.K\" must be a matrix or \"synthesize-deadbeat\"");
      }
      cfg.synthesize_deadbeat_k = true;
    } else {
      cfg.k_gain = as_matrix(k, "gains.K");
    }
    if (gains.contains("deadbeat_order")) {
      cfg.deadbeat_order = as_integer(gains["deadbeat_order"], "gains.deadbeat_order");
      if (cfg.deadbeat_order < 1) {
        throw SchemaError("config: \"gains.deadbeat_order\" must be >= 1");
      }
    }
    if (gains.contains("L")) cfg.l_gain = as_matrix(gains["L"], "gains.L");
    if (gains.contains("M")) cfg.m_gain = as_matrix(gains["M"], "gains.M");
    if (gains.contains("M_bar")) cfg.mbar_gain = as_matrix(gains["M_bar"], "gains.M_bar");
    if (cfg.m_gain && cfg.mbar_gain) {
      throw SchemaError("config: give \"gains.M\" or \"gains.M_bar\", not both");
    }
  }

  // trigger
  {
    const json& trig = require(doc, "trigger", "");
    check_keys(trig, {"sigma", "tau_max", "N", "E_in"}, "trigger.");
    cfg.sigma = as_number(require(trig, "sigma", "trigger."), "trigger.sigma");
    cfg.tau_max = as_integer(require(trig, "tau_max", "trigger."), "trigger.tau_max");
    cfg.levels = as_integer(require(trig, "N", "trigger."), "trigger.N");
    cfg.e_in = as_number(require(trig, "E_in", "trigger."), "trigger.E_in");
  }

  // dos (optional)
  if (doc.contains("dos")) {
    const json& dos = doc["dos"];
    check_keys(dos, {"mode", "kappa_d", "nu_d", "seed", "schedule"}, "dos.");
    if (dos.contains("mode")) {
      cfg.dos_mode = parse_dos_mode(as_string(dos["mode"], "dos.mode"), "dos.mode");
    }
    if (dos.contains("kappa_d")) cfg.kappa_d = as_number(dos["kappa_d"], "dos.kappa_d");
    if (dos.contains("nu_d")) cfg.nu_d = as_number(dos["nu_d"], "dos.nu_d");
    if (dos.contains("seed")) {
      cfg.dos_seed = static_cast<std::uint64_t>(as_integer(dos["seed"], "dos.seed"));
    }
    if (dos.contains("schedule")) {
      cfg.schedule_path = as_string(dos["schedule"], "dos.schedule");
    }
    if (cfg.dos_mode == DosMode::scripted && cfg.schedule_path.empty()) {
      throw SchemaError("config: scripted dos mode needs \"dos.schedule\"");
    }
  }

  // run
  {
    const json& run = require(doc, "run", "");
    check_keys(run,
               {"variant", "x0", "horizon", "out_dir", "check_invariants",
                "fit_decay_margin"},
               "run.");
    const std::string variant = as_string(require(run, "variant", "run."), "run.variant");
    if (variant == "standard") {
      cfg.variant = Variant::standard;
    } else if (variant == "deadbeat") {
      cfg.variant = Variant::deadbeat;
    } else {
      throw SchemaError("config: \"run.variant\" must be standard or deadbeat");
    }
    cfg.x0 = as_vector(require(run, "x0", "run."), "run.x0");
    cfg.horizon = as_integer(require(run, "horizon", "run."), "run.horizon");
    if (run.contains("out_dir")) cfg.out_dir = as_string(run["out_dir"], "run.out_dir");
    if (run.contains("check_invariants")) {
      cfg.check_invariants = as_bool(run["check_invariants"], "run.check_invariants");
    }
    if (run.contains("fit_decay_margin")) {
      cfg.fit_decay_margin = as_number(run["fit_decay_margin"], "run.fit_decay_margin");
    }
  }

  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

Scenario build_scenario(const Config& cfg) {
  SystemModel model = [&] {
    if (cfg.a_cont) {
      const long eta = cfg.eta > 0
                           ? cfg.eta
                           : resolve_substep_count(*cfg.a_cont, *cfg.b_cont, cfg.Delta);
      return make_model_continuous(*cfg.a_cont, *cfg.b_cont, cfg.c, cfg.Delta, eta);
    }
    if (cfg.at_disc) {
      return make_model_discrete(*cfg.at_disc, *cfg.bt_disc, cfg.c, cfg.Delta, cfg.eta);
    }
    return make_model_discrete_coarse(*cfg.a_disc, *cfg.b_disc, cfg.c, cfg.Delta);
  }();

  Matrix k;
  if (cfg.synthesize_deadbeat_k) {
    const long order = cfg.deadbeat_order > 0 ? cfg.deadbeat_order : model.eta;
    k = design_deadbeat_gain(model.At, model.Bt, order);
  } else {
    k = *cfg.k_gain;
  }

  GainSet gains;
  if (cfg.variant == Variant::standard) {
    if (!cfg.l_gain) throw ValidationError("config: standard variant needs gains.L");
    gains = make_standard_gains(model, k, *cfg.l_gain);
  } else {
    Matrix m;
    if (cfg.m_gain) {
      m = *cfg.m_gain;
    } else if (cfg.mbar_gain) {
      m = observer_gain_from_mbar(model.At, model.eta, *cfg.mbar_gain);
    } else {
      throw ValidationError("config: deadbeat variant needs gains.M or gains.M_bar");
    }
    gains = make_deadbeat_gains(model, k, m);
  }

  DosModel dos;
  dos.mode = cfg.dos_mode;
  dos.kappa_d = cfg.kappa_d;
  dos.nu_d = cfg.nu_d;
  dos.seed = cfg.dos_seed;
  if (cfg.dos_mode == DosMode::scripted) {
    std::ifstream in(cfg.schedule_path);
    if (!in) {
      throw ValidationError("config: cannot open schedule \"" + cfg.schedule_path + "\"");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    dos.schedule = parse_schedule(buf.str());
  }

  return make_scenario(std::move(model), std::move(gains), cfg.variant, cfg.sigma,
                       cfg.tau_max, cfg.levels, cfg.e_in, cfg.x0, cfg.horizon,
                       std::move(dos), cfg.check_invariants, cfg.fit_decay_margin);
}

std::string resolved_config_json(const Config& cfg, const Scenario& sc) {
  json doc;

  json plant;
  if (cfg.a_cont) {
    plant["continuous"] = {{"A", matrix_to_json(*cfg.a_cont)},
                           {"B", matrix_to_json(*cfg.b_cont)}};
  } else if (cfg.at_disc) {
    plant["discrete_substep"] = {{"At", matrix_to_json(*cfg.at_disc)},
                                 {"Bt", matrix_to_json(*cfg.bt_disc)}};
  } else {
    plant["discrete"] = {{"A", matrix_to_json(*cfg.a_disc)},
                         {"B", matrix_to_json(*cfg.b_disc)}};
  }
  plant["C"] = matrix_to_json(cfg.c);
  plant["Delta"] = cfg.Delta;
  plant["eta"] = sc.model.eta;
  doc["plant"] = std::move(plant);

  json gains;
  gains["K"] = matrix_to_json(sc.gains.K);
  if (sc.gains.L) gains["L"] = matrix_to_json(*sc.gains.L);
  if (sc.gains.M) gains["M"] = matrix_to_json(*sc.gains.M);
  doc["gains"] = std::move(gains);

  doc["trigger"] = {{"sigma", sc.trigger.sigma},
                    {"tau_max", sc.trigger.tau_max},
                    {"N", sc.trigger.levels},
                    {"E_in", sc.trigger.E_in}};

  json dos;
  dos["mode"] = dos_mode_name(sc.dos.mode);
  dos["kappa_d"] = sc.dos.kappa_d;
  dos["nu_d"] = sc.dos.nu_d;
  dos["seed"] = sc.dos.seed;
  if (!cfg.schedule_path.empty()) dos["schedule"] = cfg.schedule_path;
  doc["dos"] = std::move(dos);

  doc["run"] = {{"variant", to_string(sc.variant)},
                {"x0", vector_to_json(sc.x0)},
                {"horizon", sc.horizon},
                {"out_dir", cfg.out_dir},
                {"check_invariants", sc.check_invariants},
                {"fit_decay_margin", sc.fit_margin}};

  json derived;
  derived["delta"] = sc.model.delta;
  derived["norm_C"] = sc.model.norm_C;
  derived["gamma"] = sc.cert.gamma;
  derived["Gamma"] = sc.cert.Gamma;
  derived["alpha"] = sc.trigger.alpha;
  derived["omega1"] = sc.trigger.omega1;
  derived["omega_a"] = sc.growth.omega_a;
  derived["sigma_floor"] = 1.0 / static_cast<double>(sc.trigger.levels);
  derived["sigma_ceiling"] = 1.0 / sc.trigger.alpha;
  derived["sigma_below_floor"] = sc.trigger.sigma_below_floor;
  derived["dos_bound"] = dos_bound(sc.trigger.omega1, sc.growth.omega_a);
  if (sc.arts) {
    derived["deadbeat_residual"] =
        verify_deadbeat_gain(sc.model.At, sc.model.Bt, sc.gains.K, sc.model.eta);
    derived["phi_a"] = matrix_to_json(sc.arts->phi_a);
    derived["abar_cl"] = matrix_to_json(sc.arts->abar_cl);
  }
  doc["derived"] = std::move(derived);

  return doc.dump(2) + "\n";
}

std::string summary_json(const Scenario& sc, const SimTrace& trace,
                         const DecayFit* fit) {
  json doc;
  doc["variant"] = to_string(sc.variant);
  doc["horizon"] = sc.horizon;
  doc["sample_count"] = trace.sample_count;
  doc["effective_attacks"] = trace.effective_attacks;
  if (fit != nullptr) {
    doc["Omega_hat"] = fit->Omega_hat;
    doc["omega_hat"] = fit->omega_hat;
  }
  double final_norm = 0.0;
  double initial_norm = inf_norm(sc.x0);
  if (!trace.rows.empty()) final_norm = inf_norm(trace.rows.back().x);
  doc["initial_state_norm"] = initial_norm;
  doc["final_state_norm"] = final_norm;
  doc["sigma"] = sc.trigger.sigma;
  doc["N"] = sc.trigger.levels;
  doc["tau_max"] = sc.trigger.tau_max;
  doc["E_in"] = sc.trigger.E_in;
  doc["gamma"] = sc.cert.gamma;
  doc["Gamma"] = sc.cert.Gamma;
  doc["alpha"] = sc.trigger.alpha;
  doc["omega1"] = sc.trigger.omega1;
  doc["omega_a"] = sc.growth.omega_a;
  doc["dos_bound"] = dos_bound(sc.trigger.omega1, sc.growth.omega_a);
  doc["sigma_below_floor"] = sc.trigger.sigma_below_floor;
  return doc.dump(2) + "\n";
}

}  // namespace stqc
