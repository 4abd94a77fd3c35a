#include "stqc/sim.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <sstream>
#include <thread>

#include "stqc/errors.hpp"
#include "stqc/quantizer.hpp"

namespace stqc {

namespace {

bool budget_allows(double attacked_so_far, long s, const DosModel& dos) {
  return attacked_so_far + 1.0 <= dos.kappa_d + static_cast<double>(s + 1) / dos.nu_d;
}

void breach(const std::string& what, long s) {
  throw FrameBreachError(what + " (step " + std::to_string(s) + ")");
}

// Per-step checks of the certified inequalities; active only on windows
// whose sample survived the channel.
struct InvariantChecker {
  const Scenario& sc;
  Matrix closed_loop;  // A - L C, or At^eta (I - M C)

  explicit InvariantChecker(const Scenario& scenario) : sc(scenario) {
    if (sc.variant == Variant::standard) {
      closed_loop = sc.model.A - *sc.gains.L * sc.model.C;
    } else {
      closed_loop = sc.arts->abar_cl;
    }
  }

  void output_error_bound(const Vector& q_held, const Vector& y, double e_active,
                          long s) const {
    const double err = inf_norm(q_held - y);
    const double bound = sc.trigger.sigma * e_active;
    if (err > bound * (1.0 + 1e-9) + 1e-30) {
      breach("output error " + format_double(err) + " exceeds sigma E = " +
                 format_double(bound),
             s);
    }
  }

  // Weighted-norm estimation error against its contraction certificate;
  // `steps` counts contraction applications since the active sample.
  void estimate_error_bound(const Vector& err_vec, double ex_at_sample, long steps,
                            long s) const {
    const double wn = weighted_norm(closed_loop, sc.cert, err_vec);
    const double bound =
        e_contraction_factor(sc.cert.gamma, sc.trigger.alpha * sc.trigger.sigma,
                             steps) *
        ex_at_sample;
    if (wn > bound * (1.0 + 1e-9) + 1e-30) {
      breach("estimation error " + format_double(wn) + " exceeds its certificate " +
                 format_double(bound),
             s);
    }
  }
};

SimTrace run_standard(const Scenario& sc) {
  const SystemModel& m = sc.model;
  const QuantizerSpec qspec = make_quantizer_spec(sc.trigger.levels, m.ny());
  const StandardTriggerTables tables =
      StandardTriggerTables::build(m, sc.gains, sc.trigger.levels, sc.trigger.tau_max);
  const InvariantChecker checker(sc);

  std::vector<std::uint8_t> h_pre;
  const bool inline_worst = sc.dos.mode == DosMode::worst_case_at_samples;
  if (!inline_worst) {
    h_pre = generate_attack(sc.dos, sc.horizon);
  }

  SimTrace trace;
  trace.variant = Variant::standard;
  trace.E_in = sc.trigger.E_in;
  trace.horizon = sc.horizon;
  trace.rows.reserve(static_cast<std::size_t>(sc.horizon));

  Vector x = sc.x0;
  Vector xh_ctrl = Vector::Zero(m.nx());
  Vector xh_enc = Vector::Zero(m.nx());
  EncoderRange pending = initial_range(sc.trigger, sc.cert, m.norm_C);
  EncoderRange range = pending;
  Vector q_held = Vector::Zero(m.ny());
  std::uint64_t q_idx = 0;
  long s_next = 0;
  long s_last = 0;
  bool attacked_hold = false;
  double attacked_count = 0.0;

  for (long s = 0; s < sc.horizon; ++s) {
    const Vector y = m.C * x;
    const bool sampled = (s == s_next);
    std::uint8_t hs = 0;
    if (inline_worst) {
      if (sampled && budget_allows(attacked_count, s, sc.dos)) {
        hs = 1;
        attacked_count += 1.0;
      }
    } else {
      hs = h_pre[static_cast<std::size_t>(s)];
    }

    if (sampled) {
      range = pending;
      const Vector center = m.C * xh_enc;
      std::uint64_t idx = 0;
      try {
        idx = encode(qspec, QuantizationFrame{center, range.E}, y);
      } catch (const OutOfRangeError& e) {
        breach(std::string("encode precondition failed: ") + e.what(), s);
      }
      attacked_hold = (hs == 1);
      if (!attacked_hold) {
        q_held = decode(qspec, QuantizationFrame{center, range.E}, idx);
        q_idx = idx;
      } else {
        ++trace.effective_attacks;
      }
      const long gap = resilient_next_sample(
          [&] { return next_sample_gap(tables, sc.trigger, q_held, range.E, xh_ctrl); },
          attacked_hold);
      s_next = s + gap;
      s_last = s;
      ++trace.sample_count;
      trace.sample_times.push_back(s);
      pending = resilient_e_update(sc.trigger, sc.cert, sc.growth, range, gap,
                                   attacked_hold, m.norm_C);
    }

    const Vector u = sc.gains.K * xh_ctrl;
    trace.rows.push_back(TraceRow{s, 0, x, xh_ctrl, u, y, q_idx, q_held, range.E,
                                  range.Ex, sampled, hs,
                                  sampled && !attacked_hold});

    if (sc.check_invariants && !attacked_hold) {
      checker.output_error_bound(q_held, y, range.E, s);
      checker.estimate_error_bound(x - xh_ctrl, range.Ex, s - s_last, s);
    }

    xh_ctrl = observer_step(m, sc.gains, xh_ctrl, q_held, attacked_hold);
    xh_enc = observer_step(m, sc.gains, xh_enc, q_held, attacked_hold);
    if (xh_ctrl != xh_enc) {
      breach("encoder and controller observer replicas diverged", s);
    }
    x = m.A * x + m.B * u;
  }
  return trace;
}

SimTrace run_deadbeat(const Scenario& sc) {
  const SystemModel& m = sc.model;
  const QuantizerSpec qspec = make_quantizer_spec(sc.trigger.levels, m.ny());
  const DeadbeatTriggerTables tables = DeadbeatTriggerTables::build(
      m, sc.gains, *sc.arts, sc.trigger.levels, sc.trigger.tau_max);
  const InvariantChecker checker(sc);

  std::vector<std::uint8_t> h_pre;
  const bool inline_worst = sc.dos.mode == DosMode::worst_case_at_samples;
  if (!inline_worst) {
    h_pre = generate_attack(sc.dos, sc.horizon);
  }

  SimTrace trace;
  trace.variant = Variant::deadbeat;
  trace.E_in = sc.trigger.E_in;
  trace.horizon = sc.horizon;
  trace.rows.reserve(static_cast<std::size_t>(sc.horizon * m.eta));

  const Vector zero_center = Vector::Zero(m.ny());
  Vector x = sc.x0;
  Vector xh = Vector::Zero(m.nx());
  Vector prev_end = Vector::Zero(m.nx());
  EncoderRange pending = initial_range(sc.trigger, sc.cert, m.norm_C);
  EncoderRange range = pending;
  Vector q_held = Vector::Zero(m.ny());
  std::uint64_t q_idx = 0;
  long s_next = 0;
  long s_last = 0;
  bool attacked_hold = false;
  double attacked_count = 0.0;

  for (long s = 0; s < sc.horizon; ++s) {
    const Vector y0 = m.C * x;  // output at the step boundary
    const bool sampled = (s == s_next);
    std::uint8_t hs = 0;
    if (inline_worst) {
      if (sampled && budget_allows(attacked_count, s, sc.dos)) {
        hs = 1;
        attacked_count += 1.0;
      }
    } else {
      hs = h_pre[static_cast<std::size_t>(s)];
    }

    if (sampled) {
      range = pending;
      std::uint64_t idx = 0;
      try {
        idx = encode(qspec, QuantizationFrame{zero_center, range.E}, y0);
      } catch (const OutOfRangeError& e) {
        breach(std::string("encode precondition failed: ") + e.what(), s);
      }
      attacked_hold = (hs == 1);
      if (!attacked_hold) {
        q_held = decode(qspec, QuantizationFrame{zero_center, range.E}, idx);
        q_idx = idx;
      } else {
        ++trace.effective_attacks;
      }
      const long gap = resilient_next_sample(
          [&] { return db_next_sample_gap(tables, sc.trigger, q_held, range.E); },
          attacked_hold);
      s_next = s + gap;
      s_last = s;
      ++trace.sample_count;
      trace.sample_times.push_back(s);
      pending = resilient_e_update(sc.trigger, sc.cert, sc.growth, range, gap,
                                   attacked_hold, m.norm_C);
    }

    // Boundary correction with the held quantized output; dropped while
    // the latest sample is lost. prev_end starts at zero, so the first
    // correction reads x̂_0 = M Q(y_0).
    xh = db_step(m, sc.gains, prev_end, q_held, DbPhase::boundary, attacked_hold);

    if (sc.check_invariants && !attacked_hold) {
      checker.output_error_bound(q_held, y0, range.E, s);
    }

    for (long k = 0; k < m.eta; ++k) {
      const Vector u = sc.gains.K * xh;
      trace.rows.push_back(TraceRow{s, k, x, xh, u, m.C * x, q_idx, q_held, range.E,
                                    range.Ex, sampled && k == 0, hs,
                                    sampled && k == 0 && !attacked_hold});
      x = m.At * x + m.Bt * u;
      xh = db_step(m, sc.gains, xh, q_held, DbPhase::substep);
    }
    prev_end = xh;
    if (sc.check_invariants) {
      const double tail = inf_norm(prev_end);
      if (tail > 1e-6 * (1.0 + inf_norm(x))) {
        breach("deadbeat estimate did not collapse to zero at the step end", s);
      }
      if (!attacked_hold) {
        // x now sits at the end of step s; one contraction per elapsed
        // step plus the current one.
        checker.estimate_error_bound(x - prev_end, range.Ex, s - s_last + 1, s);
      }
    }
  }
  return trace;
}

}  // namespace

std::string to_string(Variant v) {
  return v == Variant::standard ? "standard" : "deadbeat";
}

Scenario make_scenario(SystemModel model, GainSet gains, Variant variant, double sigma,
                       long tau_max, long levels, double e_in, Vector x0, long horizon,
                       DosModel dos, bool check_invariants, double fit_margin) {
  if (horizon < 1) throw ValidationError("scenario: horizon must be at least 1");
  if (x0.size() != model.nx()) throw DimensionError("scenario: x0 size mismatch");
  if (!x0.allFinite()) throw ValidationError("scenario: x0 has non-finite entries");
  if (inf_norm(x0) > e_in) {
    throw ValidationError("scenario: ||x0||_inf exceeds the initial bound E_in");
  }
  (void)make_quantizer_spec(levels, model.ny());
  if (dos.mode != DosMode::none) {
    if (!(dos.kappa_d >= 0.0)) throw ValidationError("scenario: kappa_d must be >= 0");
    if (!(dos.nu_d >= 1.0)) throw ValidationError("scenario: nu_d must be >= 1");
  }

  Scenario sc;
  sc.variant = variant;
  sc.dos = std::move(dos);
  sc.x0 = std::move(x0);
  sc.horizon = horizon;
  sc.check_invariants = check_invariants;
  sc.fit_margin = fit_margin;

  double alpha = 0.0;
  if (variant == Variant::standard) {
    if (!gains.L) throw ValidationError("scenario: standard variant requires L");
    sc.cert = fit_decay(model.A - *gains.L * model.C, fit_margin);
    alpha = sc.cert.Gamma * inf_norm(*gains.L) * model.norm_C / (1.0 - sc.cert.gamma);
  } else {
    if (!gains.M) throw ValidationError("scenario: deadbeat variant requires M");
    sc.arts = make_deadbeat_artifacts(model, gains, fit_margin);
    sc.cert = sc.arts->cert_bar;
    alpha = sc.arts->alpha_bar;
  }
  sc.trigger = make_trigger_config(sigma, tau_max, levels, e_in, alpha, sc.cert.gamma);
  sc.growth = fit_growth(model.A, sc.cert.Gamma);
  sc.model = std::move(model);
  sc.gains = std::move(gains);
  return sc;
}

SimTrace run_closed_loop(const Scenario& sc) {
  return sc.variant == Variant::standard ? run_standard(sc) : run_deadbeat(sc);
}

DecayFit estimate_decay(const SimTrace& trace) {
  std::vector<double> norms;
  norms.reserve(static_cast<std::size_t>(trace.horizon));
  for (const TraceRow& r : trace.rows) {
    if (r.k == 0) norms.push_back(inf_norm(r.x));
  }
  long nonzero = 0;
  for (double v : norms) {
    if (v > 0.0) ++nonzero;
  }
  if (nonzero == 0) {
    throw DegenerateTraceError("estimate_decay: the state is identically zero");
  }
  if (nonzero < 20) {
    throw DegenerateTraceError("estimate_decay: fewer than 20 steps with nonzero state");
  }

  // non-increasing envelope
  std::vector<double> env(norms.size());
  double running = 0.0;
  for (std::size_t i = norms.size(); i-- > 0;) {
    running = std::max(running, norms[i]);
    env[i] = running;
  }

  const auto total = static_cast<long>(env.size());
  long begin = total / 10;  // 10% burn-in
  long end = total;
  while (end > begin && env[static_cast<std::size_t>(end - 1)] == 0.0) --end;
  if (end - begin < 2) {
    throw DegenerateTraceError("estimate_decay: fitted window has fewer than 2 points");
  }

  double sum_s = 0.0, sum_l = 0.0, sum_ss = 0.0, sum_sl = 0.0;
  const double count = static_cast<double>(end - begin);
  for (long s = begin; s < end; ++s) {
    const double l = std::log(env[static_cast<std::size_t>(s)]);
    sum_s += static_cast<double>(s);
    sum_l += l;
    sum_ss += static_cast<double>(s) * static_cast<double>(s);
    sum_sl += static_cast<double>(s) * l;
  }
  const double denom = count * sum_ss - sum_s * sum_s;
  const double slope = (denom == 0.0) ? 0.0 : (count * sum_sl - sum_s * sum_l) / denom;

  DecayFit fit;
  fit.omega_hat = std::exp(slope);
  const double e_in = trace.E_in > 0.0 ? trace.E_in : 1.0;
  double omega_max = 0.0;
  for (long s = begin; s < end; ++s) {
    const double model = e_in * std::pow(fit.omega_hat, static_cast<double>(s));
    omega_max = std::max(omega_max, env[static_cast<std::size_t>(s)] / model);
  }
  fit.Omega_hat = omega_max;
  return fit;
}

std::vector<SweepRow> sweep_tradeoff(const Scenario& base,
                                     const std::vector<double>& sigma_grid,
                                     const std::vector<long>& n_grid,
                                     const std::vector<long>& tau_max_grid,
                                     int threads) {
  struct Point {
    double sigma;
    long levels;
    long tau_max;
  };
  std::vector<Point> points;
  for (double sg : sigma_grid) {
    for (long n : n_grid) {
      for (long tm : tau_max_grid) {
        points.push_back(Point{sg, n, tm});
      }
    }
  }
  std::vector<SweepRow> rows(points.size());

  if (threads <= 0) {
    if (const char* env = std::getenv("STC_LOOP_THREADS")) {
      threads = std::atoi(env);
    }
  }
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min<long>(threads, static_cast<long>(points.size() ? points.size() : 1));

  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= points.size()) return;
      const Point& pt = points[i];
      SweepRow row;
      row.sigma = pt.sigma;
      row.levels = pt.levels;
      row.tau_max = pt.tau_max;
      const double lo = 1.0 / static_cast<double>(pt.levels);
      const double hi = 1.0 / base.trigger.alpha;
      if (pt.sigma < lo) {
        row.note = "sigma below 1/N";
      } else if (pt.sigma >= hi) {
        row.note = "sigma not below 1/alpha";
      } else {
        row.feasible = true;
        Scenario sc = base;
        sc.dos = DosModel{};
        sc.check_invariants = false;
        sc.trigger = make_trigger_config(pt.sigma, pt.tau_max, pt.levels,
                                         base.trigger.E_in, base.trigger.alpha,
                                         base.cert.gamma);
        row.omega1 = sc.trigger.omega1;
        row.dos_bound_value = dos_bound(sc.trigger.omega1, sc.growth.omega_a);
        const SimTrace trace = run_closed_loop(sc);
        row.samples = trace.sample_count;
        row.omega_hat = estimate_decay(trace).omega_hat;
      }
      rows[i] = std::move(row);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return rows;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& os, const SimTrace& trace, const SystemModel& model) {
  os << "s,k";
  for (long i = 0; i < model.nx(); ++i) os << ",x" << i;
  for (long i = 0; i < model.nx(); ++i) os << ",xhat" << i;
  for (long i = 0; i < model.nu(); ++i) os << ",u" << i;
  for (long i = 0; i < model.ny(); ++i) os << ",y" << i;
  os << ",q_index";
  for (long i = 0; i < model.ny(); ++i) os << ",q" << i;
  os << ",E,Ex,sampled,h,ack\n";
  for (const TraceRow& r : trace.rows) {
    os << r.s << ',' << r.k;
    for (long i = 0; i < model.nx(); ++i) os << ',' << format_double(r.x[i]);
    for (long i = 0; i < model.nx(); ++i) os << ',' << format_double(r.xhat[i]);
    for (long i = 0; i < model.nu(); ++i) os << ',' << format_double(r.u[i]);
    for (long i = 0; i < model.ny(); ++i) os << ',' << format_double(r.y[i]);
    os << ',' << r.q_index;
    for (long i = 0; i < model.ny(); ++i) os << ',' << format_double(r.q[i]);
    os << ',' << format_double(r.E) << ',' << format_double(r.Ex) << ','
       << (r.sampled ? 1 : 0) << ',' << static_cast<int>(r.h) << ',' << (r.ack ? 1 : 0)
       << '\n';
  }
}

std::string trace_csv_string(const SimTrace& trace, const SystemModel& model) {
  std::ostringstream os;
  write_trace_csv(os, trace, model);
  return os.str();
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "sigma,N,tau_max,feasible,omega1,dos_bound,samples,omega_hat,note\n";
  for (const SweepRow& r : rows) {
    os << format_double(r.sigma) << ',' << r.levels << ',' << r.tau_max << ','
       << (r.feasible ? 1 : 0) << ',' << format_double(r.omega1) << ','
       << format_double(r.dos_bound_value) << ',' << r.samples << ','
       << format_double(r.omega_hat) << ',' << r.note << '\n';
  }
}

}  // namespace stqc
