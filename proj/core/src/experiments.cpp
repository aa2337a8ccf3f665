#include "hwq/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>

#include "hwq/bounding.hpp"
#include "hwq/errors.hpp"
#include "hwq/gaussian_limit.hpp"
#include "hwq/normal.hpp"
#include "hwq/parallel.hpp"
#include "hwq/queue_sim.hpp"
#include "hwq/reference_limits.hpp"
#include "hwq/renewal.hpp"
#include "hwq/stats.hpp"

#ifndef HWQ_VERSION
#define HWQ_VERSION "0.0.0"
#endif

namespace hwq {

using nlohmann::json;

const char* version() { return HWQ_VERSION; }

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::pair<ExperimentKind, const char*> kKinds[] = {
    {ExperimentKind::kValidate, "validate"},
    {ExperimentKind::kSimulate, "simulate"},
    {ExperimentKind::kBound, "bound"},
    {ExperimentKind::kGaussian, "gaussian"},
    {ExperimentKind::kRenewal, "renewal"},
    {ExperimentKind::kScalingLargeB, "scaling_large_B"},
    {ExperimentKind::kScalingSmallB, "scaling_small_B"},
    {ExperimentKind::kIdleTail, "idle_tail"},
    {ExperimentKind::kCompare, "compare"},
};

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

double get_number(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

std::size_t get_count(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw ConfigError(where + "." + key + ": expected a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<double> get_numbers(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + ": expected an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(where + "." + key + ": expected numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt(std::size_t v) { return std::to_string(v); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

HwConfig hw_config(const ExperimentConfig& c, double B) {
  HwConfig h;
  h.n = c.model.n;
  h.B = B;
  h.spec_A = c.model.arrival;
  h.spec_S = c.model.service;
  h.lambda = c.model.lambda;
  h.allow_zero_service = c.model.allow_zero_service;
  h.horizon = c.simulation.horizon;
  h.warmup = c.simulation.warmup;
  h.replications = c.simulation.replications;
  h.seed = c.seed;
  h.threads = c.threads;
  return h;
}

std::vector<double> B_values(const ExperimentConfig& c, std::vector<double> fallback) {
  if (!c.B_grid.empty()) return c.B_grid;
  if (!fallback.empty()) return fallback;
  return {c.model.B};
}

std::vector<double> x_values(const ExperimentConfig& c, std::vector<double> fallback) {
  return c.x_grid.empty() ? fallback : c.x_grid;
}

bool is_exponential(const DistributionSpec& d) { return std::holds_alternative<Exponential>(d.family()); }

enum class ModelClass { kMM, kGIH2Star, kGID, kMGI, kOther };

ModelClass classify(const ModelConfig& m) {
  const auto& S = m.service.family();
  if (is_exponential(m.arrival) && is_exponential(m.service)) return ModelClass::kMM;
  if (std::holds_alternative<Exponential>(S) || std::holds_alternative<H2Star>(S)) return ModelClass::kGIH2Star;
  if (std::holds_alternative<Deterministic>(S)) return ModelClass::kGID;
  if (is_exponential(m.arrival)) return ModelClass::kMGI;
  return ModelClass::kOther;
}

const char* model_name(ModelClass k) {
  switch (k) {
    case ModelClass::kMM: return "M/M";
    case ModelClass::kGIH2Star: return "GI/H2*";
    case ModelClass::kGID: return "GI/D";
    case ModelClass::kMGI: return "M/GI";
    case ModelClass::kOther: return "GI/GI";
  }
  return "GI/GI";
}

double h2star_p(const DistributionSpec& s) {
  if (const auto* h = std::get_if<H2Star>(&s.family())) return h->p;
  return 1.0;
}

/// Closed-form limits of P(Q >= n + x sqrt n) and the small-B constant, where known.
struct ClosedForm {
  double tail = kNaN;
  double no_delay = kNaN;
  double small_B_rate = kNaN;
};

ClosedForm closed_form(const ExperimentConfig& c, ModelClass k, double B, double x, std::uint64_t stream) {
  ClosedForm out;
  const double cA2 = moments(c.model.arrival).scv;
  if (k == ModelClass::kMM || k == ModelClass::kGIH2Star) {
    const double p = h2star_p(c.model.service);
    const double cS2 = moments(c.model.service).scv;
    out.tail = h2star_limits(B, x, p, cA2, cS2).upper_tail;
    out.no_delay = 1.0 - h2star_limits(B, 0.0, p, cA2, cS2).upper_tail;
    out.small_B_rate = scaling_constants(H2StarModel{p, cA2, cS2}).small_B_rate;
  } else if (k == ModelClass::kGID) {
    const std::uint64_t s = c.seed ^ mix64(stream);
    out.tail = gid_limit_mc(B, cA2, x, c.gid.replications, c.gid.max_steps, s, c.threads).point;
    out.no_delay = 1.0 - gid_limit_mc(B, cA2, 0.0, c.gid.replications, c.gid.max_steps, s, c.threads).point;
    out.small_B_rate = scaling_constants(DeterministicModel{cA2}).small_B_rate;
  }
  return out;
}

CovarianceGrid z_grid(const ExperimentConfig& c, double B) {
  const double mean = c.model.service.mean();
  const double mu = 1.0 / mean;
  const double T = c.gaussian.T > 0.0 ? c.gaussian.T : truncation_cap(B, mu, 0.0, mean);
  const auto grid = uniform_grid(T, c.gaussian.step * mean);
  return build_Z_cov(c.model.arrival, c.model.service, grid);
}

std::vector<double> indicator_samples(const BoundEstimate& e) {
  const auto hits = static_cast<std::size_t>(std::llround(e.point * static_cast<double>(e.replications)));
  std::vector<double> v(e.replications, 0.0);
  std::fill_n(v.begin(), std::min(hits, v.size()), 1.0);
  return v;
}

void push_estimate(std::vector<std::string>& row, const BoundEstimate& e) {
  row.push_back(fmt(e.point));
  row.push_back(fmt(e.std_error));
  row.push_back(fmt(e.ci_low));
  row.push_back(fmt(e.ci_high));
}

// ---------------------------------------------------------------------------

RunResult run_validate(const ExperimentConfig& c) {
  RunResult r;
  r.table.columns = {"check", "value", "reference", "tolerance", "passed"};
  auto add = [&](const std::string& name, double value, double ref, double tol, bool ok) {
    r.table.rows.push_back({name, fmt(value), fmt(ref), fmt(tol), ok ? "true" : "false"});
    if (!ok) {
      r.exit_code = static_cast<int>(ExitCode::kInvariantViolation);
      r.messages.push_back("validate: check '" + name + "' failed");
    }
  };
  auto skip = [&](const std::string& name, const std::string& why) {
    r.table.rows.push_back({name, "", "", "", "skipped: " + why});
  };

  const HwConfig hw = hw_config(c, c.model.B);
  validate_config(hw);

  // Sample means of both laws.
  for (const auto& [label, law] : {std::pair<const char*, DistributionSpec>{"arrival_mean", c.model.arrival},
                                   std::pair<const char*, DistributionSpec>{"service_mean", c.model.service}}) {
    Rng rng = make_rng(c.seed, {0x5A5A, label[0] == 'a' ? 0u : 1u});
    RunningStats st;
    for (int i = 0; i < 100000; ++i) st.push(sample(law, rng));
    const double m = moments(law).mean;
    const double tol = 5.0 * std::sqrt(moments(law).variance / 1e5) + 1e-12;
    add(label, st.mean(), m, tol, std::abs(st.mean() - m) <= tol);
  }

  // Renewal solver (its internal band and Lipschitz checks throw on failure).
  {
    const double mean = c.model.service.mean();
    const RenewalConstants rc = renewal_constants(c.model.arrival, c.model.service);
    const RenewalSolution sol(c.model.service, 20.0 * mean);
    double worst = 0.0;
    for (int i = 0; i <= 4000; ++i) worst = std::max(worst, std::abs(sol.f(20.0 * mean * i / 4000.0)));
    add("renewal_f_bound", worst, rc.C2, 1e-9, worst <= rc.C2 + 1e-9);
  }

  // Lindley recursion against the busy-system event simulation.
  const bool bundles_ok = !c.model.arrival.has_atom_at_zero() && !c.model.service.has_atom_at_zero();
  const double bundle_T = std::min(c.simulation.horizon, 50.0 * c.model.service.mean());
  if (bundles_ok) {
    const auto mismatches = parallel_map(50, c.threads, [&](std::size_t rep) {
      const RenewalPathBundle b =
          make_bundle(hw.arrival_law(), c.model.service, c.model.n, bundle_T, c.seed, rep);
      std::size_t bad = 0;
      for (std::size_t eta : {std::size_t{0}, c.model.n / 2, c.model.n}) {
        const QueueTrace tr = busy_system_path(b, eta, bundle_T);
        if (tr.q.back() - static_cast<long>(eta) != phi(b, 0.0, bundle_T, eta)) ++bad;
      }
      return bad;
    });
    std::size_t bad = 0;
    for (auto m : mismatches) bad += m;
    add("lindley_equals_phi", static_cast<double>(bad), 0.0, 0.0, bad == 0);

    const std::size_t eta = c.model.n > 5 ? c.model.n - 5 : c.model.n;
    const auto reports = parallel_map(20, c.threads, [&](std::size_t rep) {
      HwConfig h = hw;
      h.horizon = bundle_T;
      return coupled_dominance_check(h, bundle_T / 2.0, eta, rep);
    });
    std::size_t violations = 0;
    for (const auto& rep : reports)
      violations += rep.violations + (rep.phase1_matches_phi ? 0 : 1) + (rep.breakdown_within_formula ? 0 : 1);
    add("pathwise_dominance", static_cast<double>(violations), 0.0, 0.0, violations == 0);
  } else {
    skip("lindley_equals_phi", "service law has an atom at zero");
    skip("pathwise_dominance", "service law has an atom at zero");
  }

  // Slepian comparison of the limit process.
  if (bundles_ok) {
    const RenewalConstants rc = renewal_constants(c.model.arrival, c.model.service);
    const auto s_grid = slepian_s_grid(rc);
    const auto offsets = slepian_offsets();
    const SlepianReport sr = verify_slepian_domination(c.model.arrival, c.model.service, s_grid, offsets);
    add("slepian_variance_gap", sr.max_variance_gap, 0.0, 1e-6, sr.max_variance_gap <= 1e-6);
    add("slepian_margin", sr.min_margin, 0.0, 1e-6, sr.min_margin >= -1e-6);
  } else {
    skip("slepian", "service law has an atom at zero");
  }

  // Erlang-C for exponential models.
  if (classify(c.model) == ModelClass::kMM) {
    const BoundEstimate sim = estimate_delay_prob(hw);
    const double mu = 1.0 / c.model.service.mean();
    const double ec = erlang_c(c.model.n, hw.arrival_rate(), mu);
    const double tol = std::max(0.01, 3.0 * sim.std_error);
    add("erlang_c", sim.point, ec, tol, std::abs(sim.point - ec) <= tol);
  } else {
    skip("erlang_c", "not an M/M model");
  }
  return r;
}

RunResult run_simulate(const ExperimentConfig& c) {
  RunResult r;
  r.table.columns = {"time", "q", "busy"};
  const HwConfig hw = hw_config(c, c.model.B);
  validate_config(hw);
  if (c.simulation.trace_replication >= hw.replications)
    throw ConfigError("simulation.trace_replication must be below simulation.replications");
  const auto xs = x_values(c, {});
  std::vector<double> idle_x;
  for (double x : xs)
    if (x > 0.0) idle_x.push_back(x);
  const QueueEstimates q = estimate_queue(hw, idle_x, xs);
  auto meta = [&](const std::string& metric, double x, const BoundEstimate& e) {
    r.table.metadata.push_back("estimate " + metric + (std::isnan(x) ? "" : " x=" + fmt(x)) + " point=" +
                               fmt(e.point) + " std_error=" + fmt(e.std_error) + " ci=[" + fmt(e.ci_low) + ", " +
                               fmt(e.ci_high) + "] replications=" + fmt(e.replications));
  };
  r.table.metadata.push_back("n=" + fmt(c.model.n) + " B=" + fmt(c.model.B) + " lambda=" + fmt(hw.arrival_rate()) +
                             " trace_replication=" + fmt(c.simulation.trace_replication));
  meta("delay", kNaN, q.delay);
  meta("no_delay", kNaN, q.no_delay);
  for (std::size_t i = 0; i < xs.size(); ++i) meta("upper_tail", xs[i], q.upper[i]);
  for (std::size_t i = 0; i < idle_x.size(); ++i) meta("idle_tail", idle_x[i], q.idle[i]);

  Rng rng = make_rng(c.seed, {c.simulation.trace_replication});
  const QueueTrace tr = simulate_queue(hw, rng);
  r.table.rows.reserve(tr.times.size());
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    r.table.rows.push_back({fmt(tr.times[i]), std::to_string(tr.q[i]), std::to_string(tr.busy[i])});
  return r;
}

BoundQuery bound_query(const ExperimentConfig& c, double B, double x) {
  BoundQuery q;
  q.n = c.model.n;
  q.B = B;
  q.lambda = c.model.lambda;
  q.x = x;
  q.mode = c.bound.transient ? BoundMode::kTransient : BoundMode::kSteady;
  q.t = c.bound.t;
  q.delta_grid = c.bound.delta_grid;
  q.eta_grid = c.bound.eta_grid;
  q.horizon_T = c.bound.horizon_T;
  q.replications = c.bound.replications;
  q.seed = c.seed;
  q.threads = c.threads;
  return q;
}

RunResult run_bound(const ExperimentConfig& c) {
  RunResult r;
  r.table.columns = {"B", "x", "cell", "delta", "eta", "estimate", "stderr", "ci_low", "ci_high"};
  for (double B : B_values(c, {})) {
    const double x = c.bound.x.value_or(static_cast<double>(c.model.n));
    const Theorem4Result res = theorem4_bound(bound_query(c, B, x), c.model.arrival, c.model.service);
    for (std::size_t i = 0; i < res.cells.size(); ++i) {
      const auto& cell = res.cells[i];
      std::vector<std::string> v{fmt(B), fmt(x), fmt(i), fmt(cell.delta), fmt(cell.eta)};
      push_estimate(v, cell.estimate);
      r.table.rows.push_back(std::move(v));
    }
    const auto& best = res.cells[res.best];
    std::vector<std::string> v{fmt(B), fmt(x), "min", fmt(best.delta), fmt(best.eta)};
    push_estimate(v, res.minimized);
    r.table.rows.push_back(std::move(v));
    r.table.metadata.push_back("B=" + fmt(B) + " mean_truncation=" + fmt(res.mean_truncation) +
                               (res.note.empty() ? "" : " " + res.note));
  }
  return r;
}

RunResult run_gaussian(const ExperimentConfig& c) {
  RunResult r;
  // point_2h reuses the same paths on every other grid point; the gap
  // point - point_2h shows how much the grid resolution still matters.
  r.table.columns = {"B", "x", "T", "step", "point", "std_error", "ci_low", "ci_high", "point_2h"};
  const double mu = 1.0 / c.model.service.mean();
  std::uint64_t cell = 0;
  for (double B : B_values(c, {})) {
    const CovarianceGrid g = z_grid(c, B);
    r.table.metadata.push_back("B=" + fmt(B) + " grid_points=" + fmt(g.size()) + " psd_jitter=" + fmt(g.jitter) +
                               " discrete-grid supremum (under-covers the continuous one)");
    for (double x : x_values(c, {0.0})) {
      const std::uint64_t seed = c.seed ^ mix64(cell++);
      const BoundEstimate e = corollary_bound(B, x, g, mu, c.gaussian.replications, seed);
      const BoundEstimate coarse = corollary_bound(B, x, g, mu, c.gaussian.replications, seed, 2);
      std::vector<std::string> v{fmt(B), fmt(x), fmt(g.grid.back()), fmt(c.gaussian.step * c.model.service.mean())};
      push_estimate(v, e);
      v.push_back(fmt(coarse.point));
      r.table.rows.push_back(std::move(v));
    }
  }
  return r;
}

RunResult run_renewal(const ExperimentConfig& c) {
  RunResult r;
  r.table.columns = {"t", "m(t)", "f(t)", "V[N^e(t)]"};
  if (c.renewal.points < 2) throw ConfigError("renewal.points must be >= 2");
  const RenewalSolution sol(c.model.service, c.renewal.t_max, c.renewal.step);
  for (std::size_t i = 0; i < c.renewal.points; ++i) {
    const double t = c.renewal.t_max * static_cast<double>(i) / static_cast<double>(c.renewal.points - 1);
    r.table.rows.push_back({fmt(t), fmt(sol.m(t)), fmt(sol.f(t)), fmt(sol.variance(t))});
  }
  return r;
}

RunResult run_scaling_large_B(const ExperimentConfig& c) {
  RunResult r;
  r.table.columns = {"kind", "B", "B2", "p", "std_error", "ci_low", "ci_high", "log_p",
                     "slope", "slope_ci_low", "slope_ci_high"};
  const auto Bs = B_values(c, {1.0, 1.5, 2.0, 2.5});
  if (Bs.size() < 2) throw ConfigError("scaling_large_B needs at least two B values");
  std::vector<double> B2;
  std::vector<std::vector<double>> samples;
  bool all_positive = true;
  const double mu = 1.0 / c.model.service.mean();
  std::uint64_t cell = 0;
  for (double B : Bs) {
    BoundEstimate e;
    if (c.source == "simulation") {
      const QueueEstimates q = estimate_queue(hw_config(c, B));
      e = q.delay;
      samples.push_back(q.delay_samples);
    } else if (c.source == "gaussian") {
      e = corollary_bound(B, 0.0, z_grid(c, B), mu, c.gaussian.replications, c.seed ^ mix64(cell++));
      samples.push_back(indicator_samples(e));
    } else {
      throw ConfigError("scaling_large_B: source must be 'simulation' or 'gaussian'");
    }
    B2.push_back(B * B);
    all_positive = all_positive && e.point > 0.0;
    std::vector<std::string> v{"cell", fmt(B), fmt(B * B)};
    push_estimate(v, e);
    v.push_back(e.point > 0.0 ? fmt(std::log(e.point)) : "");
    v.insert(v.end(), 3, "");
    r.table.rows.push_back(std::move(v));
  }
  std::vector<std::string> fit{"fit", "", "", "", "", "", "", ""};
  if (all_positive) {
    Rng rng = make_rng(c.seed, {0xB0075});
    const SlopeInterval s = bootstrap_slope(B2, samples, [](double p) { return std::log(p); },
                                            c.bootstrap_resamples, rng);
    fit.push_back(fmt(s.slope));
    fit.push_back(fmt(s.ci_low));
    fit.push_back(fmt(s.ci_high));
  } else {
    fit.insert(fit.end(), 3, "");
    r.messages.push_back("scaling_large_B: a zero estimate leaves log_p undefined; no slope fitted");
  }
  r.table.rows.push_back(std::move(fit));
  return r;
}

RunResult run_scaling_small_B(const ExperimentConfig& c) {
  RunResult r;
  r.table.columns = {"B", "source", "p_no_delay", "std_error", "ci_low", "ci_high", "ratio", "ratio_std_error",
                     "limit_rate"};
  const auto Bs = B_values(c, {0.05, 0.1, 0.2});
  const ModelClass k = classify(c.model);
  double limit = kNaN;
  const double cA2 = moments(c.model.arrival).scv;
  if (k == ModelClass::kMM || k == ModelClass::kGIH2Star)
    limit = scaling_constants(H2StarModel{h2star_p(c.model.service), cA2, moments(c.model.service).scv}).small_B_rate;
  else if (k == ModelClass::kGID)
    limit = scaling_constants(DeterministicModel{cA2}).small_B_rate;
  double lo = INFINITY;
  double hi = -INFINITY;
  for (double B : Bs) {
    BoundEstimate e;
    if (c.source == "simulation") {
      e = estimate_queue(hw_config(c, B)).no_delay;
    } else if (c.source == "erlang_c") {
      if (k != ModelClass::kMM) throw ConfigError("scaling_small_B: erlang_c source needs an M/M model");
      const HwConfig hw = hw_config(c, B);
      validate_config(hw);
      e.point = 1.0 - erlang_c(c.model.n, hw.arrival_rate(), 1.0 / c.model.service.mean());
      e.ci_low = e.ci_high = e.point;
      e.note = "exact";
    } else {
      throw ConfigError("scaling_small_B: source must be 'simulation' or 'erlang_c'");
    }
    const double ratio = e.point / B;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    std::vector<std::string> v{fmt(B), c.source};
    push_estimate(v, e);
    v.push_back(fmt(ratio));
    v.push_back(fmt(e.std_error / B));
    v.push_back(fmt(limit));
    r.table.rows.push_back(std::move(v));
  }
  r.messages.push_back("ratio spread max/min - 1 = " + fmt(hi / lo - 1.0));
  return r;
}

RunResult run_idle_tail(const ExperimentConfig& c) {
  RunResult r;
  r.table.columns = {"B", "x", "point", "std_error", "ci_low", "ci_high", "bound", "within_bound"};
  const auto xs = x_values(c, {1.0, 2.0});
  for (double B : B_values(c, {})) {
    const QueueEstimates q = estimate_queue(hw_config(c, B), xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double bound = mginf_bound(B, xs[i]);
      std::vector<std::string> v{fmt(B), fmt(xs[i])};
      push_estimate(v, q.idle[i]);
      v.push_back(fmt(bound));
      v.push_back(q.idle[i].point <= bound + 3.0 * q.idle[i].std_error ? "true" : "false");
      r.table.rows.push_back(std::move(v));
    }
  }
  return r;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKinds)
    if (k == kind) return name;
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (const auto& [k, n] : kKinds)
    if (name == n) return k;
  throw ConfigError("unknown experiment '" + name + "'");
}

ExperimentConfig parse_config(const json& j) {
  allow_keys(j, "config", {"experiment", "seed", "threads", "output", "model", "simulation", "bound", "gaussian",
                           "renewal", "gid", "grid", "source", "bootstrap_resamples"});
  ExperimentConfig c;
  try {
    if (!j.contains("seed")) throw ConfigError("config: 'seed' is mandatory");
    if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<long long>() >= 0))
      throw ConfigError("config.seed: expected a nonnegative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("experiment")) {
      if (!j.at("experiment").is_string()) throw ConfigError("config.experiment: expected a string");
      c.kind = parse_experiment_kind(j.at("experiment").get<std::string>());
    }
    if (j.contains("threads")) c.threads = static_cast<unsigned>(get_count(j, "threads", "config"));
    if (j.contains("output")) {
      if (!j.at("output").is_string()) throw ConfigError("config.output: expected a string");
      c.output = j.at("output").get<std::string>();
    }
    if (j.contains("source")) {
      if (!j.at("source").is_string()) throw ConfigError("config.source: expected a string");
      c.source = j.at("source").get<std::string>();
    }
    if (j.contains("bootstrap_resamples")) c.bootstrap_resamples = get_count(j, "bootstrap_resamples", "config");

    if (j.contains("model")) {
      const json& m = j.at("model");
      allow_keys(m, "model", {"n", "B", "arrival", "service", "lambda", "allow_zero_service"});
      if (m.contains("n")) c.model.n = get_count(m, "n", "model");
      if (m.contains("B")) c.model.B = get_number(m, "B", "model");
      if (m.contains("arrival")) c.model.arrival = distribution_from_json(m.at("arrival"));
      if (m.contains("service")) c.model.service = distribution_from_json(m.at("service"));
      if (m.contains("lambda")) c.model.lambda = get_number(m, "lambda", "model");
      if (m.contains("allow_zero_service")) {
        if (!m.at("allow_zero_service").is_boolean()) throw ConfigError("model.allow_zero_service: expected a boolean");
        c.model.allow_zero_service = m.at("allow_zero_service").get<bool>();
      }
      if (c.model.n < 1) throw ConfigError("model.n must be >= 1");
    }
    if (j.contains("simulation")) {
      const json& s = j.at("simulation");
      allow_keys(s, "simulation", {"horizon", "warmup", "replications", "trace_replication"});
      if (s.contains("horizon")) c.simulation.horizon = get_number(s, "horizon", "simulation");
      if (s.contains("warmup")) c.simulation.warmup = get_number(s, "warmup", "simulation");
      if (s.contains("replications")) c.simulation.replications = get_count(s, "replications", "simulation");
      if (s.contains("trace_replication"))
        c.simulation.trace_replication = get_count(s, "trace_replication", "simulation");
    }
    if (j.contains("bound")) {
      const json& b = j.at("bound");
      allow_keys(b, "bound", {"x", "mode", "t", "delta_grid", "eta_grid", "horizon_T", "replications"});
      if (b.contains("x")) c.bound.x = get_number(b, "x", "bound");
      if (b.contains("mode")) {
        const std::string mode = b.at("mode").is_string() ? b.at("mode").get<std::string>() : "";
        if (mode != "steady" && mode != "transient") throw ConfigError("bound.mode: 'steady' or 'transient'");
        c.bound.transient = mode == "transient";
      }
      if (b.contains("t")) c.bound.t = get_number(b, "t", "bound");
      if (b.contains("delta_grid")) c.bound.delta_grid = get_numbers(b, "delta_grid", "bound");
      if (b.contains("eta_grid")) {
        for (double e : get_numbers(b, "eta_grid", "bound")) {
          if (e < 0.0 || e != std::floor(e)) throw ConfigError("bound.eta_grid: expected nonnegative integers");
          c.bound.eta_grid.push_back(static_cast<std::size_t>(e));
        }
      }
      if (b.contains("horizon_T")) c.bound.horizon_T = get_number(b, "horizon_T", "bound");
      if (b.contains("replications")) c.bound.replications = get_count(b, "replications", "bound");
    }
    if (j.contains("gaussian")) {
      const json& g = j.at("gaussian");
      allow_keys(g, "gaussian", {"T", "step", "replications"});
      if (g.contains("T")) c.gaussian.T = get_number(g, "T", "gaussian");
      if (g.contains("step")) c.gaussian.step = get_number(g, "step", "gaussian");
      if (g.contains("replications")) c.gaussian.replications = get_count(g, "replications", "gaussian");
      if (!(c.gaussian.step > 0.0)) throw ConfigError("gaussian.step must be > 0");
    }
    if (j.contains("renewal")) {
      const json& g = j.at("renewal");
      allow_keys(g, "renewal", {"t_max", "step", "points"});
      if (g.contains("t_max")) c.renewal.t_max = get_number(g, "t_max", "renewal");
      if (g.contains("step")) c.renewal.step = get_number(g, "step", "renewal");
      if (g.contains("points")) c.renewal.points = get_count(g, "points", "renewal");
    }
    if (j.contains("gid")) {
      const json& g = j.at("gid");
      allow_keys(g, "gid", {"replications", "max_steps"});
      if (g.contains("replications")) c.gid.replications = get_count(g, "replications", "gid");
      if (g.contains("max_steps")) c.gid.max_steps = get_count(g, "max_steps", "gid");
    }
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      allow_keys(g, "grid", {"B", "x"});
      if (g.contains("B")) c.B_grid = get_numbers(g, "B", "grid");
      if (g.contains("x")) c.x_grid = get_numbers(g, "x", "grid");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.raw = j;
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

std::string config_hash(const ExperimentConfig& config) {
  json canon = config.raw;
  canon["seed"] = config.seed;
  canon["experiment"] = to_string(config.kind);
  canon.erase("threads");
  canon.erase("output");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunResult run(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::kValidate: return run_validate(config);
    case ExperimentKind::kSimulate: return run_simulate(config);
    case ExperimentKind::kBound: return run_bound(config);
    case ExperimentKind::kGaussian: return run_gaussian(config);
    case ExperimentKind::kRenewal: return run_renewal(config);
    case ExperimentKind::kScalingLargeB: return run_scaling_large_B(config);
    case ExperimentKind::kScalingSmallB: return run_scaling_small_B(config);
    case ExperimentKind::kIdleTail: return run_idle_tail(config);
    case ExperimentKind::kCompare: {
      RunResult r;
      r.table = compare_table(config);
      return r;
    }
  }
  throw ConfigError("unknown experiment");
}

Table compare_table(const ExperimentConfig& c) {
  const ModelClass k = classify(c.model);
  if (k == ModelClass::kOther) throw ConfigError("compare: model must be M/M, GI/H2*, GI/D or M/GI");
  Table t;
  t.columns = {"model", "B", "x", "n", "simulated", "simulated_std_error", "theorem4", "gaussian", "closed_form",
               "no_delay_ratio_simulated", "no_delay_ratio_limit", "small_B_rate"};
  const bool atom = c.model.service.has_atom_at_zero();
  if (atom) t.metadata.push_back("theorem4 left empty: the service law has an atom at zero, so renewal bundles are undefined");
  const double mu = 1.0 / c.model.service.mean();
  const double n = static_cast<double>(c.model.n);
  std::uint64_t cell = 0;
  for (double B : B_values(c, {})) {
    const auto xs = x_values(c, {0.0});
    const QueueEstimates q = estimate_queue(hw_config(c, B), {}, xs);
    const CovarianceGrid g = z_grid(c, B);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double x = xs[i];
      ++cell;
      // The simulated column is P(Q >= L); the bound of P(Q > L - 1) covers it.
      const double level = std::ceil(n + x * std::sqrt(n) - 1e-12);
      double t4 = kNaN;
      if (!atom)
        t4 = theorem4_bound(bound_query(c, B, level - 1.0), c.model.arrival, c.model.service).minimized.ci_high;
      const double gauss = corollary_bound(B, x, g, mu, c.gaussian.replications, c.seed ^ mix64(cell)).point;
      const ClosedForm cf = closed_form(c, k, B, x, cell);
      t.rows.push_back({model_name(k), fmt(B), fmt(x), fmt(c.model.n), fmt(q.upper[i].point),
                        fmt(q.upper[i].std_error), fmt(t4), fmt(gauss), fmt(cf.tail),
                        fmt((1.0 - q.delay.point) / B), fmt(cf.no_delay / B), fmt(cf.small_B_rate)});
    }
  }
  return t;
}

void write_csv(std::ostream& out, const ExperimentConfig& config, const Table& table) {
  out << "# hwq " << version() << "\n";
  out << "# experiment " << to_string(config.kind) << "\n";
  out << "# config_hash fnv1a64:" << config_hash(config) << "\n";
  out << "# seed " << config.seed << "\n";
  for (const auto& m : table.metadata) out << "# " << m << "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_field(cells[i]);
    out << "\r\n";
  };
  line(table.columns);
  for (const auto& row : table.rows) line(row);
}

void write_covariance_csv(std::ostream& out, const ExperimentConfig& config) {
  const CovarianceGrid g = z_grid(config, config.B_grid.empty() ? config.model.B : config.B_grid.front());
  out << "# hwq " << version() << "\n";
  out << "# config_hash fnv1a64:" << config_hash(config) << "\n";
  out << "# seed " << config.seed << "\n";
  out << "t";
  for (double t : g.grid) out << "," << fmt(t);
  out << "\r\n";
  for (std::size_t i = 0; i < g.grid.size(); ++i) {
    out << fmt(g.grid[i]);
    for (std::size_t k = 0; k < g.grid.size(); ++k) out << "," << fmt(g.cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
    out << "\r\n";
  }
}

}  // namespace hwq
