#include "hwq/queue_sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <string>

#include "hwq/errors.hpp"
#include "hwq/parallel.hpp"

namespace hwq {

double hw_rate(std::size_t n, double B) {
  if (n < 1) throw ConfigError("hw_rate: n must be >= 1");
  if (!(B > 0.0) || !std::isfinite(B)) throw ConfigError("hw_rate: B must be > 0");
  const double lam = static_cast<double>(n) - B * std::sqrt(static_cast<double>(n));
  if (!(lam > 0.0))
    throw InfeasibleError("outside H-W feasibility: n - B sqrt(n) = " + std::to_string(lam) + " <= 0");
  return lam;
}

double HwConfig::arrival_rate() const {
  if (lambda) {
    if (!(*lambda > 0.0)) throw InfeasibleError("arrival rate must be > 0");
    return *lambda;
  }
  return hw_rate(n, B);
}

double HwConfig::effective_warmup() const {
  if (warmup >= 0.0) return warmup;
  return 50.0 * spec_S.mean() * std::max(1.0, 1.0 / (B * B));
}

DistributionSpec HwConfig::arrival_law() const { return spec_A.scaled(1.0 / arrival_rate()); }

void validate_config(const HwConfig& c) {
  if (c.n < 1) throw ConfigError("n must be >= 1");
  if (!(c.horizon > 0.0)) throw ConfigError("horizon must be > 0");
  if (c.replications < 1) throw ConfigError("replications must be >= 1");
  const double lam = c.arrival_rate();
  const Moments a = moments(c.spec_A);
  const Moments s = moments(c.spec_S);
  if (std::abs(a.mean - s.mean) > 1e-9 * s.mean)
    throw InfeasibleError("H-W assumption needs E[A] = E[S] before rate scaling");
  if (!(a.scv + s.scv > 0.0)) throw InfeasibleError("c_A^2 + c_S^2 must be positive");
  if (c.spec_A.has_atom_at_zero()) throw InfeasibleError("inter-arrival law has an atom at zero");
  if (c.spec_S.has_atom_at_zero() && !c.allow_zero_service)
    throw InfeasibleError("service law has an atom at zero (reference-limit-only; set allow_zero_service)");
  const double rho = lam * s.mean / (static_cast<double>(c.n) * a.mean);
  if (!(rho < 1.0)) throw InfeasibleError("unstable system: rho = " + std::to_string(rho) + " >= 1");
  if (c.warmup >= c.horizon) throw ConfigError("warmup must be shorter than the horizon");
}

long QueueTrace::value_at(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return q.empty() ? 0 : q.front();
  return q[static_cast<std::size_t>(it - times.begin()) - 1];
}

namespace {

struct Departure {
  double t;
  std::size_t server;
  bool operator>(const Departure& o) const { return t > o.t || (t == o.t && server > o.server); }
};

// Event loop shared by the trace recorder and the estimators. obs(t, q, busy)
// is called once at time 0 and after every event.
template <class Observer>
void run_des(const HwConfig& c, Rng& rng, Observer&& obs, std::size_t* arrivals_out = nullptr) {
  const DistributionSpec A = c.arrival_law();
  const DistributionSpec& S = c.spec_S;
  Rng ra(rng());
  Rng rs(rng());
  const double inf = std::numeric_limits<double>::infinity();

  std::priority_queue<Departure, std::vector<Departure>, std::greater<>> deps;
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> free_servers;
  std::deque<std::uint64_t> waiting;
  long q = 0;
  long busy = 0;
  std::uint64_t next_id = 0;
  std::uint64_t next_to_start = 0;
  std::size_t arrivals = 0;

  for (std::size_t i = 0; i < c.n; ++i) {
    deps.push({residual_sample(S, rs), i});
    ++q;
    ++busy;
  }
  double next_arrival = c.disable_arrivals ? inf : residual_sample(A, ra);
  obs(0.0, q, busy);

  // Places job `id` on server `s` at time t; zero-length jobs leave at once.
  auto start = [&](std::uint64_t id, std::size_t s, double t) -> bool {
    if (id != next_to_start) throw InvariantViolation("FCFS order violated");
    ++next_to_start;
    const double v = sample(S, rs);
    if (v <= 0.0) {
      --q;
      return false;
    }
    deps.push({t + v, s});
    ++busy;
    return true;
  };

  for (;;) {
    const double td = deps.empty() ? inf : deps.top().t;
    const double t = std::min(td, next_arrival);
    if (t > c.horizon) break;
    if (td <= next_arrival) {
      const std::size_t s = deps.top().server;
      deps.pop();
      --q;
      --busy;
      bool taken = false;
      while (!taken && !waiting.empty()) {
        const auto id = waiting.front();
        waiting.pop_front();
        taken = start(id, s, t);
      }
      if (!taken) free_servers.push(s);
    } else {
      ++q;
      ++arrivals;
      const std::uint64_t id = next_id++;
      if (!free_servers.empty()) {
        const std::size_t s = free_servers.top();
        free_servers.pop();
        if (!start(id, s, t)) free_servers.push(s);
      } else {
        waiting.push_back(id);
      }
      next_arrival = t + sample(A, ra);
    }
    if (!waiting.empty() && !free_servers.empty()) throw InvariantViolation("server idle while jobs wait");
    if (q != busy + static_cast<long>(waiting.size())) throw InvariantViolation("queue bookkeeping mismatch");
    obs(t, q, busy);
  }
  if (arrivals_out) *arrivals_out = arrivals;
}

struct ReplicationAverages {
  double delay = 0.0;
  double no_delay = 0.0;
  std::vector<double> idle;
  std::vector<double> upper;
};

}  // namespace

QueueTrace simulate_queue(const HwConfig& config, Rng& rng) {
  validate_config(config);
  QueueTrace tr;
  run_des(
      config, rng,
      [&](double t, long q, long busy) {
        if (!tr.q.empty() && tr.q.back() == q && tr.busy.back() == busy) return;
        if (!tr.times.empty() && tr.times.back() == t) {
          tr.q.back() = q;
          tr.busy.back() = busy;
          return;
        }
        tr.times.push_back(t);
        tr.q.push_back(q);
        tr.busy.push_back(busy);
      },
      &tr.real_arrivals);
  return tr;
}

QueueEstimates estimate_queue(const HwConfig& config, std::span<const double> idle_x,
                              std::span<const double> upper_x) {
  validate_config(config);
  if (config.replications < 2) throw ConfigError("estimates need at least two replications");
  const double warm = config.effective_warmup();
  if (warm >= config.horizon) throw ConfigError("warmup must be shorter than the horizon");
  const double n = static_cast<double>(config.n);
  std::vector<double> xs(idle_x.begin(), idle_x.end());
  for (double x : xs)
    if (!(x > 0.0)) throw ConfigError("idle tail threshold x must be > 0");
  std::vector<long> thresholds;
  for (double x : xs) {
    const double level = n - x * std::sqrt(n);
    thresholds.push_back(level < 0.0 ? -1 : static_cast<long>(std::floor(level + 1e-12)));
  }
  std::vector<long> uppers;
  for (double x : upper_x) {
    if (!(x >= 0.0)) throw ConfigError("upper tail threshold x must be >= 0");
    uppers.push_back(static_cast<long>(std::ceil(n + x * std::sqrt(n) - 1e-12)));
  }

  auto one = [&](std::size_t rep) {
    Rng rng = make_rng(config.seed, {rep});
    const long nn = static_cast<long>(config.n);
    double last_t = 0.0;
    long last_q = 0;
    double t_delay = 0.0;
    std::vector<double> t_idle(xs.size(), 0.0);
    std::vector<double> t_upper(uppers.size(), 0.0);
    auto credit = [&](double until) {
      const double a = std::max(last_t, warm);
      const double b = std::min(until, config.horizon);
      if (b <= a) return;
      if (last_q >= nn) t_delay += b - a;
      for (std::size_t i = 0; i < thresholds.size(); ++i)
        if (last_q <= thresholds[i]) t_idle[i] += b - a;
      for (std::size_t i = 0; i < uppers.size(); ++i)
        if (last_q >= uppers[i]) t_upper[i] += b - a;
    };
    run_des(config, rng, [&](double t, long q, long) {
      credit(t);
      last_t = t;
      last_q = q;
    });
    credit(config.horizon);
    const double span = config.horizon - warm;
    ReplicationAverages r;
    r.delay = t_delay / span;
    r.no_delay = (span - t_delay) / span;
    for (double v : t_idle) r.idle.push_back(v / span);
    for (double v : t_upper) r.upper.push_back(v / span);
    return r;
  };
  const auto reps = parallel_map(config.replications, config.threads, one);

  QueueEstimates out;
  std::vector<double> v(reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) v[i] = reps[i].delay;
  out.delay = estimate_from_replications(v);
  out.delay_samples = v;
  for (std::size_t i = 0; i < reps.size(); ++i) v[i] = reps[i].no_delay;
  out.no_delay = estimate_from_replications(v);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    for (std::size_t i = 0; i < reps.size(); ++i) v[i] = reps[i].idle[k];
    out.idle.push_back(estimate_from_replications(v));
  }
  for (std::size_t k = 0; k < uppers.size(); ++k) {
    for (std::size_t i = 0; i < reps.size(); ++i) v[i] = reps[i].upper[k];
    out.upper.push_back(estimate_from_replications(v));
  }
  return out;
}

BoundEstimate estimate_delay_prob(const HwConfig& config) { return estimate_queue(config).delay; }

BoundEstimate estimate_idle_tail(const HwConfig& config, double x) {
  const double xs[1] = {x};
  return estimate_queue(config, xs).idle.front();
}

double erlang_c(std::size_t n, double lambda, double mu) {
  if (n < 1 || !(lambda > 0.0) || !(mu > 0.0)) throw ConfigError("erlang_c: need n >= 1, lambda > 0, mu > 0");
  const double a = lambda / mu;
  const double rho = a / static_cast<double>(n);
  if (!(rho < 1.0)) throw InfeasibleError("erlang_c: rho >= 1");
  double b = 1.0;
  for (std::size_t k = 1; k <= n; ++k) b = a * b / (static_cast<double>(k) + a * b);
  return b / (1.0 - rho * (1.0 - b));
}

}  // namespace hwq
