#include "hwq/bounding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hwq/errors.hpp"
#include "hwq/parallel.hpp"

namespace hwq {

namespace {

struct Mark {
  double t;
  int step;  // +1 arrival, -1 service
  std::size_t stream;  // service stream, or SIZE_MAX for arrivals
};

constexpr std::size_t kArrival = std::numeric_limits<std::size_t>::max();

// Arrivals and the renewals of streams [0, z) in (a, b], sorted by time with
// arrivals first at equal times.
std::vector<Mark> pooled(const RenewalPathBundle& bundle, double a, double b, std::size_t z) {
  std::vector<Mark> out;
  auto add = [&](const std::vector<double>& v, int step, std::size_t stream) {
    auto lo = std::upper_bound(v.begin(), v.end(), a);
    auto hi = std::upper_bound(v.begin(), v.end(), b);
    for (auto it = lo; it != hi; ++it) out.push_back({*it, step, stream});
  };
  add(bundle.arrival_events, +1, kArrival);
  for (std::size_t i = 0; i < z; ++i) add(bundle.service_events[i], -1, i);
  std::sort(out.begin(), out.end(), [](const Mark& x, const Mark& y) { return x.t < y.t || (x.t == y.t && x.step > y.step); });
  return out;
}

}  // namespace

long phi(const RenewalPathBundle& bundle, double x, double y, std::size_t z) {
  if (x < 0.0 || y < 0.0) throw ConfigError("phi: window must be nonnegative");
  if (z > bundle.servers()) throw ConfigError("phi: z exceeds the number of service streams");
  if (x + y > bundle.horizon * (1.0 + 1e-12)) throw ConfigError("phi: bundle horizon shorter than x + y");
  const std::vector<Mark> ev = pooled(bundle, x, x + y, z);
  long sum = 0;
  long best = 0;
  // Scan from the right edge; only whole groups of simultaneous events form a window.
  for (std::size_t k = ev.size(); k > 0;) {
    const double t = ev[k - 1].t;
    while (k > 0 && ev[k - 1].t == t) sum += ev[--k].step;
    best = std::max(best, sum);
  }
  return best;
}

QueueTrace busy_system_path(const RenewalPathBundle& bundle, std::size_t eta, double horizon) {
  if (eta > bundle.servers()) throw ConfigError("busy_system_path: eta exceeds the number of service streams");
  if (horizon > bundle.horizon * (1.0 + 1e-12)) throw ConfigError("busy_system_path: horizon beyond the bundle");
  QueueTrace tr;
  long q = static_cast<long>(eta);
  tr.times.push_back(0.0);
  tr.q.push_back(q);
  tr.busy.push_back(q);
  for (const Mark& e : pooled(bundle, 0.0, horizon, eta)) {
    if (e.step > 0) {
      ++q;
      ++tr.real_arrivals;
    } else if (q > static_cast<long>(eta)) {
      --q;
    } else {
      ++tr.artificial_arrivals;
    }
    if (tr.times.back() == e.t) {
      tr.q.back() = q;
    } else {
      tr.times.push_back(e.t);
      tr.q.push_back(q);
      tr.busy.push_back(static_cast<long>(eta));
    }
  }
  return tr;
}

long breakdown_bound_value(const RenewalPathBundle& bundle, std::size_t n, std::size_t eta, double gamma, double t) {
  if (!(gamma >= 0.0 && gamma <= t)) throw ConfigError("breakdown_bound_value: need 0 <= gamma <= t");
  if (n > bundle.servers() || eta > n) throw ConfigError("breakdown_bound_value: need eta <= n <= streams");
  const long first = 1 + phi(bundle, gamma, t - gamma, eta);
  long netput = phi(bundle, 0.0, gamma, n) + static_cast<long>(bundle.arrivals_in(gamma, t));
  for (std::size_t i = 0; i < eta; ++i) netput -= static_cast<long>(bundle.services_in(i, gamma, t));
  long idle_broken = 0;
  for (std::size_t i = eta; i < n; ++i) idle_broken += bundle.services_in(i, gamma, t) == 0 ? 1 : 0;
  return static_cast<long>(eta) + std::max(first, netput) + idle_broken;
}

std::vector<double> default_delta_grid(double mean_service, double cap) {
  return {0.0, 0.5 * mean_service, mean_service, 2.0 * mean_service, cap};
}

std::vector<std::size_t> default_eta_grid(std::size_t n, double B) {
  const double r = B * std::sqrt(static_cast<double>(n));
  std::vector<std::size_t> out;
  for (double d : {0.0, std::ceil(r / 2.0), std::ceil(r), std::ceil(2.0 * r)}) {
    if (d > static_cast<double>(n)) continue;
    const auto eta = n - static_cast<std::size_t>(d);
    if (std::find(out.begin(), out.end(), eta) == out.end()) out.push_back(eta);
  }
  return out;
}

double truncation_cap(double B, double mu, double max_delta, double mean_service) {
  return std::max(50.0 / (B * B) * std::max(1.0, 1.0 / mu), 2.0 * max_delta + mean_service);
}

Theorem4Result theorem4_bound(const BoundQuery& query, const DistributionSpec& spec_A, const DistributionSpec& spec_S) {
  const std::size_t n = query.n;
  if (n < 1) throw ConfigError("theorem4_bound: n must be >= 1");
  if (query.replications < 1) throw ConfigError("theorem4_bound: replications must be >= 1");
  const double lam = query.lambda ? *query.lambda : hw_rate(n, query.B);
  if (!(lam > 0.0)) throw InfeasibleError("theorem4_bound: arrival rate must be > 0");
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double B = query.lambda ? (static_cast<double>(n) - lam) / sqrt_n : query.B;
  const double ES = spec_S.mean();
  const double mu = 1.0 / ES;
  const RenewalConstants rc = renewal_constants(spec_A, spec_S);
  const bool steady = query.mode == BoundMode::kSteady;
  if (steady && !(B > 0.0)) throw InfeasibleError("theorem4_bound: steady-state form needs B > 0");

  std::vector<std::size_t> etas = query.eta_grid.empty() ? default_eta_grid(n, B) : query.eta_grid;
  std::vector<double> deltas = query.delta_grid;
  double T = 0.0;
  if (steady) {
    const double given_max = deltas.empty() ? 2.0 * ES : *std::max_element(deltas.begin(), deltas.end());
    T = query.horizon_T > 0.0 ? query.horizon_T : truncation_cap(B, mu, given_max, ES);
    if (deltas.empty()) deltas = default_delta_grid(ES, T);
  } else {
    if (!(query.t >= 0.0)) throw ConfigError("theorem4_bound: transient time must be >= 0");
    T = query.t;
    if (deltas.empty())
      for (double d : default_delta_grid(ES, T))
        if (d <= T) deltas.push_back(d);
  }
  if (deltas.empty() || etas.empty()) throw ConfigError("theorem4_bound: empty grid");
  for (std::size_t e : etas)
    if (e > n) throw ConfigError("theorem4_bound: eta outside [0, n]");
  for (double d : deltas)
    if (d < 0.0 || d > T) throw ConfigError("theorem4_bound: delta outside [0, T]");
  std::sort(deltas.begin(), deltas.end());
  deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());
  const double bundle_T = std::max(T, 1e-12);

  const DistributionSpec arrival = spec_A.scaled(1.0 / lam);
  const std::size_t nd = deltas.size();
  const std::size_t ne = etas.size();

  struct RepOut {
    std::vector<char> hit;
    double used_T;
  };
  auto one = [&](std::size_t r) {
    const RenewalPathBundle b = make_bundle(arrival, spec_S, n, bundle_T, query.seed, r);
    const std::vector<Mark> ev = pooled(b, 0.0, bundle_T, n);

    // Full netput X after each event and the adaptive stopping time.
    std::vector<long> X(ev.size());
    long x = 0;
    long runmax = 0;
    double stop = T;
    for (std::size_t k = 0; k < ev.size(); ++k) {
      x += ev[k].step;
      X[k] = x;
      runmax = std::max(runmax, x);
      if (steady && query.horizon_T <= 0.0 && stop == T) {
        const double s = ev[k].t;
        if (s >= deltas.back() && static_cast<double>(runmax - x) / sqrt_n >= 10.0 * std::sqrt(rc.C4 * s) / (B * mu))
          stop = s;
      }
    }
    std::size_t stop_idx = static_cast<std::size_t>(
        std::upper_bound(ev.begin(), ev.end(), stop, [](double v, const Mark& m) { return v < m.t; }) - ev.begin());
    const long neg_inf = std::numeric_limits<long>::min() / 4;
    std::vector<long> suffix(ev.size() + 1, neg_inf);
    for (std::size_t k = stop_idx; k > 0; --k) suffix[k - 1] = std::max(suffix[k], X[k - 1]);

    RepOut out;
    out.used_T = stop;
    out.hit.assign(nd * ne, 0);

    // Per delta: X(delta), sup over [delta, stop], per-stream counts at delta.
    std::vector<long> sup_tail(nd);
    std::vector<std::vector<long>> tail_count(nd, std::vector<long>(n + 1, 0));
    std::vector<std::vector<long>> tail_zero(nd, std::vector<long>(n + 1, 0));
    for (std::size_t d = 0; d < nd; ++d) {
      const double delta = deltas[d];
      const std::size_t k = static_cast<std::size_t>(
          std::upper_bound(ev.begin(), ev.end(), delta, [](double v, const Mark& m) { return v < m.t; }) - ev.begin());
      const long x_delta = k == 0 ? 0 : X[k - 1];
      sup_tail[d] = std::max(x_delta, k < stop_idx ? suffix[k] : neg_inf);
      for (std::size_t i = n; i > 0; --i) {
        const long c = static_cast<long>(count_upto(b.service_events[i - 1], delta));
        tail_count[d][i - 1] = tail_count[d][i] + c;
        tail_zero[d][i - 1] = tail_zero[d][i] + (c == 0 ? 1 : 0);
      }
    }

    for (std::size_t e = 0; e < ne; ++e) {
      const std::size_t eta = etas[e];
      // Running sup of A - sum_{i < eta} N_i from 0, read off at each delta.
      long y = 0;
      long ymax = 0;
      std::size_t k = 0;
      for (std::size_t d = 0; d < nd; ++d) {
        while (k < ev.size() && ev[k].t <= deltas[d]) {
          if (ev[k].stream == kArrival || ev[k].stream < eta) {
            y += ev[k].step;
            ymax = std::max(ymax, y);
          }
          ++k;
        }
        const long value = std::max(1 + ymax, sup_tail[d] + tail_count[d][eta]) + tail_zero[d][eta];
        out.hit[d * ne + e] = static_cast<double>(value) > query.x - static_cast<double>(eta) ? 1 : 0;
      }
    }
    return out;
  };
  const auto reps = parallel_map(query.replications, query.threads, one);

  Theorem4Result res;
  res.note = steady ? "truncated-horizon" : "transient";
  double tsum = 0.0;
  for (const auto& r : reps) tsum += r.used_T;
  res.mean_truncation = tsum / static_cast<double>(reps.size());
  const std::size_t K = nd * ne;
  const double bonf_level = 1.0 - 0.05 / static_cast<double>(K);
  res.bonferroni_ci_high = 1.0;
  for (std::size_t d = 0; d < nd; ++d) {
    for (std::size_t e = 0; e < ne; ++e) {
      std::size_t hits = 0;
      for (const auto& r : reps) hits += static_cast<std::size_t>(r.hit[d * ne + e]);
      BoundCell cell;
      cell.delta = deltas[d];
      cell.eta = etas[e];
      cell.estimate = estimate_from_indicators(hits, reps.size());
      cell.estimate.note = res.note;
      res.bonferroni_ci_high =
          std::min(res.bonferroni_ci_high, estimate_from_indicators(hits, reps.size(), bonf_level).ci_high);
      res.cells.push_back(cell);
    }
  }
  for (std::size_t c = 1; c < res.cells.size(); ++c)
    if (res.cells[c].estimate.point < res.cells[res.best].estimate.point) res.best = c;
  res.minimized = res.cells[res.best].estimate;
  res.minimized.ci_high = std::max(res.bonferroni_ci_high, res.minimized.point);
  res.minimized.note = res.note + "; ci_high is the Bonferroni upper bound over the grid";
  return res;
}

}  // namespace hwq
