#include "hwq/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <set>

#include "hwq/bounding.hpp"
#include "hwq/errors.hpp"

namespace hwq {

namespace {

void record(QueueTrace& tr, double t, long q, long busy) {
  if (!tr.times.empty() && tr.times.back() == t) {
    tr.q.back() = q;
    tr.busy.back() = busy;
    return;
  }
  tr.times.push_back(t);
  tr.q.push_back(q);
  tr.busy.push_back(busy);
}

struct Dep {
  double t;
  std::size_t server;
  bool operator>(const Dep& o) const { return t > o.t || (t == o.t && server > o.server); }
};

// Service renewal stream that can be read past the bundle horizon. Events
// beyond the horizon are drawn conditionally on exceeding it, so the
// extended stream has the law of the untruncated one.
class Tape {
 public:
  Tape(const std::vector<double>& events, double horizon, const DistributionSpec& law, RenewalMode mode, Rng& rng)
      : ev_(events), horizon_(horizon), law_(&law), mode_(mode), rng_(&rng) {}

  double at(std::size_t m) {
    while (ev_.size() <= m) extend();
    return ev_[m];
  }
  /// Index of the first event strictly after t.
  std::size_t first_after(double t) {
    std::size_t m = static_cast<std::size_t>(std::upper_bound(ev_.begin(), ev_.end(), t) - ev_.begin());
    while (at(m) <= t) ++m;
    return m;
  }

 private:
  void extend() {
    const bool first = ev_.empty();
    const double base = first ? 0.0 : ev_.back();
    const bool past = base >= horizon_;
    auto draw = [&] {
      return first && mode_ == RenewalMode::kEquilibrium ? residual_sample(*law_, *rng_) : sample(*law_, *rng_);
    };
    double g = draw();
    if (!past) {
      for (int k = 0; k < 100000 && base + g <= horizon_; ++k) g = draw();
      if (base + g <= horizon_) g = horizon_ - base + sample(*law_, *rng_);
    }
    if (!(g > 0.0)) g = std::numeric_limits<double>::min();
    ev_.push_back(base + g);
  }

  std::vector<double> ev_;
  double horizon_;
  const DistributionSpec* law_;
  RenewalMode mode_;
  Rng* rng_;
};

}  // namespace

QueueTrace simulate_fcfs(const FcfsInput& in) {
  if (in.arrival_times.size() != in.arrival_work.size())
    throw ConfigError("simulate_fcfs: arrival times and work differ in length");
  const std::size_t k = in.initial_remaining.size();
  std::priority_queue<Dep, std::vector<Dep>, std::greater<>> deps;
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> free_servers;
  std::deque<double> waiting(in.queued_work.begin(), in.queued_work.end());
  for (std::size_t i = 0; i < k; ++i) {
    if (!(in.initial_remaining[i] > 0.0)) throw ConfigError("simulate_fcfs: initial remaining times must be > 0");
    deps.push({in.t0 + in.initial_remaining[i], i});
  }
  long busy = static_cast<long>(k);
  long q = busy + static_cast<long>(waiting.size());
  QueueTrace tr;
  record(tr, in.t0, q, busy);
  const double inf = std::numeric_limits<double>::infinity();
  std::size_t ai = 0;
  for (;;) {
    const double td = deps.empty() ? inf : deps.top().t;
    const double ta = ai < in.arrival_times.size() ? in.arrival_times[ai] : inf;
    const double t = std::min(td, ta);
    if (t > in.horizon || t == inf) break;
    if (td <= ta) {
      const std::size_t s = deps.top().server;
      deps.pop();
      --q;
      if (!waiting.empty()) {
        deps.push({t + waiting.front(), s});
        waiting.pop_front();
      } else {
        --busy;
        free_servers.push(s);
      }
    } else {
      ++q;
      ++tr.real_arrivals;
      const double w = in.arrival_work[ai++];
      if (!free_servers.empty()) {
        const std::size_t s = free_servers.top();
        free_servers.pop();
        ++busy;
        deps.push({t + w, s});
      } else {
        waiting.push_back(w);
      }
    }
    record(tr, t, q, busy);
  }
  return tr;
}

DominanceReport coupled_dominance_check(const RenewalPathBundle& bundle, const DistributionSpec& service,
                                        double gamma, std::size_t eta, Rng& extension) {
  const std::size_t n = bundle.servers();
  const double H = bundle.horizon;
  if (!(gamma >= 0.0 && gamma <= H)) throw ConfigError("dominance check: need 0 <= gamma <= horizon");
  if (eta > n) throw ConfigError("dominance check: eta exceeds the number of servers");

  std::vector<Tape> tapes;
  tapes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) tapes.emplace_back(bundle.service_events[i], H, service, bundle.mode, extension);

  const auto& arr = bundle.arrival_events;
  const std::size_t jobs = arr.size();
  const double unset = -1.0;
  std::vector<double> work(jobs, unset);

  // Pooled events on (0, gamma]: arrivals first at equal times.
  struct Ev {
    double t;
    int kind;  // 0 arrival, 1 service
    std::size_t idx;  // job id or stream
    std::size_t m;    // event index within stream
  };
  std::vector<Ev> ev;
  for (std::size_t j = 0; j < jobs && arr[j] <= gamma; ++j) ev.push_back({arr[j], 0, j, 0});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = bundle.service_events[i];
    for (std::size_t m = 0; m < s.size() && s[m] <= gamma; ++m) ev.push_back({s[m], 1, i, m});
  }
  std::sort(ev.begin(), ev.end(), [](const Ev& a, const Ev& b) { return a.t < b.t || (a.t == b.t && a.kind < b.kind); });

  // Phase 1: n servers kept busy on [0, gamma].
  QueueTrace aug;
  long q1 = static_cast<long>(n);
  std::deque<std::size_t> queue;
  record(aug, 0.0, q1, static_cast<long>(n));
  for (const Ev& e : ev) {
    if (e.kind == 0) {
      queue.push_back(e.idx);
      ++q1;
    } else if (!queue.empty()) {
      const std::size_t j = queue.front();
      queue.pop_front();
      work[j] = tapes[e.idx].at(e.m + 1) - e.t;
      --q1;
    }
    record(aug, e.t, q1, static_cast<long>(n));
  }
  DominanceReport rep;
  rep.phase1_matches_phi = q1 == static_cast<long>(n) + phi(bundle, 0.0, gamma, n);
  const std::vector<std::size_t> waiting_at_gamma(queue.begin(), queue.end());

  std::vector<double> rem(n);
  std::vector<std::size_t> next_idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    next_idx[i] = tapes[i].first_after(gamma);
    rem[i] = tapes[i].at(next_idx[i]) - gamma;
  }

  // Breakdown system from gamma: servers 1..eta kept busy, run until every
  // real job has a processing time.
  QueueTrace brk;
  {
    long qc = static_cast<long>(eta + queue.size());
    record(brk, gamma, qc, static_cast<long>(eta));
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    std::vector<std::size_t> m(next_idx.begin(), next_idx.begin() + static_cast<std::ptrdiff_t>(eta));
    for (std::size_t i = 0; i < eta; ++i) heap.push({tapes[i].at(m[i]), i});
    std::size_t ai = static_cast<std::size_t>(std::upper_bound(arr.begin(), arr.end(), gamma) - arr.begin());
    const double inf = std::numeric_limits<double>::infinity();
    for (;;) {
      const double ta = ai < jobs ? arr[ai] : inf;
      if (ta == inf && queue.empty()) break;
      if (heap.empty()) {
        // No live servers: only arrivals change the state.
        if (ta == inf) break;
        queue.push_back(ai++);
        ++qc;
        if (ta <= H) record(brk, ta, qc, 0);
        continue;
      }
      const auto [ts, i] = heap.top();
      if (ta <= ts) {
        queue.push_back(ai++);
        ++qc;
        record(brk, ta, qc, static_cast<long>(eta));
        continue;
      }
      heap.pop();
      if (!queue.empty()) {
        const std::size_t j = queue.front();
        queue.pop_front();
        work[j] = tapes[i].at(m[i] + 1) - ts;
        --qc;
      }
      ++m[i];
      heap.push({tapes[i].at(m[i]), i});
      if (ts <= H) record(brk, ts, qc, static_cast<long>(eta));
    }
    for (std::size_t j : queue) work[j] = sample(service, extension);
    for (double& w : work)
      if (w == unset) w = sample(service, extension);

    long broken = 0;
    for (std::size_t i = eta; i < n; ++i) broken += bundle.services_in(i, gamma, H) == 0 ? 1 : 0;
    rep.breakdown_within_formula = brk.value_at(H) + broken <= breakdown_bound_value(bundle, n, eta, gamma, H);
  }

  FcfsInput from_gamma;
  from_gamma.t0 = gamma;
  from_gamma.horizon = H;
  for (std::size_t j : waiting_at_gamma) from_gamma.queued_work.push_back(work[j]);
  for (std::size_t j = 0; j < jobs; ++j) {
    if (arr[j] > gamma) {
      from_gamma.arrival_times.push_back(arr[j]);
      from_gamma.arrival_work.push_back(work[j]);
    }
  }
  FcfsInput eta_in = from_gamma;
  eta_in.initial_remaining.assign(rem.begin(), rem.begin() + static_cast<std::ptrdiff_t>(eta));
  const QueueTrace q_eta = simulate_fcfs(eta_in);
  FcfsInput n_in = from_gamma;
  n_in.initial_remaining = rem;
  const QueueTrace q_n = simulate_fcfs(n_in);

  // Augmented system: phase 1 path, then the n-server queue from gamma.
  QueueTrace bprime;
  for (std::size_t k = 0; k < aug.times.size() && aug.times[k] < gamma; ++k)
    record(bprime, aug.times[k], aug.q[k], aug.busy[k]);
  for (std::size_t k = 0; k < q_n.times.size(); ++k) record(bprime, q_n.times[k], q_n.q[k], q_n.busy[k]);

  FcfsInput real;
  real.t0 = 0.0;
  real.horizon = H;
  for (std::size_t i = 0; i < n; ++i) real.initial_remaining.push_back(tapes[i].at(0));
  real.arrival_times = arr;
  real.arrival_work = work;
  const QueueTrace q_real = simulate_fcfs(real);

  std::vector<double> epochs;
  for (const QueueTrace* tr : std::initializer_list<const QueueTrace*>{&q_real, &bprime, &q_eta, &brk})
    epochs.insert(epochs.end(), tr->times.begin(), tr->times.end());
  std::sort(epochs.begin(), epochs.end());
  epochs.erase(std::unique(epochs.begin(), epochs.end()), epochs.end());

  for (double t : epochs) {
    if (t > H) break;
    ++rep.epochs;
    bool bad = false;
    if (q_real.value_at(t) > bprime.value_at(t)) {
      ++rep.real_vs_augmented;
      bad = true;
    }
    if (t >= gamma) {
      long broken = 0;
      for (std::size_t i = eta; i < n; ++i) broken += rem[i] > t - gamma ? 1 : 0;
      const long qe = q_eta.value_at(t);
      if (bprime.value_at(t) > qe + broken) {
        ++rep.servers_vs_eta;
        bad = true;
      }
      if (qe > brk.value_at(t)) {
        ++rep.eta_vs_breakdown;
        bad = true;
      }
    }
    if (bad) ++rep.violations;
  }
  return rep;
}

DominanceReport coupled_dominance_check(const HwConfig& config, double gamma, std::size_t eta,
                                        std::uint64_t replication) {
  validate_config(config);
  const RenewalPathBundle b =
      make_bundle(config.arrival_law(), config.spec_S, config.n, config.horizon, config.seed, replication);
  Rng ext = make_rng(config.seed, {replication, 0xC0FFEEULL});
  return coupled_dominance_check(b, config.spec_S, gamma, eta, ext);
}

}  // namespace hwq
