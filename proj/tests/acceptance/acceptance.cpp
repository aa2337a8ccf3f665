// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
//   hwq_acceptance [criterion ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "hwq/bounding.hpp"
#include "hwq/diffusions.hpp"
#include "hwq/distributions.hpp"
#include "hwq/gaussian_limit.hpp"
#include "hwq/queue_sim.hpp"
#include "hwq/reference_limits.hpp"
#include "hwq/renewal.hpp"
#include "hwq/rng.hpp"
#include "hwq/stats.hpp"
#include "oracles.hpp"

using namespace hwq;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const DistributionSpec kExp = DistributionSpec::exponential(1.0);
const DistributionSpec kDet = DistributionSpec::deterministic(1.0);

Outcome erlang_c_oracle() {
  const double small = erlang_c(2, 1.0, 1.0);
  const bool exact = std::abs(small - 1.0 / 3.0) <= 1e-12;

  const std::size_t n = 200;
  const double ec = erlang_c(n, hw_rate(n, 1.0), 1.0);
  const bool near_alpha = std::abs(ec - alpha(1.0)) <= 0.02;

  HwConfig c;
  c.n = n;
  c.B = 1.0;
  c.horizon = 1000.0;
  c.replications = 20;
  c.seed = 1001;
  const BoundEstimate sim = estimate_delay_prob(c);
  const double tol = std::max(0.01, 3.0 * sim.std_error);
  const bool sim_ok = std::abs(sim.point - ec) <= tol;
  return {exact && near_alpha && sim_ok,
          fmt("erlang_c(2,1,1)=%.15f; erlang_c(200)=%.6f alpha(1)=%.6f; sim=%.5f se=%.5f tol=%.5f", small, ec,
              alpha(1.0), sim.point, sim.std_error, tol)};
}

Outcome pathwise_dominance() {
  const std::size_t n = 20;
  std::size_t violations = 0;
  std::size_t epochs = 0;
  std::size_t phase1 = 0;
  std::size_t formula = 0;
  for (const auto& A : {kExp, kDet}) {
    HwConfig c;
    c.n = n;
    c.B = 1.0;
    c.spec_A = A;
    c.spec_S = kExp;
    c.horizon = 20.0;
    c.seed = 2002;
    for (std::uint64_t r = 0; r < 1000; ++r) {
      for (const auto& [gamma, eta] : {std::pair<double, std::size_t>{0.0, n}, {c.horizon / 2.0, n - 5}}) {
        const DominanceReport d = coupled_dominance_check(c, gamma, eta, r);
        violations += d.violations;
        epochs += d.epochs;
        phase1 += !d.phase1_matches_phi;
        formula += !d.breakdown_within_formula;
      }
    }
  }
  return {violations == 0 && phase1 == 0 && formula == 0,
          fmt("%zu violation epochs out of %zu; phase-1 mismatches %zu; breakdown formula misses %zu", violations,
              epochs, phase1, formula)};
}

Outcome lindley_equals_des() {
  const std::size_t n = 20;
  const double horizon = 30.0;
  const std::vector<std::pair<DistributionSpec, DistributionSpec>> families{
      {kExp, kExp}, {kDet, kExp}, {kExp, kDet}, {DistributionSpec::hyperexponential({0.3, 0.7}, {0.5, 3.0}), DistributionSpec::erlang(2, 2.0)}};
  Rng pick = make_rng(3003);
  std::size_t mismatches = 0;
  std::size_t paths = 0;
  for (std::size_t f = 0; f < families.size(); ++f) {
    const auto& [A, S] = families[f];
    const DistributionSpec arrival = A.scaled(1.0 / hw_rate(n, 1.0));
    for (std::uint64_t r = 0; r < 1000; ++r) {
      const RenewalPathBundle b = make_bundle(arrival, S, n, horizon, 3003 + f, r);
      const std::size_t eta = pick() % (n + 1);
      const QueueTrace t = busy_system_path(b, eta, horizon);
      mismatches += (t.q.back() - static_cast<long>(eta)) != phi(b, 0.0, horizon, eta);
      ++paths;
    }
  }
  return {mismatches == 0, fmt("%zu mismatches on %zu paths over %zu families", mismatches, paths, families.size())};
}

Outcome phi_brute_force() {
  Rng pick = make_rng(4004);
  std::size_t mismatches = 0;
  const std::vector<DistributionSpec> laws{kExp, DistributionSpec::erlang(2, 2.0), kDet,
                                           DistributionSpec::uniform(0.5, 1.5)};
  for (std::uint64_t r = 0; r < 1000; ++r) {
    const std::size_t n = 1 + pick() % 12;
    const DistributionSpec& S = laws[r % laws.size()];
    const RenewalPathBundle b = make_bundle(kExp.scaled(1.0 / (0.8 * n)), S, n, 10.0, 4004, r);
    const double x = 5.0 * uniform_pos(pick);
    const double y = (10.0 - x) * uniform_pos(pick);
    const std::size_t z = pick() % (n + 1);
    mismatches += phi(b, x, y, z) != hwq_test::brute_phi(b, x, y, z);
  }
  return {mismatches == 0, fmt("%zu mismatches on 1000 bundles", mismatches)};
}

Outcome renewal_covariance() {
  const RenewalSolution e(kExp, 20.0);
  double f_max = 0.0;
  for (int k = 0; k <= 2000; ++k) f_max = std::max(f_max, std::abs(e.f(0.01 * k)));

  const RenewalSolution d(kDet, 5.0);
  Rng rng = make_rng(5005);
  const int N = 1000000;
  const double ts[3] = {0.5, 1.0, 2.5};
  std::vector<std::vector<double>> counts(3, std::vector<double>(N));
  for (int r = 0; r < N; ++r) {
    const auto ev = simulate_renewal(kDet, RenewalMode::kEquilibrium, 2.5, rng);
    for (int k = 0; k < 3; ++k) counts[k][r] = static_cast<double>(count_upto(ev, ts[k]));
  }
  double worst_z = 0.0;
  for (int k = 0; k < 3; ++k) {
    RunningStats m;
    for (double c : counts[k]) m.push(c);
    RunningStats sq;
    for (double c : counts[k]) sq.push((c - m.mean()) * (c - m.mean()));
    const double z = std::abs(sq.mean() - d.variance(ts[k])) / std::max(sq.std_error(), 1e-300);
    worst_z = std::max(worst_z, z);
  }

  const std::vector<DistributionSpec> fams{kExp,
                                           kDet,
                                           DistributionSpec::h2star(0.5, 1.0),
                                           DistributionSpec::hyperexponential({0.3, 0.7}, {0.5, 3.0}),
                                           DistributionSpec::erlang(2, 2.0),
                                           DistributionSpec::lognormal(-0.125, 0.5),
                                           DistributionSpec::uniform(0.5, 1.5)};
  double worst_cov = 0.0;
  for (const auto& law : fams) {
    const double mean = moments(law).mean;
    const RenewalSolution sol(law, 10.0 * mean);
    for (int i = 1; i <= 50; ++i)
      for (int j = 1; j <= 50; ++j) worst_cov = std::min(worst_cov, sol.cov(0.2 * i * mean, 0.2 * j * mean));
  }
  return {f_max < 1e-3 && worst_z <= 3.0 && worst_cov >= -1e-6,
          fmt("exp max|f|=%.2e; det variance worst |z|=%.2f; min covariance %.2e over %zu families", f_max, worst_z,
              worst_cov, fams.size())};
}

Outcome slepian() {
  bool ok = true;
  std::string detail;
  for (const auto& S : {kExp, kDet}) {
    const RenewalConstants c = renewal_constants(kExp, S);
    const SlepianReport r = verify_slepian_domination(kExp, S, slepian_s_grid(c), slepian_offsets());
    ok = ok && r.max_variance_gap <= 1e-6 && r.min_margin >= -1e-6;
    detail += fmt("%s: var gap %.1e margin %.2e on %zu pairs; ", S.name().c_str(), r.max_variance_gap, r.min_margin,
                  r.points);
  }
  return {ok, detail};
}

Outcome bound_dominance() {
  bool ok = true;
  std::string detail;
  const std::size_t n = 100;
  for (double B : {1.0, 2.0}) {
    HwConfig c;
    c.n = n;
    c.B = B;
    c.horizon = 2000.0;
    c.replications = 20;
    c.seed = 7007;
    const BoundEstimate sim = estimate_delay_prob(c);

    BoundQuery q;
    q.n = n;
    q.B = B;
    q.x = static_cast<double>(n);
    q.replications = 1000;
    q.seed = 7008;
    const Theorem4Result t = theorem4_bound(q, kExp, kExp);
    const double se = std::hypot(sim.std_error, t.minimized.std_error);
    const bool pass = t.minimized.point >= sim.point - 3.0 * se;
    ok = ok && pass;
    detail += fmt("B=%g bound=%.4f sim=%.4f se=%.4f; ", B, t.minimized.point, sim.point, se);
  }
  return {ok, detail};
}

Outcome large_B_trend() {
  const std::vector<double> Bs{1.0, 1.5, 2.0, 2.5};
  std::vector<double> B2;
  std::vector<std::vector<double>> samples;
  std::string detail;
  std::uint64_t cell = 0;
  bool positive = true;
  for (double B : Bs) {
    const double T = truncation_cap(B, 1.0, 0.0, 1.0);
    const auto grid = uniform_grid(T, 0.05);
    CovarianceGrid g = build_Z_cov(kExp, kExp, grid);
    const BoundEstimate e = corollary_bound(B, 0.0, g, 1.0, 10000, 8008 + cell++);
    const auto hits = static_cast<std::size_t>(std::llround(e.point * static_cast<double>(e.replications)));
    std::vector<double> v(e.replications, 0.0);
    std::fill_n(v.begin(), std::min(hits, v.size()), 1.0);
    samples.push_back(std::move(v));
    B2.push_back(B * B);
    positive = positive && e.point > 0.0;
    detail += fmt("B=%g p=%.4f; ", B, e.point);
  }
  if (!positive) return {false, detail + "zero estimate"};
  Rng rng = make_rng(8009);
  const SlopeInterval s = bootstrap_slope(B2, samples, [](double p) { return std::log(p); }, 2000, rng);
  detail += fmt("slope %.4f CI [%.4f, %.4f]", s.slope, s.ci_low, s.ci_high);
  return {s.slope < 0.0 && s.ci_high < 0.0, detail};
}

Outcome small_B_trend() {
  std::string detail;
  double at_01 = 0.0;
  std::uint64_t seed = 9009;
  for (double B : {0.05, 0.1, 0.2}) {
    const BoundEstimate e = gid_limit_mc(B, 1.0, 0.0, 100000, 1000000, seed++);
    const double ratio = (1.0 - e.point) / B;
    if (B == 0.1) at_01 = ratio;
    detail += fmt("B=%g ratio=%.4f (se %.4f); ", B, ratio, e.std_error / B);
  }
  const double rel = std::abs(at_01 - std::numbers::sqrt2) / std::numbers::sqrt2;
  detail += fmt("relative gap to sqrt(2) at B=0.1: %.3f", rel);
  return {rel <= 0.15, detail};
}

Outcome idle_tail() {
  HwConfig c;
  c.n = 100;
  c.B = 1.0;
  c.horizon = 2000.0;
  c.replications = 20;
  c.seed = 10010;
  const std::vector<double> xs{1.0, 2.0};
  const QueueEstimates q = estimate_queue(c, xs);
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double bound = mginf_bound(c.B, xs[i]);
    ok = ok && q.idle[i].point <= bound + 3.0 * q.idle[i].std_error;
    detail += fmt("x=%g sim=%.4f se=%.4f bound=%.4f; ", xs[i], q.idle[i].point, q.idle[i].std_error, bound);
  }
  return {ok, detail};
}

Outcome diffusion_laws() {
  const int N = 100000;
  Rng rng = make_rng(11011);
  auto check = [&](const char* name, double p_ref, const std::function<bool()>& trial, std::string& detail) {
    int hits = 0;
    for (int r = 0; r < N; ++r) hits += trial();
    const double p = hits / static_cast<double>(N);
    const double sigma = std::sqrt(p_ref * (1.0 - p_ref) / N);
    detail += fmt("%s mc=%.5f ref=%.5f z=%.2f; ", name, p, p_ref, (p - p_ref) / sigma);
    return std::abs(p - p_ref) <= 4.0 * sigma;
  };
  std::string detail;
  bool ok = true;
  // Grid crossings under-cover by about 0.58 sqrt(h); resolve the barrier finely.
  const double h = 1e-6;

  HitOptions sup;
  sup.horizon = 1.0;
  sup.min_step = h;
  ok &= check("sup_tail", bm_closed_forms(BmLaw::kSupTail, 1.0, 1.0),
              [&] { return hitting_time({ProcessKind::kBrownian, 0.0, 0.0}, 1.0, rng, sup).hit; }, detail);

  HitOptions drift;
  drift.give_up = 8.0;
  drift.min_step = h;
  ok &= check("drift_sup", bm_closed_forms(BmLaw::kDriftSup, 1.0, 1.0),
              [&] { return hitting_time({ProcessKind::kBrownian, 0.0, -1.0}, 1.0, rng, drift).hit; }, detail);

  HitOptions two;
  two.lower = -2.0;
  two.min_step = h;
  ok &= check("two_barrier", bm_closed_forms(BmLaw::kTwoBarrier, 1.0, 2.0),
              [&] { return hitting_time({ProcessKind::kBrownian, 0.0, 0.0}, 1.0, rng, two).hit; }, detail);
  return {ok, detail};
}

Outcome pitman_williams() {
  Rng rng = make_rng(12012);
  const std::size_t N = 10000;
  std::vector<double> cond;
  std::vector<double> bes;
  for (std::size_t i = 0; i < N; ++i) {
    cond.push_back(conditioned_bm_hit_sample(1.0, 4.0, rng).time);
    bes.push_back(hitting_time({ProcessKind::kBessel3, 1.0, 0.0}, 4.0, rng).time);
  }
  const double ks_hit = ks_distance(cond, bes);

  std::vector<double> wil;
  std::vector<double> direct;
  for (std::size_t i = 0; i < N; ++i) {
    wil.push_back(williams_sample(1.0, 0.01, 1.0, rng).values.back());
    direct.push_back(sample_bessel3(1.0, 1.0, 1.0, rng).values.back());
  }
  const double ks_w = ks_distance(wil, direct);
  return {ks_hit < 0.05 && ks_w < 0.03, fmt("hitting-time KS %.4f; Williams marginal KS %.4f", ks_hit, ks_w)};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "Erlang-C oracle", erlang_c_oracle},
      {2, "pathwise dominance", pathwise_dominance},
      {3, "Lindley recursion equals the busy-system DES", lindley_equals_des},
      {4, "phi equals the brute-force suffix oracle", phi_brute_force},
      {5, "renewal covariance", renewal_covariance},
      {6, "Slepian comparison", slepian},
      {7, "sample-path bound dominates the simulated delay probability", bound_dominance},
      {8, "large-B trend of the Gaussian bound", large_B_trend},
      {9, "small-B constant of the GI/D limit", small_B_trend},
      {10, "idle-tail bound", idle_tail},
      {11, "Brownian closed forms", diffusion_laws},
      {12, "Pitman and Williams equivalences", pitman_williams},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.passed;
    std::printf("%s %2d %s (%.1fs): %s\n", o.passed ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
