#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "hwq/distributions.hpp"
#include "hwq/errors.hpp"
#include "hwq/renewal.hpp"
#include "hwq/rng.hpp"
#include "hwq/stats.hpp"

using namespace hwq;

namespace {

std::vector<DistributionSpec> families() {
  return {DistributionSpec::exponential(1.0),
          DistributionSpec::deterministic(1.0),
          DistributionSpec::h2star(0.5, 1.0),
          DistributionSpec::hyperexponential({0.3, 0.7}, {0.5, 3.0}),
          DistributionSpec::erlang(2, 2.0),
          DistributionSpec::lognormal(-0.125, 0.5),
          DistributionSpec::uniform(0.5, 1.5)};
}

std::size_t count_events(const DistributionSpec& d, RenewalMode mode, double a, double b, Rng& rng) {
  const auto ev = simulate_renewal(d, mode, b, rng);
  return static_cast<std::size_t>(std::count_if(ev.begin(), ev.end(), [&](double t) { return t > a && t <= b; }));
}

}  // namespace

TEST_CASE("simulate_renewal examples") {
  Rng rng = make_rng(21);
  const auto det = simulate_renewal(DistributionSpec::deterministic(1.0), RenewalMode::kOrdinary, 3.5, rng);
  REQUIRE(det.size() == 3);
  CHECK(det[0] == 1.0);
  CHECK(det[1] == 2.0);
  CHECK(det[2] == 3.0);

  RunningStats s;
  for (int r = 0; r < 100000; ++r)
    s.push(static_cast<double>(count_events(DistributionSpec::exponential(1.0), RenewalMode::kEquilibrium, 0, 10, rng)));
  CHECK(std::abs(s.mean() - 10.0) < 0.04);

  for (int r = 0; r < 1000; ++r) {
    const auto ev = simulate_renewal(DistributionSpec::deterministic(1.0), RenewalMode::kEquilibrium, 5.0, rng);
    REQUIRE(ev.size() >= 4);
    CHECK(ev[0] > 0.0);
    CHECK(ev[0] <= 1.0);
    for (std::size_t i = 1; i < ev.size(); ++i) CHECK(ev[i] - ev[i - 1] == doctest::Approx(1.0));
  }
}

TEST_CASE("renewal function closed forms") {
  const RenewalSolution e(DistributionSpec::exponential(2.0), 10.0);
  for (double t : {0.0, 0.3, 1.7, 9.9}) CHECK(std::abs(e.m(t) - 2.0 * t) < 1e-6);
  const RenewalSolution d(DistributionSpec::deterministic(1.0), 10.0);
  for (double t : {0.0, 0.5, 0.999, 1.0, 2.5, 7.25}) CHECK(d.m(t) == std::floor(t));
}

TEST_CASE("numeric solver reproduces the closed forms") {
  const RenewalSolution e(DistributionSpec::exponential(1.0), 10.0, 0.0, SolveMethod::kNumeric);
  for (double t : {0.5, 2.0, 9.5}) CHECK(std::abs(e.m(t) - t) < 1e-4);
  for (double t : {0.5, 2.0, 9.5}) CHECK(std::abs(e.f(t)) < 1e-3);
  // Lattice laws only go through exact lattice summation.
  CHECK_THROWS_AS(RenewalSolution(DistributionSpec::deterministic(1.0), 6.0, 0.0, SolveMethod::kNumeric), ConfigError);
  const RenewalSolution d(DistributionSpec::deterministic(1.0), 6.0);
  for (double t : {0.25, 0.5, 2.5}) {
    const double r = t - std::floor(t);
    CHECK(std::abs(d.f(t) - (r - r * r)) < 1e-12);
  }
}

TEST_CASE("Erlang renewal function against Monte Carlo") {
  const DistributionSpec d = DistributionSpec::erlang(2, 2.0);
  const RenewalSolution sol(d, 2.0);
  Rng rng = make_rng(22);
  RunningStats s;
  for (int r = 0; r < 1000000; ++r) s.push(static_cast<double>(count_events(d, RenewalMode::kOrdinary, 0, 1, rng)));
  // m(t) = t - (1 - e^{-4t}) / 4 for Erlang(2, 2).
  CHECK(std::abs(sol.m(1.0) - (1.0 - (1.0 - std::exp(-4.0)) / 4.0)) < 1e-5);
  CHECK(std::abs(sol.m(1.0) - s.mean()) <= 3.0 * s.std_error());
}

TEST_CASE("f examples") {
  const RenewalSolution e(DistributionSpec::exponential(1.0), 20.0);
  for (int i = 0; i <= 200; ++i) CHECK(std::abs(e.f(0.1 * i)) < 1e-3);
  const RenewalSolution d(DistributionSpec::deterministic(1.0), 5.0);
  CHECK(d.f(0.0) == 0.0);
}

TEST_CASE("deterministic equilibrium variance and covariance against Monte Carlo") {
  const DistributionSpec d = DistributionSpec::deterministic(1.0);
  const RenewalSolution sol(d, 5.0);
  Rng rng = make_rng(23);
  const int N = 1000000;
  std::vector<RunningStats> mean(3);
  std::vector<std::vector<double>> counts(3, std::vector<double>(N));
  std::vector<double> c05(N);
  std::vector<double> c15(N);
  const double ts[3] = {0.5, 1.0, 2.5};
  for (int r = 0; r < N; ++r) {
    const auto ev = simulate_renewal(d, RenewalMode::kEquilibrium, 2.5, rng);
    for (int k = 0; k < 3; ++k) counts[k][r] = static_cast<double>(count_upto(ev, ts[k]));
    c05[r] = static_cast<double>(count_upto(ev, 0.5));
    c15[r] = static_cast<double>(count_upto(ev, 1.5));
  }
  for (int k = 0; k < 3; ++k) {
    CAPTURE(ts[k]);
    RunningStats m;
    for (double c : counts[k]) m.push(c);
    RunningStats sq;
    for (double c : counts[k]) sq.push((c - m.mean()) * (c - m.mean()));
    const double model = sol.C1() * ts[k] + sol.f(ts[k]);
    CHECK(sol.variance(ts[k]) == doctest::Approx(model));
    CHECK(std::abs(sq.mean() - model) <= 3.0 * sq.std_error() + 1e-12);
  }
  RunningStats a;
  RunningStats b;
  for (int r = 0; r < N; ++r) {
    a.push(c05[r]);
    b.push(c15[r]);
  }
  RunningStats prod;
  for (int r = 0; r < N; ++r) prod.push((c05[r] - a.mean()) * (c15[r] - b.mean()));
  CHECK(std::abs(sol.cov(0.5, 1.5) - prod.mean()) <= 3.0 * prod.std_error());
  CHECK(equilibrium_cov(d, 0.5, 1.5) == doctest::Approx(0.25).epsilon(1e-3));
}

TEST_CASE("equilibrium covariance identities") {
  const RenewalSolution e(DistributionSpec::exponential(1.5), 10.0);
  for (double s : {0.2, 1.0, 3.0}) {
    CHECK(e.cov(s, s + 2.0) == doctest::Approx(1.5 * s));
    CHECK(e.cov(s, s) == doctest::Approx(e.variance(s)));
  }
}

TEST_CASE("covariance is nonnegative on 50x50 grids for every family") {
  for (const auto& d : families()) {
    CAPTURE(d.name());
    const double mean = moments(d).mean;
    const RenewalSolution sol(d, 10.0 * mean);
    double worst = 0.0;
    for (int i = 1; i <= 50; ++i)
      for (int j = i; j <= 50; ++j) worst = std::min(worst, sol.cov(0.2 * i * mean, 0.2 * j * mean));
    CHECK(worst >= -1e-6);
  }
}

TEST_CASE("Lorden band, f bound and Lipschitz bound") {
  const DistributionSpec A = DistributionSpec::exponential(1.0);
  for (const auto& d : families()) {
    CAPTURE(d.name());
    const Moments m = moments(d);
    const double mu = 1.0 / m.mean;
    const RenewalSolution sol(d, 15.0 * m.mean);
    const RenewalConstants c = renewal_constants(A.scaled(m.mean), d);
    const double tol = 1e-3 * std::max(1.0, mu * mu * m.second_moment);
    const double h = 1e-3 * m.mean;
    double prev_m = -1.0;
    double prev_f = 0.0;
    std::size_t bad = 0;
    for (int k = 0; k <= 15000; ++k) {
      const double t = k * h;
      const double mk = sol.m(t);
      const double fk = sol.f(t);
      bad += mk + 1.0 - mu * t < -tol;
      bad += mk + 1.0 - mu * t > mu * mu * m.second_moment + tol;
      bad += mk < prev_m;
      bad += std::abs(fk) > c.C2 + 1e-6;
      if (k > 0) bad += std::abs(fk - prev_f) > (c.C3 + 1e-6) * h + 1e-12;
      prev_m = mk;
      prev_f = fk;
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("Richardson check by halving the step") {
  CHECK(richardson_gap(DistributionSpec::erlang(2, 2.0), 5.0, 1e-3) < 1e-4);
  CHECK(richardson_gap(DistributionSpec::uniform(0.5, 1.5), 5.0, 1e-3) < 1e-3);
}

TEST_CASE("renewal constants") {
  const DistributionSpec e = DistributionSpec::exponential(1.0);
  const RenewalConstants c = renewal_constants(e, e);
  // E[S^2] = 2 and E[S^3] = 6 for a unit exponential.
  CHECK(c.C1 == doctest::Approx(1.0));
  CHECK(c.C3 == doctest::Approx(2.0));
  CHECK(c.C2 == doctest::Approx(4.0 / 3.0 * 6.0 + 0.25 * 4.0));
  CHECK(c.C4 == doctest::Approx(2.0));
  CHECK(c.eps0 == doctest::Approx(0.69611).epsilon(1e-5));
  CHECK(std::exp(-c.eps0) == doctest::Approx(0.4985).epsilon(1e-4));
  CHECK(std::exp(-c.eps0) < 0.5);
  for (const auto& d : families()) {
    if (d.has_atom_at_zero()) continue;
    const RenewalConstants k = renewal_constants(e.scaled(d.mean()), d);
    CHECK(k.M > 0.0);
    CHECK(k.M * k.C4 * (0.5 - std::exp(-k.eps0)) == doctest::Approx(8.0 * (k.C2 + k.C3 + k.C4)));
  }
}

TEST_CASE("stationary increments of the equilibrium process") {
  const DistributionSpec d = DistributionSpec::uniform(0.5, 1.5);
  Rng rng = make_rng(24);
  const int N = 100000;
  std::map<long, double> fa;
  std::map<long, double> fb;
  for (int r = 0; r < N; ++r) {
    const auto ev = simulate_renewal(d, RenewalMode::kEquilibrium, 4.0, rng);
    fa[static_cast<long>(count_upto(ev, 4.0) - count_upto(ev, 1.5))] += 1.0 / N;
    fb[static_cast<long>(count_upto(ev, 2.5))] += 1.0 / N;
  }
  double ca = 0.0;
  double cb = 0.0;
  double ks = 0.0;
  for (long k = 0; k < 10; ++k) {
    ca += fa[k];
    cb += fb[k];
    ks = std::max(ks, std::abs(ca - cb));
  }
  // Two-sample KS critical value at alpha = 0.001.
  CHECK(ks < 1.95 * std::sqrt(2.0 / N));
}

TEST_CASE("path bundles") {
  const RenewalPathBundle b =
      make_bundle(DistributionSpec::exponential(0.1), DistributionSpec::erlang(2, 2.0), 5, 20.0, 7, 3);
  b.check();
  CHECK(b.servers() == 5);
  for (const auto& s : b.service_events) CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(b.arrivals_in(0.0, 20.0) == b.arrival_events.size());
  const RenewalPathBundle again =
      make_bundle(DistributionSpec::exponential(0.1), DistributionSpec::erlang(2, 2.0), 5, 20.0, 7, 3);
  CHECK(again.arrival_events == b.arrival_events);
  CHECK_THROWS_AS(make_bundle(DistributionSpec::exponential(1.0), DistributionSpec::h2star(0.5, 1.0), 2, 5.0, 1, 0),
                  ConfigError);
}
