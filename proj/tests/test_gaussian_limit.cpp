#include <doctest.h>

#include <cmath>
#include <vector>

#include "hwq/errors.hpp"
#include "hwq/gaussian_limit.hpp"
#include "hwq/rng.hpp"
#include "hwq/stats.hpp"

using namespace hwq;

namespace {

const DistributionSpec kExp = DistributionSpec::exponential(1.0);
const DistributionSpec kDet = DistributionSpec::deterministic(1.0);

}  // namespace

TEST_CASE("Z covariance for M/M is Brownian with rate 2") {
  const auto grid = uniform_grid(5.0, 0.5);
  const CovarianceGrid g = build_Z_cov(kExp, kExp, grid);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      CHECK(std::abs(g.cov(i, j) - 2.0 * std::min(grid[i], grid[j])) < 1e-9);
  for (std::size_t j = 0; j < g.size(); ++j) CHECK(g.cov(0, j) == 0.0);
}

TEST_CASE("variance rate of Z at t = 50 E[S]") {
  const std::vector<DistributionSpec> fams{kExp,
                                           kDet,
                                           DistributionSpec::hyperexponential({0.3, 0.7}, {0.5, 3.0}),
                                           DistributionSpec::erlang(2, 2.0),
                                           DistributionSpec::lognormal(-0.125, 0.5),
                                           DistributionSpec::uniform(0.5, 1.5)};
  for (const auto& S : fams) {
    CAPTURE(S.name());
    const double m = S.mean();
    const std::vector<double> grid{0.0, 50.0 * m};
    const CovarianceGrid g = build_Z_cov(kExp.scaled(m), S, grid);
    const double rate = (moments(kExp).scv + moments(S).scv) / m;
    CHECK(g.cov(1, 1) / grid[1] == doctest::Approx(rate).epsilon(0.02));
  }
}

TEST_CASE("sample_Z") {
  const std::vector<double> single{0.0};
  const CovarianceGrid g0 = build_Z_cov(kExp, kExp, single);
  Rng rng = make_rng(41);
  const Eigen::MatrixXd z0 = sample_Z(g0, 1, rng);
  CHECK(z0.rows() == 1);
  CHECK(z0.cols() == 1);
  CHECK(z0(0, 0) == 0.0);

  const auto grid = uniform_grid(3.0, 0.5);
  const CovarianceGrid g = build_Z_cov(kExp, kDet, grid);
  const std::size_t N = 100000;
  const Eigen::MatrixXd z = sample_Z(g, N, rng);
  const auto m = static_cast<Eigen::Index>(g.size());
  for (Eigen::Index i = 1; i < m; ++i)
    for (Eigen::Index j = i; j < m; ++j) {
      const Eigen::ArrayXd prod = z.col(i).array() * z.col(j).array();
      const double mean = prod.mean();
      const double se = std::sqrt((prod - mean).square().sum() / (N - 1) / N);
      CAPTURE(i);
      CAPTURE(j);
      CHECK(std::abs(mean - g.cov(i, j)) <= 4.0 * se);
      CHECK(mean >= -4.0 * se);
    }
  CHECK(z.col(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("limit event against the Brownian supremum law") {
  // M/M: Z is Brownian with variance rate 2, so P(sup (Z(t) - t) >= 2) = exp(-2).
  const auto grid = uniform_grid(12.0, 0.01);
  const CovarianceGrid g = build_Z_cov(kExp, kExp, grid);
  LimitEventQuery q;
  q.B = 1.0;
  q.x = 2.0;
  q.replications = 10000;
  q.seed = 42;
  const BoundEstimate e = estimate_limit_event(q, g, 0.0);
  CHECK(e.point == doctest::Approx(std::exp(-2.0)).epsilon(0.15));

  q.x = 20.0;
  CHECK(estimate_limit_event(q, g, 0.0).point < 1e-3);
}

TEST_CASE("limit event ladders") {
  const auto grid = uniform_grid(10.0, 0.05);
  const CovarianceGrid g = build_Z_cov(kExp, kDet, grid);
  LimitEventQuery q;
  q.B = 1.0;
  q.eta = 10.0;
  q.delta = 1.0;
  q.replications = 4000;
  q.seed = 43;
  const double p_delta = residual_cdf(kDet, 1.0);
  double prev = 2.0;
  for (double x : {0.0, 1.0, 2.0, 4.0}) {
    q.x = x;
    const double v = estimate_limit_event(q, g, p_delta).point;
    CHECK(v <= prev);
    prev = v;
  }
  // Nested grids on common paths: the finer supremum is never smaller.
  q.x = 1.0;
  q.eta = 0.0;
  q.delta = 0.0;
  const double fine = estimate_limit_event(q, g, 0.0).point;
  q.stride = 4;
  const double coarse = estimate_limit_event(q, g, 0.0).point;
  CHECK(fine >= coarse);
}

TEST_CASE("Gaussian supremum bound") {
  // sup (sqrt(2) W(t) - t) >= 1 has probability exp(-2 * 1 * 1 / 2) = exp(-B^2 / 4) at B = 2.
  const double B = 2.0;
  const auto grid = uniform_grid(12.5, 0.005);
  const CovarianceGrid g = build_Z_cov(kExp, kExp, grid);
  const BoundEstimate e = corollary_bound(B, 0.0, g, 1.0, 10000, 44);
  CHECK(e.point == doctest::Approx(std::exp(-B * B / 4.0)).epsilon(0.20));
  CHECK(corollary_bound(B, -B / 2.0, g, 1.0, 1000, 45).point == 1.0);
  CHECK(corollary_bound(B, 0.0, g, 1.0, 2000, 46, 2).point <= corollary_bound(B, 0.0, g, 1.0, 2000, 46).point);
}

TEST_CASE("comparison process covariance") {
  for (const auto& S : {kExp, kDet}) {
    CAPTURE(S.name());
    const RenewalConstants c = renewal_constants(kExp, S);
    const RenewalSolution sol(S, c.M + 60.0);
    for (double s : {c.M + 1.0, c.M + 7.3, c.M + 19.9}) {
      CHECK(W_cov(c, sol, s, s) == doctest::Approx(Z_cov(c, sol, s, s)).epsilon(1e-9));
      CHECK(W_cov(c, sol, s, s + 40.0) < c.C4 * s);
    }
    CHECK_THROWS_AS(W_cov(c, sol, c.M, c.M + 1.0), ConfigError);
  }
}

TEST_CASE("Slepian domination holds for M/M and M/D") {
  for (const auto& S : {kExp, kDet}) {
    CAPTURE(S.name());
    const RenewalConstants c = renewal_constants(kExp, S);
    const auto s_grid = slepian_s_grid(c);
    const auto off = slepian_offsets();
    const SlepianReport r = verify_slepian_domination(kExp, S, s_grid, off);
    CHECK(r.passed);
    CHECK(r.max_variance_gap <= 1e-6);
    CHECK(r.min_margin >= -1e-6);
    const std::vector<double> zero{0.0};
    const SlepianReport diag = verify_slepian_domination(kExp, S, s_grid, zero);
    CHECK(std::abs(diag.min_margin) < 1e-9);
  }
}

TEST_CASE("factorization jitter stays within the cap") {
  const auto grid = uniform_grid(20.0, 0.05);
  const CovarianceGrid g = build_Z_cov(kExp, kDet, grid);
  CHECK(g.jitter <= 1e-8 * g.cov.diagonal().maxCoeff());
}
