#include <doctest.h>

#include <cmath>
#include <vector>

#include "hwq/errors.hpp"
#include "hwq/normal.hpp"
#include "hwq/rng.hpp"
#include "hwq/stats.hpp"
#include "phi_reference.hpp"

using namespace hwq;

TEST_CASE("normal cdf matches the high-precision reference table") {
  for (const auto& r : hwq_test::kPhiReference) {
    CAPTURE(r.x);
    CHECK(std::abs(normal_cdf(r.x) - r.cdf) < 1e-10);
    CHECK(std::abs(normal_ccdf(-r.x) - r.cdf) < 1e-10);
  }
}

TEST_CASE("normal quantile inverts the cdf") {
  for (double p : {1e-9, 0.001, 0.025, 0.3, 0.5, 0.8, 0.975, 0.999999}) {
    CAPTURE(p);
    CHECK(std::abs(normal_cdf(normal_quantile(p)) - p) < 1e-12 * std::max(1.0, 1.0 / p) + 1e-15);
  }
  CHECK(std::abs(normal_quantile(0.975) - 1.959963984540054) < 1e-12);
}

TEST_CASE("student t quantile") {
  CHECK(std::abs(student_t_quantile(0.975, 9) - 2.262157162740992) < 1e-9);
  CHECK(std::abs(student_t_quantile(0.975, 1e6) - 1.96) < 1e-3);
}

TEST_CASE("wilson interval") {
  const BoundEstimate e = estimate_from_indicators(50, 100);
  CHECK(e.point == doctest::Approx(0.5));
  // Closed form: (p + z^2/2n +- z sqrt(p(1-p)/n + z^2/4n^2)) / (1 + z^2/n)
  const double z = 1.959963984540054;
  const double n = 100.0;
  const double c = (0.5 + z * z / (2 * n)) / (1 + z * z / n);
  const double h = z * std::sqrt(0.25 / n + z * z / (4 * n * n)) / (1 + z * z / n);
  CHECK(e.ci_low == doctest::Approx(c - h).epsilon(1e-12));
  CHECK(e.ci_high == doctest::Approx(c + h).epsilon(1e-12));
  const BoundEstimate zero = estimate_from_indicators(0, 1000);
  CHECK(zero.ci_low == 0.0);
  CHECK(zero.ci_high > 0.0);
  CHECK(zero.ci_high < 0.01);
  CHECK_THROWS_AS(estimate_from_indicators(3, 2), ConfigError);
}

TEST_CASE("replication t-interval is ordered and clipped") {
  const std::vector<double> v{0.2, 0.22, 0.19, 0.21, 0.18};
  const BoundEstimate e = estimate_from_replications(v);
  CHECK(e.point == doctest::Approx(0.2));
  CHECK(e.std_error == doctest::Approx(std::sqrt(0.00025 / 5.0)));
  CHECK(e.ci_low <= e.point);
  CHECK(e.point <= e.ci_high);
  const std::vector<double> tiny{0.0, 0.0, 0.001};
  const BoundEstimate t = estimate_from_replications(tiny);
  CHECK(t.ci_low == 0.0);
  const std::vector<double> one{0.5};
  CHECK_THROWS_AS(estimate_from_replications(one), ConfigError);
}

TEST_CASE("running stats") {
  RunningStats s;
  for (double x : {1.0, 2.0, 3.0, 4.0}) s.push(x);
  CHECK(s.mean() == doctest::Approx(2.5));
  CHECK(s.variance() == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("ks distance") {
  CHECK(ks_distance(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == doctest::Approx(0.0));
  CHECK(ks_distance(std::vector<double>{1, 2}, std::vector<double>{3, 4}) == doctest::Approx(1.0));
  CHECK(ks_distance(std::vector<double>{0.5}, [](double x) { return std::clamp(x, 0.0, 1.0); }) ==
        doctest::Approx(0.5));
}

TEST_CASE("line fit and bootstrap slope") {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{3, 5, 7, 9};
  const LineFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));

  Rng rng = make_rng(3);
  std::vector<std::vector<double>> samples;
  for (double xi : x) {
    std::vector<double> s;
    for (int k = 0; k < 50; ++k) s.push_back(std::exp(-xi) * (1.0 + 0.01 * standard_normal(rng)));
    samples.push_back(s);
  }
  const SlopeInterval si = bootstrap_slope(x, samples, [](double p) { return std::log(p); }, 500, rng);
  CHECK(si.slope == doctest::Approx(-1.0).epsilon(0.01));
  CHECK(si.ci_low < si.slope);
  CHECK(si.ci_high > si.slope);
  CHECK(si.ci_high < 0.0);
}
