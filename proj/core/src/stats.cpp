#include "hwq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "hwq/errors.hpp"
#include "hwq/normal.hpp"

namespace hwq {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal_quantile: p must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

double student_t_quantile(double p, double dof) {
  return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

BoundEstimate estimate_from_replications(std::span<const double> values) {
  if (values.size() < 2) throw ConfigError("at least two replications are needed for an interval");
  RunningStats rs;
  for (double v : values) rs.push(v);
  BoundEstimate e;
  e.replications = values.size();
  e.point = std::clamp(rs.mean(), 0.0, 1.0);
  e.std_error = rs.std_error();
  const double t = student_t_quantile(0.975, static_cast<double>(values.size() - 1));
  e.ci_low = std::clamp(rs.mean() - t * e.std_error, 0.0, e.point);
  e.ci_high = std::clamp(rs.mean() + t * e.std_error, e.point, 1.0);
  return e;
}

BoundEstimate estimate_from_indicators(std::size_t hits, std::size_t trials) {
  return estimate_from_indicators(hits, trials, 0.95);
}

BoundEstimate estimate_from_indicators(std::size_t hits, std::size_t trials, double confidence) {
  if (trials == 0) throw ConfigError("indicator estimate needs at least one trial");
  if (hits > trials) throw ConfigError("indicator estimate: more hits than trials");
  if (!(confidence > 0.0 && confidence < 1.0)) throw ConfigError("indicator estimate: confidence must lie in (0, 1)");
  BoundEstimate e;
  e.replications = trials;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  e.point = p;
  e.std_error = std::sqrt(p * (1.0 - p) / n);
  const double z = normal_quantile(0.5 + 0.5 * confidence);
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  e.ci_low = std::clamp(centre - half, 0.0, p);
  e.ci_high = std::clamp(centre + half, p, 1.0);
  return e;
}

void RunningStats::push(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

double RunningStats::variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

double RunningStats::std_error() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ConfigError("ks_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_distance(std::vector<double> a, const std::function<double(double)>& F) {
  if (a.empty()) throw ConfigError("ks_distance: empty sample");
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = F(a[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("fit_line: need two or more paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("fit_line: abscissae are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

SlopeInterval bootstrap_slope(std::span<const double> x, const std::vector<std::vector<double>>& samples,
                              const std::function<double(double)>& transform, std::size_t resamples, Rng& rng) {
  if (x.size() != samples.size()) throw ConfigError("bootstrap_slope: size mismatch");
  auto mean_of = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (samples[i].empty()) throw ConfigError("bootstrap_slope: empty sample");
    y[i] = transform(mean_of(samples[i]));
  }
  SlopeInterval out;
  out.slope = fit_line(x, y).slope;

  std::vector<double> slopes;
  slopes.reserve(resamples);
  std::vector<double> draw;
  for (std::size_t r = 0; r < resamples; ++r) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto& s = samples[i];
      std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
      double acc = 0.0;
      for (std::size_t k = 0; k < s.size(); ++k) acc += s[pick(rng)];
      y[i] = transform(acc / static_cast<double>(s.size()));
    }
    const double sl = fit_line(x, y).slope;
    if (std::isfinite(sl)) slopes.push_back(sl);
  }
  if (slopes.empty()) throw InvariantViolation("bootstrap_slope: every resample produced a non-finite slope");
  std::sort(slopes.begin(), slopes.end());
  auto pct = [&](double q) {
    const double pos = q * static_cast<double>(slopes.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, slopes.size() - 1);
    return slopes[lo] + (pos - static_cast<double>(lo)) * (slopes[hi] - slopes[lo]);
  };
  out.ci_low = pct(0.025);
  out.ci_high = pct(0.975);
  return out;
}

}  // namespace hwq
