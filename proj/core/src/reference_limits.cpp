#include "hwq/reference_limits.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "hwq/errors.hpp"
#include "hwq/normal.hpp"
#include "hwq/parallel.hpp"
#include "hwq/rng.hpp"

namespace hwq {

double alpha(double x) {
  if (!(x >= 0.0)) throw ConfigError("alpha: x must be >= 0");
  return 1.0 / (1.0 + x * normal_cdf(x) / normal_pdf(x));
}

TailPair h2star_limits(double B, double x, double p, double cA2, double cS2) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("h2star_limits: p must be in (0, 1]");
  if (!(B > 0.0)) throw ConfigError("h2star_limits: B must be > 0");
  if (!(x >= 0.0)) throw ConfigError("h2star_limits: x must be >= 0");
  if (!(cA2 >= 0.0 && cS2 >= 0.0 && cA2 + cS2 > 0.0)) throw ConfigError("h2star_limits: need cA2 + cS2 > 0");
  const double z = p * (cA2 + cS2) / 2.0;
  const double b = B / std::sqrt(z);
  const double a = alpha(b);
  TailPair out;
  out.upper_tail = a * std::exp(-B * p * x / z);
  out.lower_tail = (1.0 - a) * normal_cdf((B - x) / std::sqrt(z)) / normal_cdf(b);
  return out;
}

BoundEstimate gid_limit_mc(double B, double cA2, double x, std::size_t reps, std::size_t max_steps,
                           std::uint64_t seed, unsigned threads) {
  if (!(B > 0.0)) throw ConfigError("gid_limit_mc: B must be > 0");
  if (!(cA2 > 0.0)) throw ConfigError("gid_limit_mc: cA2 must be > 0");
  if (!(x >= 0.0)) throw ConfigError("gid_limit_mc: only x >= 0 is supported");
  if (reps < 2 || max_steps < 1) throw ConfigError("gid_limit_mc: need reps >= 2 and max_steps >= 1");
  const double sd = std::sqrt(cA2);
  const double drop = 12.0 * sd / B;
  constexpr std::size_t kBatch = 1000;
  const std::size_t batches = (reps + kBatch - 1) / kBatch;

  struct Tally {
    std::size_t hits = 0;
    std::size_t truncated = 0;
  };
  const auto tallies = parallel_map(batches, threads, [&](std::size_t b) {
    Rng rng = make_rng(seed, {b});
    std::normal_distribution<double> step(-B, sd);
    Tally t;
    const std::size_t count = std::min(kBatch, reps - b * kBatch);
    for (std::size_t r = 0; r < count; ++r) {
      double s = 0.0;
      double best = -INFINITY;
      std::size_t i = 0;
      for (; i < max_steps; ++i) {
        s += step(rng);
        if (s >= x) {
          ++t.hits;
          break;
        }
        best = std::max(best, s);
        if (best - s >= drop) break;
      }
      if (i == max_steps) ++t.truncated;
    }
    return t;
  });
  std::size_t hits = 0;
  std::size_t truncated = 0;
  for (const auto& t : tallies) {
    hits += t.hits;
    truncated += t.truncated;
  }
  BoundEstimate e = estimate_from_indicators(hits, reps);
  if (truncated > 0) e.note = std::to_string(truncated) + " paths stopped at max_steps";
  return e;
}

double mginf_bound(double B, double x) {
  if (!(B > 0.0)) throw ConfigError("mginf_bound: B must be > 0");
  if (!(x >= 0.0)) throw ConfigError("mginf_bound: x must be >= 0");
  return normal_cdf(B - x);
}

ScalingConstants scaling_constants(const LimitModel& model) {
  ScalingConstants c;
  if (const auto* h = std::get_if<H2StarModel>(&model)) {
    if (!(h->p > 0.0 && h->p <= 1.0) || !(h->cA2 >= 0.0 && h->cS2 >= 0.0 && h->cA2 + h->cS2 > 0.0))
      throw ConfigError("scaling_constants: invalid H*2 parameters");
    const double v = h->p * (h->cA2 + h->cS2);
    c.large_B_rate = -1.0 / v;
    c.small_B_rate = std::sqrt(std::numbers::pi / v);
    c.idle_tail_rate = -1.0 / v;
  } else {
    const auto& d = std::get<DeterministicModel>(model);
    if (!(d.cA2 > 0.0)) throw ConfigError("scaling_constants: cA2 must be > 0");
    c.large_B_rate = -1.0 / (2.0 * d.cA2);
    c.small_B_rate = std::sqrt(2.0 / d.cA2);
    c.idle_tail_rate = -1.0 / (2.0 * d.cA2);
  }
  return c;
}

}  // namespace hwq
