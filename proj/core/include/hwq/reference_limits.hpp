#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>

#include "hwq/stats.hpp"

namespace hwq {

/// (1 + x Phi(x) / phi(x))^-1 for x >= 0; the Halfin-Whitt delay limit.
double alpha(double x);

struct TailPair {
  double upper_tail = 0.0;  // lim P(Q >= n + x sqrt n)
  double lower_tail = 0.0;  // lim P(Q <= n - x sqrt n)
};

/// Limits for GI/H*2 service with atom weight 1 - p at zero (p = 1 is exponential).
TailPair h2star_limits(double B, double x, double p, double cA2, double cS2);

/// P(sup_{i >= 1} S_i >= x) for the Gaussian walk with step mean -B and
/// variance cA2, by Monte Carlo. A path stops once it reaches x, once it has
/// fallen 12 sqrt(cA2) / B below its running maximum (the chance of a later
/// new record is then below exp(-24)), or after max_steps steps.
/// Replications run in batches of 1000 on streams make_rng(seed, {batch}).
BoundEstimate gid_limit_mc(double B, double cA2, double x, std::size_t reps, std::size_t max_steps,
                           std::uint64_t seed, unsigned threads = 0);

/// Phi(B - x): infinite-server lower bound on the idle-tail limit.
double mginf_bound(double B, double x);

struct ScalingConstants {
  double large_B_rate = 0.0;   // lim B^-2 log P(delay)
  double small_B_rate = 0.0;   // lim B^-1 P(no delay)
  double idle_tail_rate = 0.0; // lim x^-2 log P(idle tail)
};

struct H2StarModel {
  double p = 1.0;
  double cA2 = 1.0;
  double cS2 = 1.0;
};

struct DeterministicModel {
  double cA2 = 1.0;
};

using LimitModel = std::variant<H2StarModel, DeterministicModel>;

ScalingConstants scaling_constants(const LimitModel& model);

}  // namespace hwq
