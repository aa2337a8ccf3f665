#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hwq/rng.hpp"

namespace hwq {

enum class BmLaw { kSupTail, kTwoBarrier, kDriftSup };

/// kSupTail(t, x):     P(sup_{s <= t} B(s) > x) = 2 Phi^c(x / sqrt t)
/// kTwoBarrier(c1, c2): P(B hits c1 before -c2)   = c2 / (c1 + c2)
/// kDriftSup(c, x):    P(sup_t (B(t) - c t) > x)  = exp(-2 c x)
double bm_closed_forms(BmLaw law, double a, double b);

enum class ProcessKind { kBrownian, kOrnsteinUhlenbeck, kBessel3 };

struct DiffusionPath {
  ProcessKind kind = ProcessKind::kBrownian;
  double step = 0.0;
  std::vector<double> values;  // values[k] at time k * step
};

DiffusionPath sample_bm(double start, double drift, double step, double T, Rng& rng);
/// Stationary OU with correlation exp(-rho |t - s|), exact AR(1) transition.
DiffusionPath sample_ou(double rho, double step, double T, Rng& rng);
/// Norm of a 3-D Brownian motion started at (start, 0, 0); exact at grid points.
DiffusionPath sample_bessel3(double start, double step, double T, Rng& rng);

struct HitOptions {
  /// Smallest step; 0 selects 1e-4 * level^2 * max(1, 1 / level) from the
  /// distance between start and level.
  double min_step = 0.0;
  double max_step = 1.0;
  double horizon = 1e12;
  /// Absorbing lower barrier (Brownian motion only).
  std::optional<double> lower;
  /// Give up once this far below the level (for negative drift).
  std::optional<double> give_up;
};

struct HitResult {
  bool hit = false;        // reached `level`
  bool hit_lower = false;  // reached the lower barrier first
  double time = 0.0;       // crossing time on the grid, or the stopping time
};

struct HitProcess {
  ProcessKind kind = ProcessKind::kBrownian;  // Brownian or Bessel3
  double start = 0.0;
  double drift = 0.0;
};

/// First grid crossing of `level` (upward when level > start, downward
/// otherwise). Steps are (distance / 10)^2 clamped to [min_step, max_step], so
/// the crossing is resolved on the fine grid; the grid crossing is never
/// earlier than the true one.
HitResult hitting_time(const HitProcess& p, double level, Rng& rng, const HitOptions& opt = {});

struct ConditionedHit {
  double time = 0.0;
  std::size_t attempts = 0;
};

/// Hitting time of c by Brownian motion from b, given that c is hit before
/// 0, by rejection.
ConditionedHit conditioned_bm_hit_sample(double b, double c, Rng& rng, const HitOptions& opt = {});

/// Path on [0, T] (grid `step`) glued from a Brownian motion from b run to a
/// uniform level U in [0, b], a second Brownian motion from b run to U and
/// reversed in time, then b plus a Bessel3 started at 0.
DiffusionPath williams_sample(double b, double step, double T, Rng& rng);

}  // namespace hwq
