#include "hwq/diffusions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

#include "hwq/errors.hpp"
#include "hwq/normal.hpp"

namespace hwq {

double bm_closed_forms(BmLaw law, double a, double b) {
  switch (law) {
    case BmLaw::kSupTail: {
      if (a < 0.0 || b < 0.0) throw ConfigError("sup_tail: need t >= 0 and x >= 0");
      if (b == 0.0) return 1.0;
      if (a == 0.0) return 0.0;
      return 2.0 * normal_ccdf(b / std::sqrt(a));
    }
    case BmLaw::kTwoBarrier:
      if (!(a > 0.0 && b > 0.0)) throw ConfigError("two_barrier: need c1, c2 > 0");
      return b / (a + b);
    case BmLaw::kDriftSup:
      if (!(a > 0.0 && b > 0.0)) throw ConfigError("drift_sup: need c, x > 0");
      return std::exp(-2.0 * a * b);
  }
  throw ConfigError("unknown Brownian law");
}

namespace {

std::size_t grid_points(double step, double T) {
  if (!(step > 0.0) || !(T >= 0.0)) throw ConfigError("diffusion grid: need step > 0 and T >= 0");
  return static_cast<std::size_t>(std::ceil(T / step - 1e-9)) + 1;
}

double norm3(const std::array<double, 3>& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

void add_gaussian3(std::array<double, 3>& v, double sd, Rng& rng) {
  for (double& c : v) c += sd * standard_normal(rng);
}

}  // namespace

DiffusionPath sample_bm(double start, double drift, double step, double T, Rng& rng) {
  DiffusionPath p;
  p.kind = ProcessKind::kBrownian;
  p.step = step;
  const std::size_t m = grid_points(step, T);
  p.values.resize(m);
  p.values[0] = start;
  const double sd = std::sqrt(step);
  for (std::size_t k = 1; k < m; ++k) p.values[k] = p.values[k - 1] + drift * step + sd * standard_normal(rng);
  return p;
}

DiffusionPath sample_ou(double rho, double step, double T, Rng& rng) {
  if (!(rho > 0.0)) throw ConfigError("sample_ou: rho must be > 0");
  DiffusionPath p;
  p.kind = ProcessKind::kOrnsteinUhlenbeck;
  p.step = step;
  const std::size_t m = grid_points(step, T);
  p.values.resize(m);
  const double a = std::exp(-rho * step);
  const double sd = std::sqrt(-std::expm1(-2.0 * rho * step));
  p.values[0] = standard_normal(rng);
  for (std::size_t k = 1; k < m; ++k) p.values[k] = a * p.values[k - 1] + sd * standard_normal(rng);
  return p;
}

DiffusionPath sample_bessel3(double start, double step, double T, Rng& rng) {
  if (start < 0.0) throw ConfigError("sample_bessel3: start must be >= 0");
  DiffusionPath p;
  p.kind = ProcessKind::kBessel3;
  p.step = step;
  const std::size_t m = grid_points(step, T);
  p.values.resize(m);
  std::array<double, 3> v{start, 0.0, 0.0};
  p.values[0] = start;
  const double sd = std::sqrt(step);
  for (std::size_t k = 1; k < m; ++k) {
    add_gaussian3(v, sd, rng);
    p.values[k] = norm3(v);
  }
  return p;
}

HitResult hitting_time(const HitProcess& p, double level, Rng& rng, const HitOptions& opt) {
  if (level == p.start) throw ConfigError("hitting_time: level must differ from the start");
  if (p.kind == ProcessKind::kOrnsteinUhlenbeck) throw ConfigError("hitting_time: Brownian or Bessel3 only");
  if (p.kind == ProcessKind::kBessel3 && (p.start < 0.0 || level < 0.0))
    throw ConfigError("hitting_time: Bessel3 levels must be >= 0");
  const bool up = level > p.start;
  const double L = std::abs(level - p.start);
  const double hmin = opt.min_step > 0.0 ? opt.min_step : 1e-4 * L * L * std::max(1.0, 1.0 / L);
  const double hmax = std::max(opt.max_step, hmin);

  double x = p.start;
  std::array<double, 3> v{p.start, 0.0, 0.0};
  double t = 0.0;
  HitResult r;
  while (t < opt.horizon) {
    double d = up ? level - x : x - level;
    if (opt.lower) d = std::min(d, x - *opt.lower);
    double h = std::clamp(d * d / 100.0, hmin, hmax);
    h = std::min(h, opt.horizon - t);
    if (p.kind == ProcessKind::kBrownian) {
      x += p.drift * h + std::sqrt(h) * standard_normal(rng);
    } else {
      add_gaussian3(v, std::sqrt(h), rng);
      x = norm3(v);
    }
    t += h;
    if (up ? x >= level : x <= level) {
      r.hit = true;
      r.time = t;
      return r;
    }
    if (opt.lower && x <= *opt.lower) {
      r.hit_lower = true;
      r.time = t;
      return r;
    }
    if (opt.give_up && (up ? level - x : x - level) >= *opt.give_up) {
      r.time = t;
      return r;
    }
  }
  r.time = opt.horizon;
  return r;
}

ConditionedHit conditioned_bm_hit_sample(double b, double c, Rng& rng, const HitOptions& opt) {
  if (!(b > 0.0 && b < c)) throw ConfigError("conditioned_bm_hit_sample: need 0 < b < c");
  HitOptions o = opt;
  o.lower = 0.0;
  ConditionedHit out;
  for (;;) {
    ++out.attempts;
    const HitResult r = hitting_time({ProcessKind::kBrownian, b, 0.0}, c, rng, o);
    if (r.hit) {
      out.time = r.time;
      return out;
    }
    if (out.attempts > 100000000) throw InvariantViolation("conditioned_bm_hit_sample: no accepted path");
  }
}

DiffusionPath williams_sample(double b, double step, double T, Rng& rng) {
  if (!(b > 0.0)) throw ConfigError("williams_sample: b must be > 0");
  const std::size_t m = grid_points(step, T);
  DiffusionPath p;
  p.kind = ProcessKind::kBessel3;
  p.step = step;
  p.values.assign(m, 0.0);
  const double U = b * uniform_pos(rng);

  // Segment 1: adaptive steps that land on every grid time and shrink near U,
  // so the crossing is not missed between grid points.
  p.values[0] = b;
  std::size_t k = 1;
  double tau1 = -1.0;
  {
    const double hmin = 1e-4 * (b - U) * (b - U) + 1e-12;
    double x = b;
    double s = 0.0;
    while (k < m) {
      const double next = static_cast<double>(k) * step;
      const double d = x - U;
      const double h = std::min(std::max(d * d / 100.0, hmin), next - s);
      x += std::sqrt(h) * standard_normal(rng);
      s = (h == next - s) ? next : s + h;
      if (x <= U) {
        tau1 = s;
        break;
      }
      if (s == next) p.values[k++] = x;
    }
  }
  if (tau1 < 0.0) return p;

  // Segment 2: a Brownian motion from b run until it reaches U. Only its last
  // (T - tau1) time units are needed, read backwards.
  const double window = T - tau1;
  std::deque<std::pair<double, double>> kept{{0.0, b}};
  double s = 0.0;
  double x = b;
  const double hmin = std::min(step, 1e-4 * (b - U) * (b - U) + 1e-12);
  for (;;) {
    const double d = x - U;
    // Far from U the step grows with the distance; the bridge reads below
    // refine whatever part of the kept window falls between grid points.
    const double h = std::max(d * d / 100.0, hmin);
    x += std::sqrt(h) * standard_normal(rng);
    s += h;
    if (x <= U) x = U;
    kept.emplace_back(s, x);
    while (kept.size() > 2 && kept[1].first < s - window - step) kept.pop_front();
    if (x <= U) break;
    if (s > 1e12) throw InvariantViolation("williams_sample: second segment did not reach U");
  }
  const double tau2 = s;
  std::vector<std::pair<double, double>> seg(kept.begin(), kept.end());

  // Brownian-bridge reads at decreasing times s' = tau1 + tau2 - t.
  std::size_t anchor_idx = seg.size();
  double anchor_s = 0.0;
  double anchor_v = 0.0;
  for (; k < m; ++k) {
    const double t = static_cast<double>(k) * step;
    if (t >= tau1 + tau2) break;
    const double sq = tau1 + tau2 - t;
    auto it = std::lower_bound(seg.begin(), seg.end(), sq, [](const auto& e, double v) { return e.first < v; });
    const auto j = static_cast<std::size_t>(it - seg.begin());
    if (j < seg.size() && seg[j].first == sq) {
      p.values[k] = seg[j].second;
      anchor_idx = j;
      anchor_s = seg[j].first;
      anchor_v = seg[j].second;
      continue;
    }
    if (j == 0) {
      p.values[k] = seg.front().second;
      continue;
    }
    if (anchor_idx != j) {
      anchor_idx = j;
      anchor_s = seg[j].first;
      anchor_v = seg[j].second;
    }
    const double sa = seg[j - 1].first;
    const double va = seg[j - 1].second;
    const double w = (sq - sa) / (anchor_s - sa);
    const double var = (sq - sa) * (anchor_s - sq) / (anchor_s - sa);
    const double val = va + w * (anchor_v - va) + std::sqrt(std::max(var, 0.0)) * standard_normal(rng);
    p.values[k] = val;
    anchor_s = sq;
    anchor_v = val;
  }

  // Segment 3: b plus a Bessel3 started at 0.
  std::array<double, 3> v{0.0, 0.0, 0.0};
  double last = tau1 + tau2;
  for (; k < m; ++k) {
    const double t = static_cast<double>(k) * step;
    add_gaussian3(v, std::sqrt(t - last), rng);
    last = t;
    p.values[k] = b + norm3(v);
  }
  return p;
}

}  // namespace hwq
