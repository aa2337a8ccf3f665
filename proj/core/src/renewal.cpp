#include "hwq/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hwq/errors.hpp"

namespace hwq {

std::vector<double> simulate_renewal(const DistributionSpec& spec, RenewalMode mode, double horizon, Rng& rng) {
  if (!(horizon > 0.0)) throw ConfigError("simulate_renewal: horizon must be > 0");
  std::vector<double> out;
  double t = mode == RenewalMode::kEquilibrium ? residual_sample(spec, rng) : sample(spec, rng);
  while (t <= horizon) {
    out.push_back(t);
    t += sample(spec, rng);
  }
  return out;
}

std::size_t count_upto(std::span<const double> events, double t) {
  return static_cast<std::size_t>(std::upper_bound(events.begin(), events.end(), t) - events.begin());
}

std::size_t RenewalPathBundle::arrivals_in(double a, double b) const {
  if (b <= a) return 0;
  return count_upto(arrival_events, b) - count_upto(arrival_events, a);
}

std::size_t RenewalPathBundle::services_in(std::size_t i, double a, double b) const {
  if (b <= a) return 0;
  const auto& s = service_events.at(i);
  return count_upto(s, b) - count_upto(s, a);
}

void RenewalPathBundle::check() const {
  auto check_stream = [&](const std::vector<double>& v, const char* what) {
    double prev = 0.0;
    for (double t : v) {
      if (!(t > prev) || t > horizon)
        throw InvariantViolation(std::string("bundle: ") + what + " stream is not strictly increasing in (0, horizon]");
      prev = t;
    }
  };
  check_stream(arrival_events, "arrival");
  for (const auto& s : service_events) check_stream(s, "service");
}

RenewalPathBundle make_bundle(const DistributionSpec& arrival, const DistributionSpec& service, std::size_t n,
                              double horizon, std::uint64_t seed, std::uint64_t replication, RenewalMode mode) {
  if (arrival.has_atom_at_zero() || service.has_atom_at_zero())
    throw ConfigError("make_bundle: laws with an atom at zero produce simultaneous renewals");
  RenewalPathBundle b;
  b.horizon = horizon;
  b.mode = mode;
  Rng ra = make_rng(seed, {replication, 0});
  b.arrival_events = simulate_renewal(arrival, mode, horizon, ra);
  b.service_events.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rs = make_rng(seed, {replication, i + 1});
    b.service_events[i] = simulate_renewal(service, mode, horizon, rs);
  }
  return b;
}

RenewalConstants renewal_constants(const DistributionSpec& arrival, const DistributionSpec& service) {
  const Moments a = moments(arrival);
  const Moments s = moments(service);
  if (!s.third_finite) throw ConfigError("renewal_constants: service law needs a finite third moment");
  RenewalConstants c;
  c.mu = 1.0 / s.mean;
  const double mu = c.mu;
  c.C1 = mu * s.scv;
  c.C2 = 4.0 / 3.0 * std::pow(mu, 3) * s.third_moment + 0.25 * std::pow(mu, 4) * s.second_moment * s.second_moment;
  c.C3 = std::pow(mu, 3) * s.second_moment;
  c.C4 = mu * a.scv + c.C1;
  if (!(c.C4 > 0.0)) throw InfeasibleError("renewal_constants: c_A^2 + c_S^2 must be positive");
  c.eps0 = 1.0 / (2.0 * (std::numbers::e - 2.0));
  c.M = 8.0 * (c.C2 + c.C3 + c.C4) / (c.C4 * (0.5 - std::exp(-c.eps0)));
  return c;
}

RenewalSolution::RenewalSolution(const DistributionSpec& spec, double t_max, double step, SolveMethod method)
    : spec_(spec), t_max_(t_max), step_(step) {
  const Moments mom = moments(spec);
  mu_ = 1.0 / mom.mean;
  scv_ = mom.scv;
  if (!(t_max > 0.0)) throw ConfigError("renewal solver: t_max must be > 0");
  if (step_ <= 0.0) step_ = 1e-3 * mom.mean;

  const bool exact_available = std::holds_alternative<Exponential>(spec.family()) || spec.is_lattice();
  if (method == SolveMethod::kAuto && exact_available) {
    closed_ = true;
    return;
  }
  if (spec.is_lattice())
    throw ConfigError("renewal solver: deterministic laws are handled by exact lattice summation only");

  const auto N = static_cast<std::size_t>(std::ceil(t_max / step_ - 1e-9));
  t_max_ = static_cast<double>(N) * step_;
  const double h = step_;

  std::vector<double> F(N + 1), dF(N + 1, 0.0);
  for (std::size_t k = 0; k <= N; ++k) F[k] = cdf(spec, static_cast<double>(k) * h);
  for (std::size_t k = 1; k <= N; ++k) dF[k] = F[k] - F[k - 1];

  // Trapezoidal discretization of m = F + m * F, keeping the atom F(0).
  m_.assign(N + 1, 0.0);
  m_[0] = F[0] / (1.0 - F[0]);
  const double denom = 1.0 - F[0] - (N >= 1 ? 0.5 * dF[1] : 0.0);
  for (std::size_t k = 1; k <= N; ++k) {
    double acc = F[k] + 0.5 * m_[k - 1] * dF[1];
    const double* mk = m_.data() + k;
    for (std::size_t j = 2; j <= k; ++j) acc += 0.5 * (mk[-static_cast<std::ptrdiff_t>(j)] + mk[1 - static_cast<std::ptrdiff_t>(j)]) * dF[j];
    m_[k] = acc / denom;
  }

  const double band_hi = mu_ * mu_ * mom.second_moment;
  const double tol = 1e-3 * std::max(1.0, band_hi);
  f_.assign(N + 1, 0.0);
  const double level = 0.5 * (1.0 + scv_);
  auto g = [&](std::size_t k) { return m_[k] + 1.0 - mu_ * static_cast<double>(k) * h; };
  for (std::size_t k = 0; k <= N; ++k) {
    const double gk = g(k);
    if (gk < -tol || gk > band_hi + tol)
      throw InvariantViolation("renewal solver: Lorden band violated at t=" + std::to_string(static_cast<double>(k) * h) +
                               " (step too coarse)");
    if (k > 0 && m_[k] < m_[k - 1] - 1e-12) throw InvariantViolation("renewal solver: m(t) is not monotone");
    if (k > 0) f_[k] = f_[k - 1] + mu_ * h * (g(k - 1) + g(k) - 2.0 * level);
  }

  const double C2 = 4.0 / 3.0 * std::pow(mu_, 3) * mom.third_moment + 0.25 * std::pow(mu_, 4) * mom.second_moment * mom.second_moment;
  const double C3 = std::pow(mu_, 3) * mom.second_moment;
  for (std::size_t k = 0; k <= N; ++k) {
    if (std::abs(f_[k]) > C2 + tol) throw InvariantViolation("renewal solver: |f| exceeds C2");
    if (k > 0 && std::abs(f_[k] - f_[k - 1]) > (C3 + tol) * h)
      throw InvariantViolation("renewal solver: f violates its Lipschitz bound");
  }
  extrapolate_ok_ = 2.0 * mu_ * std::abs(g(N) - level) < 1e-6;
}

double RenewalSolution::interp(const std::vector<double>& v, double t) const {
  const double pos = t / step_;
  const auto k = static_cast<std::size_t>(std::floor(pos));
  if (k + 1 >= v.size()) return v.back();
  const double w = pos - static_cast<double>(k);
  return (1.0 - w) * v[k] + w * v[k + 1];
}

double RenewalSolution::m(double t) const {
  if (t < 0.0) return 0.0;
  if (closed_) {
    if (spec_.is_lattice()) return std::floor(t * mu_ + 1e-12);
    return mu_ * t;
  }
  if (t > t_max_ + 1e-12) {
    if (!extrapolate_ok_) throw ConfigError("renewal solver: t beyond the solved range");
    return mu_ * t + 0.5 * (1.0 + scv_) - 1.0;
  }
  return interp(m_, t);
}

double RenewalSolution::f(double t) const {
  if (t <= 0.0) return 0.0;
  if (closed_) {
    if (!spec_.is_lattice()) return 0.0;
    const double u = t * mu_;
    double r = u - std::floor(u);
    if (r < 1e-12 || r > 1.0 - 1e-12) r = 0.0;
    return r - r * r;
  }
  if (t > t_max_ + 1e-12) {
    if (!extrapolate_ok_)
      throw ConfigError("renewal solver: t=" + std::to_string(t) + " beyond the solved range and f has not settled");
    return f_.back();
  }
  return interp(f_, t);
}

double RenewalSolution::variance(double t) const { return C1() * std::max(t, 0.0) + f(t); }

double RenewalSolution::cov(double s, double t) const {
  if (s > t) std::swap(s, t);
  if (s < 0.0) throw ConfigError("equilibrium covariance: times must be >= 0");
  const double v = C1() * s + 0.5 * (f(s) + f(t) - f(t - s));
  if (v < -1e-6)
    throw InvariantViolation("equilibrium covariance negative at (" + std::to_string(s) + ", " + std::to_string(t) + ")");
  return v;
}

std::vector<double> renewal_function(const DistributionSpec& spec, std::span<const double> t_grid, double step) {
  if (t_grid.empty()) return {};
  const double t_max = std::max(*std::max_element(t_grid.begin(), t_grid.end()), 1e-9);
  const RenewalSolution sol(spec, t_max, step);
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) out.push_back(sol.m(t));
  return out;
}

std::vector<double> f_function(const DistributionSpec& spec, std::span<const double> t_grid, double step) {
  if (t_grid.empty()) return {};
  const double t_max = std::max(*std::max_element(t_grid.begin(), t_grid.end()), 1e-9);
  const RenewalSolution sol(spec, t_max, step);
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) out.push_back(sol.f(t));
  return out;
}

double equilibrium_cov(const DistributionSpec& spec, double s, double t) {
  const RenewalSolution sol(spec, std::max({s, t, 1e-9}));
  return sol.cov(s, t);
}

double richardson_gap(const DistributionSpec& spec, double t_max, double step) {
  const RenewalSolution coarse(spec, t_max, step, SolveMethod::kNumeric);
  const RenewalSolution fine(spec, t_max, 0.5 * step, SolveMethod::kNumeric);
  double gap = 0.0;
  const auto& fc = coarse.f_grid();
  const auto& ff = fine.f_grid();
  for (std::size_t k = 0; k < fc.size() && 2 * k < ff.size(); ++k) gap = std::max(gap, std::abs(fc[k] - ff[2 * k]));
  return gap;
}

}  // namespace hwq
