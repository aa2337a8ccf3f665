#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hwq/distributions.hpp"
#include "hwq/rng.hpp"

namespace hwq {

enum class RenewalMode { kEquilibrium, kOrdinary };

/// Event times of a renewal process on (0, horizon]. The first interval is a
/// residual-life draw in equilibrium mode and an ordinary draw otherwise.
std::vector<double> simulate_renewal(const DistributionSpec& spec, RenewalMode mode, double horizon, Rng& rng);

/// Number of events <= t in a sorted event list.
std::size_t count_upto(std::span<const double> events, double t);

/// One realization of the arrival process and n service renewal processes on
/// a shared horizon.
struct RenewalPathBundle {
  double horizon = 0.0;
  RenewalMode mode = RenewalMode::kEquilibrium;
  std::vector<double> arrival_events;
  std::vector<std::vector<double>> service_events;

  std::size_t servers() const { return service_events.size(); }
  /// A(a, b]: arrivals in the half-open window.
  std::size_t arrivals_in(double a, double b) const;
  /// N_i(a, b] for stream i (0-based).
  std::size_t services_in(std::size_t i, double a, double b) const;
  /// Throws InvariantViolation if any stream is not strictly increasing in (0, horizon].
  void check() const;
};

/// Arrival law `arrival` is used as given (callers pass A / lambda). The
/// arrival stream uses rng path {0}, service stream i uses {i + 1}.
RenewalPathBundle make_bundle(const DistributionSpec& arrival, const DistributionSpec& service, std::size_t n,
                              double horizon, std::uint64_t seed, std::uint64_t replication,
                              RenewalMode mode = RenewalMode::kEquilibrium);

struct RenewalConstants {
  double mu = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  double C4 = 0.0;
  double eps0 = 0.0;
  double M = 0.0;
};

RenewalConstants renewal_constants(const DistributionSpec& arrival, const DistributionSpec& service);

enum class SolveMethod { kAuto, kNumeric };

/// Renewal function m(t) = E[N^o(t)] and the variance offset
/// f(t) = 2 mu int_0^t ((m(s) + 1 - mu s) - (1 + c^2)/2) ds on [0, t_max].
///
/// kAuto uses the exact forms for exponential (m = mu t, f = 0) and
/// deterministic (m = floor(t/c), f = r - r^2, r = frac(t/c)) laws and the
/// trapezoidal renewal-equation solver otherwise. Past t_max, f is held at
/// its last value, which is only allowed when the integrand has settled
/// below 1e-6; otherwise evaluation throws.
class RenewalSolution {
 public:
  RenewalSolution(const DistributionSpec& spec, double t_max, double step = 0.0,
                  SolveMethod method = SolveMethod::kAuto);

  double m(double t) const;
  double f(double t) const;
  /// V[N^e(t)] = C1 t + f(t).
  double variance(double t) const;
  /// V[N^e(s), N^e(t)] = C1 min + (f(s) + f(t) - f(|t - s|)) / 2.
  double cov(double s, double t) const;

  double step() const { return step_; }
  double t_max() const { return t_max_; }
  bool closed_form() const { return closed_; }
  double mu() const { return mu_; }
  double C1() const { return mu_ * scv_; }
  const std::vector<double>& m_grid() const { return m_; }
  const std::vector<double>& f_grid() const { return f_; }
  const DistributionSpec& spec() const { return spec_; }

 private:
  double interp(const std::vector<double>& v, double t) const;

  DistributionSpec spec_;
  double t_max_;
  double step_;
  double mu_;
  double scv_;
  bool closed_ = false;
  bool extrapolate_ok_ = false;
  std::vector<double> m_;
  std::vector<double> f_;
};

/// m on the requested grid points (solver step defaults to 1e-3 * mean).
std::vector<double> renewal_function(const DistributionSpec& spec, std::span<const double> t_grid, double step = 0.0);
std::vector<double> f_function(const DistributionSpec& spec, std::span<const double> t_grid, double step = 0.0);
double equilibrium_cov(const DistributionSpec& spec, double s, double t);

/// Largest |f_h - f_{h/2}| over the grid points shared by the two solves.
double richardson_gap(const DistributionSpec& spec, double t_max, double step);

}  // namespace hwq
