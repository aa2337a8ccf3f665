#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hwq/distributions.hpp"
#include "hwq/rng.hpp"
#include "hwq/stats.hpp"

namespace hwq {

/// lambda_{n,B} = n - B sqrt(n). Throws InfeasibleError when the result is not positive.
double hw_rate(std::size_t n, double B);

struct HwConfig {
  std::size_t n = 1;
  double B = 1.0;
  DistributionSpec spec_A = DistributionSpec::exponential(1.0);
  DistributionSpec spec_S = DistributionSpec::exponential(1.0);
  double horizon = 1000.0;
  /// Negative selects the default 50 E[S] max(1, B^-2).
  double warmup = -1.0;
  std::size_t replications = 10;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  /// Admit service laws with an atom at zero (such jobs leave on arrival).
  bool allow_zero_service = false;
  /// Raw arrival rate; replaces lambda_{n,B} when set.
  std::optional<double> lambda;
  /// Test hook: no arrivals at all.
  bool disable_arrivals = false;

  double arrival_rate() const;
  double effective_warmup() const;
  /// Law of inter-arrival times, A / lambda.
  DistributionSpec arrival_law() const;
};

/// Checks the model assumptions: positive lambda, matched means of A and S,
/// c_A^2 + c_S^2 > 0, no atom at zero (unless overridden for S), rho < 1.
/// Throws InfeasibleError or ConfigError.
void validate_config(const HwConfig& config);

/// Right-continuous step function of the number in system.
struct QueueTrace {
  std::vector<double> times;
  std::vector<long> q;
  std::vector<long> busy;
  std::size_t real_arrivals = 0;
  std::size_t artificial_arrivals = 0;

  long value_at(double t) const;
};

/// FCFS n-server simulation on [0, horizon]. Every server starts busy with a
/// residual service time; the first arrival comes after a residual
/// inter-arrival time. Free servers are taken lowest index first and
/// departures precede arrivals at equal times.
QueueTrace simulate_queue(const HwConfig& config, Rng& rng);

struct QueueEstimates {
  BoundEstimate delay;                 // P(Q >= n)
  BoundEstimate no_delay;              // P(Q < n)
  std::vector<BoundEstimate> idle;     // P(Q <= n - x sqrt(n)) per requested x
  std::vector<BoundEstimate> upper;    // P(Q >= n + x sqrt(n)) per requested x
  std::vector<double> delay_samples;   // one time average per replication
};

/// Time averages over [warmup, horizon], one value per replication.
QueueEstimates estimate_queue(const HwConfig& config, std::span<const double> idle_x = {},
                              std::span<const double> upper_x = {});
BoundEstimate estimate_delay_prob(const HwConfig& config);
BoundEstimate estimate_idle_tail(const HwConfig& config, double x);

/// Exact M/M/n probability of delay.
double erlang_c(std::size_t n, double lambda, double mu);

}  // namespace hwq
