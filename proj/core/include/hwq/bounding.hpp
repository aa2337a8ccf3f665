#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hwq/distributions.hpp"
#include "hwq/queue_sim.hpp"
#include "hwq/renewal.hpp"
#include "hwq/stats.hpp"

namespace hwq {

/// sup over 0 <= s <= y of A^x(y - s, y) - sum_{i <= z} N_i^x(y - s, y),
/// i.e. the largest netput over trailing windows of (x, x + y]. Always >= 0.
long phi(const RenewalPathBundle& bundle, double x, double y, std::size_t z);

/// Number in system of the modified system whose first eta servers are kept
/// busy by artificial arrivals, started from eta jobs: +1 per arrival, -1 per
/// renewal of streams 1..eta while above eta, otherwise an artificial
/// arrival. At equal times arrivals are applied first.
QueueTrace busy_system_path(const RenewalPathBundle& bundle, std::size_t eta, double horizon);

/// eta + max(1 + phi(gamma, t - gamma, eta),
///           phi(0, gamma, n) + A(gamma, t] - sum_{i <= eta} N_i(gamma, t])
///     + #{i > eta : N_i(gamma, t] = 0}.
long breakdown_bound_value(const RenewalPathBundle& bundle, std::size_t n, std::size_t eta, double gamma, double t);

enum class BoundMode { kSteady, kTransient };

struct BoundQuery {
  std::size_t n = 1;
  double B = 1.0;
  std::optional<double> lambda;  // raw arrival rate, overrides n - B sqrt(n)
  double x = 0.0;                // bound on P(Q > x)
  BoundMode mode = BoundMode::kSteady;
  double t = 0.0;                // transient time
  std::vector<double> delta_grid;  // empty: defaults
  std::vector<std::size_t> eta_grid;  // empty: defaults
  double horizon_T = 0.0;        // 0: adaptive truncation
  std::size_t replications = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct BoundCell {
  double delta = 0.0;
  std::size_t eta = 0;
  BoundEstimate estimate;
};

struct Theorem4Result {
  std::vector<BoundCell> cells;
  std::size_t best = 0;          // index of the minimizing cell
  BoundEstimate minimized;       // point = naive minimum, ci_high = Bonferroni bound
  double bonferroni_ci_high = 1.0;
  double mean_truncation = 0.0;  // average horizon used for the supremum
  std::string note;
};

/// Default grids given the service mean and the truncation cap.
std::vector<double> default_delta_grid(double mean_service, double cap);
std::vector<std::size_t> default_eta_grid(std::size_t n, double B);

/// Hard cap of the steady-state supremum horizon.
double truncation_cap(double B, double mu, double max_delta, double mean_service);

/// Monte Carlo estimate of every (delta, eta) cell of the sample-path bound,
/// all cells sharing the same bundles. Bundle r uses make_bundle(seed, r).
Theorem4Result theorem4_bound(const BoundQuery& query, const DistributionSpec& spec_A,
                              const DistributionSpec& spec_S);

struct DominanceReport {
  std::size_t epochs = 0;
  std::size_t violations = 0;
  std::size_t real_vs_augmented = 0;     // Q(t) > Q_aug(t)
  std::size_t servers_vs_eta = 0;        // Q_n(t) > Q_eta(t) + broken jobs
  std::size_t eta_vs_breakdown = 0;      // Q_eta(t) > Q_breakdown(t)
  bool phase1_matches_phi = true;        // augmented queue at gamma = n + phi(0, gamma, n)
  bool breakdown_within_formula = true;  // DES value <= breakdown_bound_value
};

/// Builds the real queue and the bounding systems on one bundle
/// (horizon = config.horizon, arrivals A / lambda) and counts event epochs
/// where the pathwise orderings fail. Service tapes are extended past the
/// horizon from `extension` when a processing time is needed there.
DominanceReport coupled_dominance_check(const RenewalPathBundle& bundle, const DistributionSpec& service,
                                        double gamma, std::size_t eta, Rng& extension);

/// Convenience form: bundle drawn from (config.seed, replication).
DominanceReport coupled_dominance_check(const HwConfig& config, double gamma, std::size_t eta,
                                        std::uint64_t replication);

}  // namespace hwq
