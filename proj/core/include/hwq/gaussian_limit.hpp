#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hwq/distributions.hpp"
#include "hwq/renewal.hpp"
#include "hwq/rng.hpp"
#include "hwq/stats.hpp"

namespace hwq {

/// Zero-mean Gaussian process on grid t_0 = 0 < t_1 < ... < t_m with a
/// lower-triangular factor of the interior block cov[1.., 1..].
struct CovarianceGrid {
  std::vector<double> grid;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd factor;
  double jitter = 0.0;

  std::size_t size() const { return grid.size(); }
};

/// Uniform grid 0, h, 2h, ..., T (T rounded up to a multiple of h).
std::vector<double> uniform_grid(double T, double h);

/// Adds eps * I to the interior block with eps the smallest power of ten
/// (capped at 1e-8 * max diagonal) for which Cholesky succeeds.
void factorize(CovarianceGrid& g);

/// Covariance of Z = A - D: mu c_A^2 min(s, t) + V[N^e(s), N^e(t)].
CovarianceGrid build_Z_cov(const DistributionSpec& spec_A, const DistributionSpec& spec_S,
                           std::span<const double> grid);
CovarianceGrid build_Z_cov(const DistributionSpec& spec_A, const RenewalSolution& service,
                           std::span<const double> grid);

/// reps x (m + 1) matrix of paths; column 0 is identically zero.
Eigen::MatrixXd sample_Z(const CovarianceGrid& g, std::size_t reps, Rng& rng);

struct LimitEventQuery {
  double B = 1.0;
  double x = 0.0;
  double delta = 0.0;
  double eta = 0.0;
  double mu = 1.0;
  std::size_t replications = 10000;
  std::uint64_t seed = 0;
  /// Evaluate the event on every stride-th grid point only.
  std::size_t stride = 1;
};

/// Indicator of
///   max(sup_{t <= delta} (Z(t) + (eta - B) mu t), sup_{delta <= t <= T} (Z(t) - B mu t) + eta mu delta)
///     >= x + eta * p_delta
/// on the grid points of one path (T = last grid point). p_delta = P(R(S) <= delta).
bool limit_event(std::span<const double> grid, const double* path, const LimitEventQuery& q, double p_delta);

/// Monte Carlo probability of the limit event on the discrete grid; the
/// discrete supremum under-covers the continuous one.
BoundEstimate estimate_limit_event(const LimitEventQuery& q, const CovarianceGrid& g, double p_delta);

/// P(sup_{t <= T} (Z(t) - (B/2) mu t) >= x + B/2) on the grid. A stride > 1
/// evaluates the same paths on every stride-th point only.
BoundEstimate corollary_bound(double B, double x, const CovarianceGrid& g, double mu, std::size_t reps,
                              std::uint64_t seed, std::size_t stride = 1);

/// Covariance of the comparison process W at s <= t (s >= M + 1).
double W_cov(const RenewalConstants& c, const RenewalSolution& service, double s, double t);
/// V[Z(s), Z(t)] = C4 min(s, t) + (f(s) + f(t) - f(|t - s|)) / 2.
double Z_cov(const RenewalConstants& c, const RenewalSolution& service, double s, double t);

struct SlepianReport {
  double max_variance_gap = 0.0;  // max |V[W(s)] - V[Z(s)]| / V[Z(s)]
  double min_margin = 0.0;        // min V[Z(s),Z(t)] - V[W(s),W(t)]
  double worst_s = 0.0;
  double worst_t = 0.0;
  std::size_t points = 0;
  bool passed = false;
};

/// Default check grid: s in [M+1, M+20] and offsets t - s in [0, 20] that
/// include values on both sides of eps0 / M.
std::vector<double> slepian_s_grid(const RenewalConstants& c);
std::vector<double> slepian_offsets();

SlepianReport verify_slepian_domination(const DistributionSpec& spec_A, const DistributionSpec& spec_S,
                                        std::span<const double> s_grid, std::span<const double> offsets);

}  // namespace hwq
