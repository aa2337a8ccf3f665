#pragma once

#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hwq/rng.hpp"

namespace hwq {

struct Exponential {
  double rate;
};
struct Deterministic {
  double value;
};
/// Mixture of a point mass at zero (weight 1-p) and Exp(p*rate); mean 1/rate.
struct H2Star {
  double p;
  double rate;
};
struct HyperExponential {
  std::vector<double> weights;
  std::vector<double> rates;
};
struct Erlang {
  int shape;
  double rate;
};
struct LogNormal {
  double log_mean;
  double log_sd;
};
struct Uniform {
  double lo;
  double hi;
};

using Family = std::variant<Exponential, Deterministic, H2Star, HyperExponential, Erlang, LogNormal, Uniform>;

struct Moments {
  double mean = 0.0;
  double second_moment = 0.0;
  double third_moment = 0.0;
  double variance = 0.0;
  double scv = 0.0;
  bool third_finite = true;
};

/// Immutable, validated law of an inter-arrival or service time.
class DistributionSpec {
 public:
  static DistributionSpec exponential(double rate);
  static DistributionSpec deterministic(double value);
  static DistributionSpec h2star(double p, double rate);
  static DistributionSpec hyperexponential(std::vector<double> weights, std::vector<double> rates);
  static DistributionSpec erlang(int shape, double rate);
  static DistributionSpec lognormal(double log_mean, double log_sd);
  static DistributionSpec uniform(double lo, double hi);

  /// Throws ConfigError when parameters are out of range.
  explicit DistributionSpec(Family family);

  const Family& family() const { return family_; }
  std::string name() const;
  double mean() const;

  /// Law of f*X for f > 0.
  DistributionSpec scaled(double factor) const;

  bool has_atom_at_zero() const;
  /// True for Deterministic, whose renewal function is a lattice step function.
  bool is_lattice() const;

 private:
  Family family_;
};

Moments moments(const DistributionSpec& spec);

double sample(const DistributionSpec& spec, Rng& rng);

/// Draw from the residual-life (stationary-excess) law R(X), whose tail is
/// P(R > z) = E[X]^-1 * integral_z^inf P(X > y) dy.
double residual_sample(const DistributionSpec& spec, Rng& rng);

/// P(X > z).
double tail(const DistributionSpec& spec, double z);

/// P(X <= z).
double cdf(const DistributionSpec& spec, double z);

/// integral_z^inf P(X > y) dy, for z >= 0.
double integrated_tail(const DistributionSpec& spec, double z);

/// P(R(X) <= z).
double residual_cdf(const DistributionSpec& spec, double z);

/// Smallest z with P(X <= z) >= u, for u in (0, 1).
double quantile(const DistributionSpec& spec, double u);

void to_json(nlohmann::json& j, const DistributionSpec& spec);
/// Parses {"family": "...", ...}. Throws ConfigError on schema problems.
DistributionSpec distribution_from_json(const nlohmann::json& j);

}  // namespace hwq
