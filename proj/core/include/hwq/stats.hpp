#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hwq/rng.hpp"

namespace hwq {

/// A probability estimate with its Monte Carlo uncertainty. The interval is
/// two-sided 95% and clipped to [0, 1].
struct BoundEstimate {
  double point = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t replications = 0;
  std::string note;
};

/// Student-t interval over independent replication means. Throws ConfigError
/// when fewer than two replications are given.
BoundEstimate estimate_from_replications(std::span<const double> values);

/// Wilson score interval for `hits` successes out of `trials` Bernoulli draws.
BoundEstimate estimate_from_indicators(std::size_t hits, std::size_t trials);

/// Wilson interval at an arbitrary two-sided level (used for Bonferroni bounds).
BoundEstimate estimate_from_indicators(std::size_t hits, std::size_t trials, double confidence);

double student_t_quantile(double p, double dof);

class RunningStats {
 public:
  void push(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased
  double std_error() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
double ks_distance(std::vector<double> a, std::vector<double> b);

/// One-sample KS distance against a continuous cdf.
double ks_distance(std::vector<double> a, const std::function<double(double)>& cdf);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct SlopeInterval {
  double slope = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Percentile-bootstrap 95% interval for the least-squares slope of
/// transform(mean of samples[i]) against x[i]. Each samples[i] holds
/// independent replicate values for abscissa x[i]; resampling is done
/// within each abscissa.
SlopeInterval bootstrap_slope(std::span<const double> x,
                              const std::vector<std::vector<double>>& samples,
                              const std::function<double(double)>& transform,
                              std::size_t resamples, Rng& rng);

}  // namespace hwq
