#include "hwq/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>

#include "hwq/errors.hpp"
#include "hwq/normal.hpp"

namespace hwq {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

double exp_sample(double rate, Rng& rng) { return -std::log(uniform_pos(rng)) / rate; }

double gamma_sample(int shape, double rate, Rng& rng) {
  // Small integer shapes: sum of exponentials keeps streams simple.
  double prod = 0.0;
  for (int i = 0; i < shape; ++i) prod += -std::log(uniform_pos(rng));
  return prod / rate;
}

// Smallest z >= 0 with g(z) <= target for a nonincreasing g, by bisection.
template <class G>
double invert_decreasing(G g, double target, double hi_guess) {
  double lo = 0.0;
  double hi = std::max(hi_guess, 1e-12);
  for (int k = 0; k < 200 && g(hi) > target; ++k) hi *= 2.0;
  for (int k = 0; k < 200 && hi - lo > 1e-9; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

DistributionSpec::DistributionSpec(Family family) : family_(std::move(family)) {
  std::visit(overloaded{
                 [](const Exponential& d) { require(positive_finite(d.rate), "exponential: rate must be > 0"); },
                 [](const Deterministic& d) {
                   require(positive_finite(d.value), "deterministic: value must be > 0");
                 },
                 [](const H2Star& d) {
                   require(std::isfinite(d.p) && d.p > 0.0 && d.p <= 1.0, "h2star: p must lie in (0, 1]");
                   require(positive_finite(d.rate), "h2star: rate must be > 0");
                 },
                 [](const HyperExponential& d) {
                   require(!d.weights.empty() && d.weights.size() == d.rates.size(),
                           "hyperexponential: weights and rates must be nonempty and of equal length");
                   double total = 0.0;
                   for (std::size_t i = 0; i < d.weights.size(); ++i) {
                     require(positive_finite(d.weights[i]), "hyperexponential: weights must be > 0");
                     require(positive_finite(d.rates[i]), "hyperexponential: rates must be > 0");
                     total += d.weights[i];
                   }
                   require(std::abs(total - 1.0) < 1e-9, "hyperexponential: weights must sum to 1");
                 },
                 [](const Erlang& d) {
                   require(d.shape >= 1, "erlang: shape must be >= 1");
                   require(positive_finite(d.rate), "erlang: rate must be > 0");
                 },
                 [](const LogNormal& d) {
                   require(std::isfinite(d.log_mean), "lognormal: log_mean must be finite");
                   require(positive_finite(d.log_sd), "lognormal: log_sd must be > 0");
                 },
                 [](const Uniform& d) {
                   require(std::isfinite(d.lo) && std::isfinite(d.hi) && d.lo >= 0.0 && d.hi > d.lo,
                           "uniform: need 0 <= lo < hi");
                 },
             },
             family_);
}

DistributionSpec DistributionSpec::exponential(double rate) { return DistributionSpec(Exponential{rate}); }
DistributionSpec DistributionSpec::deterministic(double value) { return DistributionSpec(Deterministic{value}); }
DistributionSpec DistributionSpec::h2star(double p, double rate) { return DistributionSpec(H2Star{p, rate}); }
DistributionSpec DistributionSpec::hyperexponential(std::vector<double> weights, std::vector<double> rates) {
  return DistributionSpec(HyperExponential{std::move(weights), std::move(rates)});
}
DistributionSpec DistributionSpec::erlang(int shape, double rate) { return DistributionSpec(Erlang{shape, rate}); }
DistributionSpec DistributionSpec::lognormal(double log_mean, double log_sd) {
  return DistributionSpec(LogNormal{log_mean, log_sd});
}
DistributionSpec DistributionSpec::uniform(double lo, double hi) { return DistributionSpec(Uniform{lo, hi}); }

std::string DistributionSpec::name() const {
  return std::visit(overloaded{
                        [](const Exponential&) { return std::string("exponential"); },
                        [](const Deterministic&) { return std::string("deterministic"); },
                        [](const H2Star&) { return std::string("h2star"); },
                        [](const HyperExponential&) { return std::string("hyperexponential"); },
                        [](const Erlang&) { return std::string("erlang"); },
                        [](const LogNormal&) { return std::string("lognormal"); },
                        [](const Uniform&) { return std::string("uniform"); },
                    },
                    family_);
}

double DistributionSpec::mean() const { return moments(*this).mean; }

DistributionSpec DistributionSpec::scaled(double f) const {
  require(positive_finite(f), "scale factor must be > 0");
  return std::visit(overloaded{
                        [f](const Exponential& d) { return exponential(d.rate / f); },
                        [f](const Deterministic& d) { return deterministic(d.value * f); },
                        [f](const H2Star& d) { return h2star(d.p, d.rate / f); },
                        [f](const HyperExponential& d) {
                          std::vector<double> r = d.rates;
                          for (double& x : r) x /= f;
                          return hyperexponential(d.weights, r);
                        },
                        [f](const Erlang& d) { return erlang(d.shape, d.rate / f); },
                        [f](const LogNormal& d) { return lognormal(d.log_mean + std::log(f), d.log_sd); },
                        [f](const Uniform& d) { return uniform(d.lo * f, d.hi * f); },
                    },
                    family_);
}

bool DistributionSpec::has_atom_at_zero() const {
  if (const auto* h = std::get_if<H2Star>(&family_)) return h->p < 1.0;
  return false;
}

bool DistributionSpec::is_lattice() const { return std::holds_alternative<Deterministic>(family_); }

Moments moments(const DistributionSpec& spec) {
  Moments m;
  std::visit(overloaded{
                 [&](const Exponential& d) {
                   m.mean = 1.0 / d.rate;
                   m.second_moment = 2.0 / (d.rate * d.rate);
                   m.third_moment = 6.0 / (d.rate * d.rate * d.rate);
                 },
                 [&](const Deterministic& d) {
                   m.mean = d.value;
                   m.second_moment = d.value * d.value;
                   m.third_moment = d.value * d.value * d.value;
                 },
                 [&](const H2Star& d) {
                   const double r = d.p * d.rate;
                   m.mean = d.p / r;
                   m.second_moment = d.p * 2.0 / (r * r);
                   m.third_moment = d.p * 6.0 / (r * r * r);
                 },
                 [&](const HyperExponential& d) {
                   for (std::size_t i = 0; i < d.weights.size(); ++i) {
                     const double r = d.rates[i];
                     m.mean += d.weights[i] / r;
                     m.second_moment += d.weights[i] * 2.0 / (r * r);
                     m.third_moment += d.weights[i] * 6.0 / (r * r * r);
                   }
                 },
                 [&](const Erlang& d) {
                   const double k = d.shape;
                   const double r = d.rate;
                   m.mean = k / r;
                   m.second_moment = k * (k + 1.0) / (r * r);
                   m.third_moment = k * (k + 1.0) * (k + 2.0) / (r * r * r);
                 },
                 [&](const LogNormal& d) {
                   const double s2 = d.log_sd * d.log_sd;
                   m.mean = std::exp(d.log_mean + 0.5 * s2);
                   m.second_moment = std::exp(2.0 * d.log_mean + 2.0 * s2);
                   m.third_moment = std::exp(3.0 * d.log_mean + 4.5 * s2);
                 },
                 [&](const Uniform& d) {
                   const double w = d.hi - d.lo;
                   m.mean = 0.5 * (d.lo + d.hi);
                   m.second_moment = (std::pow(d.hi, 3) - std::pow(d.lo, 3)) / (3.0 * w);
                   m.third_moment = (std::pow(d.hi, 4) - std::pow(d.lo, 4)) / (4.0 * w);
                 },
             },
             spec.family());
  m.variance = std::max(0.0, m.second_moment - m.mean * m.mean);
  // Deterministic laws must report exactly zero.
  if (spec.is_lattice()) m.variance = 0.0;
  m.scv = m.variance / (m.mean * m.mean);
  m.third_finite = std::isfinite(m.third_moment);
  return m;
}

double sample(const DistributionSpec& spec, Rng& rng) {
  return std::visit(overloaded{
                        [&](const Exponential& d) { return exp_sample(d.rate, rng); },
                        [&](const Deterministic& d) { return d.value; },
                        [&](const H2Star& d) {
                          if (uniform_pos(rng) > d.p) return 0.0;
                          return exp_sample(d.p * d.rate, rng);
                        },
                        [&](const HyperExponential& d) {
                          double u = uniform_pos(rng);
                          std::size_t i = 0;
                          for (; i + 1 < d.weights.size(); ++i) {
                            if (u <= d.weights[i]) break;
                            u -= d.weights[i];
                          }
                          return exp_sample(d.rates[i], rng);
                        },
                        [&](const Erlang& d) { return gamma_sample(d.shape, d.rate, rng); },
                        [&](const LogNormal& d) {
                          return std::exp(d.log_mean + d.log_sd * standard_normal(rng));
                        },
                        [&](const Uniform& d) { return d.lo + (d.hi - d.lo) * uniform_pos(rng); },
                    },
                    spec.family());
}

double tail(const DistributionSpec& spec, double z) {
  if (z < 0.0) return 1.0;
  return std::visit(overloaded{
                        [&](const Exponential& d) { return std::exp(-d.rate * z); },
                        [&](const Deterministic& d) { return z < d.value ? 1.0 : 0.0; },
                        [&](const H2Star& d) { return d.p * std::exp(-d.p * d.rate * z); },
                        [&](const HyperExponential& d) {
                          double s = 0.0;
                          for (std::size_t i = 0; i < d.weights.size(); ++i) s += d.weights[i] * std::exp(-d.rates[i] * z);
                          return s;
                        },
                        [&](const Erlang& d) {
                          if (z == 0.0) return 1.0;
                          return boost::math::gamma_q(static_cast<double>(d.shape), d.rate * z);
                        },
                        [&](const LogNormal& d) {
                          if (z == 0.0) return 1.0;
                          return normal_ccdf((std::log(z) - d.log_mean) / d.log_sd);
                        },
                        [&](const Uniform& d) {
                          if (z < d.lo) return 1.0;
                          if (z >= d.hi) return 0.0;
                          return (d.hi - z) / (d.hi - d.lo);
                        },
                    },
                    spec.family());
}

double cdf(const DistributionSpec& spec, double z) { return 1.0 - tail(spec, z); }

double integrated_tail(const DistributionSpec& spec, double z) {
  z = std::max(z, 0.0);
  return std::visit(overloaded{
                        [&](const Exponential& d) { return std::exp(-d.rate * z) / d.rate; },
                        [&](const Deterministic& d) { return std::max(d.value - z, 0.0); },
                        [&](const H2Star& d) { return std::exp(-d.p * d.rate * z) / d.rate; },
                        [&](const HyperExponential& d) {
                          double s = 0.0;
                          for (std::size_t i = 0; i < d.weights.size(); ++i)
                            s += d.weights[i] * std::exp(-d.rates[i] * z) / d.rates[i];
                          return s;
                        },
                        [&](const Erlang& d) {
                          // E[(X - z)^+] = r^-1 * sum_{j=1..k} P(Gamma(j, r) > z)
                          double s = 0.0;
                          for (int j = 1; j <= d.shape; ++j)
                            s += z == 0.0 ? 1.0 : boost::math::gamma_q(static_cast<double>(j), d.rate * z);
                          return s / d.rate;
                        },
                        [&](const LogNormal& d) {
                          const double mean = std::exp(d.log_mean + 0.5 * d.log_sd * d.log_sd);
                          if (z == 0.0) return mean;
                          const double lz = std::log(z);
                          const double s = d.log_sd;
                          return mean * normal_cdf((d.log_mean + s * s - lz) / s) -
                                 z * normal_cdf((d.log_mean - lz) / s);
                        },
                        [&](const Uniform& d) {
                          if (z <= d.lo) return (d.lo - z) + 0.5 * (d.hi - d.lo);
                          if (z >= d.hi) return 0.0;
                          return (d.hi - z) * (d.hi - z) / (2.0 * (d.hi - d.lo));
                        },
                    },
                    spec.family());
}

double residual_cdf(const DistributionSpec& spec, double z) {
  if (z <= 0.0) return 0.0;
  const double v = 1.0 - integrated_tail(spec, z) / spec.mean();
  return std::clamp(v, 0.0, 1.0);
}

double quantile(const DistributionSpec& spec, double u) {
  if (!(u > 0.0 && u < 1.0)) throw ConfigError("quantile: level must lie in (0, 1)");
  return std::visit(overloaded{
                        [&](const Exponential& d) { return -std::log1p(-u) / d.rate; },
                        [&](const Deterministic& d) { return d.value; },
                        [&](const H2Star& d) {
                          if (u <= 1.0 - d.p) return 0.0;
                          const double v = (u - (1.0 - d.p)) / d.p;
                          return -std::log1p(-v) / (d.p * d.rate);
                        },
                        [&](const HyperExponential&) {
                          const double mean = spec.mean();
                          return invert_decreasing([&](double z) { return tail(spec, z); }, 1.0 - u, 4.0 * mean);
                        },
                        [&](const Erlang& d) {
                          return boost::math::gamma_p_inv(static_cast<double>(d.shape), u) / d.rate;
                        },
                        [&](const LogNormal& d) { return std::exp(d.log_mean + d.log_sd * normal_quantile(u)); },
                        [&](const Uniform& d) { return d.lo + u * (d.hi - d.lo); },
                    },
                    spec.family());
}

double residual_sample(const DistributionSpec& spec, Rng& rng) {
  return std::visit(
      overloaded{
          [&](const Exponential& d) { return exp_sample(d.rate, rng); },
          [&](const Deterministic& d) { return d.value * uniform_pos(rng); },
          [&](const H2Star& d) { return exp_sample(d.p * d.rate, rng); },
          [&](const HyperExponential& d) {
            // Stationary excess of a hyperexponential: weights proportional to w_i / r_i.
            const double mean = spec.mean();
            double u = uniform_pos(rng) * mean;
            std::size_t i = 0;
            for (; i + 1 < d.weights.size(); ++i) {
              const double wi = d.weights[i] / d.rates[i];
              if (u <= wi) break;
              u -= wi;
            }
            return exp_sample(d.rates[i], rng);
          },
          [&](const Erlang& d) {
            const int j = 1 + static_cast<int>(std::uniform_int_distribution<int>(0, d.shape - 1)(rng));
            return gamma_sample(j, d.rate, rng);
          },
          [&](const auto&) {
            const double mean = spec.mean();
            const double target = (1.0 - uniform_pos(rng)) * mean;  // integrated tail level in [0, mean)
            if (target <= 0.0) return 0.0;
            const double hi = quantile(spec, 0.999999);
            return invert_decreasing([&](double z) { return integrated_tail(spec, z); }, target, hi);
          },
      },
      spec.family());
}

void to_json(nlohmann::json& j, const DistributionSpec& spec) {
  std::visit(overloaded{
                 [&](const Exponential& d) { j = {{"family", "exponential"}, {"rate", d.rate}}; },
                 [&](const Deterministic& d) { j = {{"family", "deterministic"}, {"value", d.value}}; },
                 [&](const H2Star& d) { j = {{"family", "h2star"}, {"p", d.p}, {"rate", d.rate}}; },
                 [&](const HyperExponential& d) {
                   j = {{"family", "hyperexponential"}, {"weights", d.weights}, {"rates", d.rates}};
                 },
                 [&](const Erlang& d) { j = {{"family", "erlang"}, {"shape", d.shape}, {"rate", d.rate}}; },
                 [&](const LogNormal& d) {
                   j = {{"family", "lognormal"}, {"log_mean", d.log_mean}, {"log_sd", d.log_sd}};
                 },
                 [&](const Uniform& d) { j = {{"family", "uniform"}, {"lo", d.lo}, {"hi", d.hi}}; },
             },
             spec.family());
}

namespace {

double number_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ConfigError(std::string("distribution: missing numeric field '") + key + "'");
  return j.at(key).get<double>();
}

std::vector<double> number_list(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw ConfigError(std::string("distribution: missing array field '") + key + "'");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ConfigError(std::string("distribution: non-numeric entry in '") + key + "'");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

DistributionSpec distribution_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
    throw ConfigError("distribution: expected an object with a string 'family'");
  const auto fam = j.at("family").get<std::string>();
  if (fam == "exponential") return DistributionSpec::exponential(number_field(j, "rate"));
  if (fam == "deterministic") return DistributionSpec::deterministic(number_field(j, "value"));
  if (fam == "h2star") return DistributionSpec::h2star(number_field(j, "p"), number_field(j, "rate"));
  if (fam == "hyperexponential")
    return DistributionSpec::hyperexponential(number_list(j, "weights"), number_list(j, "rates"));
  if (fam == "erlang") {
    const double k = number_field(j, "shape");
    if (k != std::floor(k) || k < 1 || k > 1e6) throw ConfigError("erlang: shape must be a positive integer");
    return DistributionSpec::erlang(static_cast<int>(k), number_field(j, "rate"));
  }
  if (fam == "lognormal") return DistributionSpec::lognormal(number_field(j, "log_mean"), number_field(j, "log_sd"));
  if (fam == "uniform") return DistributionSpec::uniform(number_field(j, "lo"), number_field(j, "hi"));
  throw ConfigError("distribution: unknown family '" + fam + "'");
}

}  // namespace hwq
