#include "hwq/gaussian_limit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hwq/errors.hpp"
#include "hwq/parallel.hpp"

namespace hwq {

std::vector<double> uniform_grid(double T, double h) {
  if (!(h > 0.0) || !(T >= 0.0)) throw ConfigError("uniform_grid: need h > 0 and T >= 0");
  const auto m = static_cast<std::size_t>(std::ceil(T / h - 1e-9));
  std::vector<double> g(m + 1);
  for (std::size_t k = 0; k <= m; ++k) g[k] = static_cast<double>(k) * h;
  return g;
}

void factorize(CovarianceGrid& g) {
  const Eigen::Index m = static_cast<Eigen::Index>(g.grid.size()) - 1;
  g.jitter = 0.0;
  if (m <= 0) {
    g.factor.resize(0, 0);
    return;
  }
  const Eigen::MatrixXd inner = g.cov.bottomRightCorner(m, m);
  const double maxdiag = inner.diagonal().maxCoeff();
  const double cap = 1e-8 * std::max(maxdiag, 0.0);
  double eps = 0.0;
  for (;;) {
    Eigen::LLT<Eigen::MatrixXd> llt(inner + eps * Eigen::MatrixXd::Identity(m, m));
    if (llt.info() == Eigen::Success) {
      g.factor = llt.matrixL();
      g.jitter = eps;
      return;
    }
    const double next = eps == 0.0 ? std::pow(10.0, std::floor(std::log10(std::max(maxdiag, 1e-300))) - 16.0) : eps * 10.0;
    if (next > cap * (1.0 + 1e-12)) break;
    eps = next;
  }
  throw InvariantViolation("covariance grid is not positive semidefinite within jitter 1e-8 * max diagonal");
}

CovarianceGrid build_Z_cov(const DistributionSpec& spec_A, const RenewalSolution& service,
                           std::span<const double> grid) {
  if (grid.empty() || grid.front() != 0.0) throw ConfigError("build_Z_cov: grid must start at 0");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1])) throw ConfigError("build_Z_cov: grid must be strictly increasing");
  CovarianceGrid g;
  g.grid.assign(grid.begin(), grid.end());
  const auto m = static_cast<Eigen::Index>(grid.size());
  const double arrival_rate = service.mu() * moments(spec_A).scv;
  g.cov = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 1; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      const double s = grid[static_cast<std::size_t>(i)];
      const double t = grid[static_cast<std::size_t>(j)];
      const double v = arrival_rate * s + service.cov(s, t);
      g.cov(i, j) = v;
      g.cov(j, i) = v;
    }
  }
  factorize(g);
  return g;
}

CovarianceGrid build_Z_cov(const DistributionSpec& spec_A, const DistributionSpec& spec_S,
                           std::span<const double> grid) {
  const double t_max = grid.empty() ? 1.0 : std::max(grid.back(), 1e-9);
  const RenewalSolution sol(spec_S, t_max);
  return build_Z_cov(spec_A, sol, grid);
}

namespace {

void fill_normals(Eigen::MatrixXd& G, Rng& rng) {
  for (Eigen::Index j = 0; j < G.cols(); ++j)
    for (Eigen::Index i = 0; i < G.rows(); ++i) G(i, j) = standard_normal(rng);
}

constexpr std::size_t kBatch = 1000;

}  // namespace

Eigen::MatrixXd sample_Z(const CovarianceGrid& g, std::size_t reps, Rng& rng) {
  const auto m = static_cast<Eigen::Index>(g.grid.size()) - 1;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(reps), m + 1);
  if (m <= 0 || reps == 0) return out;
  Eigen::MatrixXd G(static_cast<Eigen::Index>(reps), m);
  fill_normals(G, rng);
  out.rightCols(m).noalias() = G * g.factor.triangularView<Eigen::Lower>().transpose();
  return out;
}

bool limit_event(std::span<const double> grid, const double* path, const LimitEventQuery& q, double p_delta) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  double first = neg_inf;
  double second = neg_inf;
  const double tol = 1e-9 * std::max(1.0, q.delta);
  const std::size_t stride = std::max<std::size_t>(q.stride, 1);
  for (std::size_t k = 0; k < grid.size(); k += stride) {
    const double t = grid[k];
    if (t <= q.delta + tol) first = std::max(first, path[k] + (q.eta - q.B) * q.mu * t);
    if (t >= q.delta - tol) second = std::max(second, path[k] - q.B * q.mu * t);
  }
  second += q.eta * q.mu * q.delta;
  return std::max(first, second) >= q.x + q.eta * p_delta;
}

BoundEstimate estimate_limit_event(const LimitEventQuery& q, const CovarianceGrid& g, double p_delta) {
  if (q.replications < 1) throw ConfigError("estimate_limit_event: replications must be >= 1");
  if (q.delta < 0.0 || q.eta < 0.0) throw ConfigError("estimate_limit_event: delta and eta must be >= 0");
  const std::size_t batches = (q.replications + kBatch - 1) / kBatch;
  const auto hits = parallel_map(batches, 0, [&](std::size_t b) {
    const std::size_t count = std::min(kBatch, q.replications - b * kBatch);
    Rng rng = make_rng(q.seed, {b});
    const Eigen::MatrixXd P = sample_Z(g, count, rng);
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R = P;
    std::size_t h = 0;
    for (Eigen::Index r = 0; r < R.rows(); ++r) h += limit_event(g.grid, R.row(r).data(), q, p_delta) ? 1 : 0;
    return h;
  });
  std::size_t total = 0;
  for (std::size_t h : hits) total += h;
  BoundEstimate e = estimate_from_indicators(total, q.replications);
  e.note = "discrete grid, step " + std::to_string(g.grid.size() > 1 ? g.grid[1] - g.grid[0] : 0.0) +
           "; discrete supremum under-covers the continuous one";
  return e;
}

BoundEstimate corollary_bound(double B, double x, const CovarianceGrid& g, double mu, std::size_t reps,
                              std::uint64_t seed, std::size_t stride) {
  if (!(B > 0.0)) throw ConfigError("corollary_bound: B must be > 0");
  LimitEventQuery q;
  q.B = B;
  q.x = x;
  q.eta = B / 2.0;
  q.mu = mu;
  q.delta = g.grid.back();  // delta at the end of the grid stands in for infinity
  q.replications = reps;
  q.seed = seed;
  q.stride = stride;
  // With delta = T only the first term matters: sup (Z - (B/2) mu t) >= x + B/2.
  return estimate_limit_event(q, g, 1.0);
}

double Z_cov(const RenewalConstants& c, const RenewalSolution& service, double s, double t) {
  if (s > t) std::swap(s, t);
  return c.C4 * s + 0.5 * (service.f(s) + service.f(t) - service.f(t - s));
}

double W_cov(const RenewalConstants& c, const RenewalSolution& service, double s, double t) {
  if (s > t) std::swap(s, t);
  if (s < c.M + 1.0) throw ConfigError("W_cov: need s >= M + 1");
  const double a = c.M * c.C4 + service.f(s);
  const double b = c.M * c.C4 + service.f(t);
  if (!(a > 0.0 && b > 0.0)) throw InvariantViolation("W_cov: M C4 + f must be positive");
  return c.C4 * std::sqrt(1.0 - c.M / s) * std::sqrt(1.0 - c.M / t) * s +
         std::sqrt(a) * std::sqrt(b) * std::exp(-c.M * (t - s));
}

std::vector<double> slepian_s_grid(const RenewalConstants& c) {
  std::vector<double> s;
  for (int k = 0; k <= 38; ++k) s.push_back(c.M + 1.0 + 0.5 * k);
  return s;
}

std::vector<double> slepian_offsets() {
  std::vector<double> d = {0.0, 1e-7, 1e-6, 1e-5, 2e-5, 5e-5, 1e-4, 1e-3, 0.01, 0.1};
  for (int k = 1; k <= 80; ++k) d.push_back(0.25 * k);
  return d;
}

SlepianReport verify_slepian_domination(const DistributionSpec& spec_A, const DistributionSpec& spec_S,
                                        std::span<const double> s_grid, std::span<const double> offsets) {
  const RenewalConstants c = renewal_constants(spec_A, spec_S);
  double t_max = 1.0;
  for (double s : s_grid)
    for (double d : offsets) t_max = std::max(t_max, s + d);
  // Non-lattice laws are solved on a bounded range and held flat beyond it.
  const bool closed = std::holds_alternative<Exponential>(spec_S.family()) || spec_S.is_lattice();
  const RenewalSolution sol(spec_S, closed ? t_max : std::min(t_max, 200.0 * spec_S.mean()));
  SlepianReport r;
  r.min_margin = std::numeric_limits<double>::infinity();
  for (double s : s_grid) {
    const double vz = Z_cov(c, sol, s, s);
    const double vw = W_cov(c, sol, s, s);
    r.max_variance_gap = std::max(r.max_variance_gap, std::abs(vw - vz) / vz);
    for (double d : offsets) {
      const double t = s + d;
      const double margin = Z_cov(c, sol, s, t) - W_cov(c, sol, s, t);
      ++r.points;
      if (margin < r.min_margin) {
        r.min_margin = margin;
        r.worst_s = s;
        r.worst_t = t;
      }
    }
  }
  r.passed = r.max_variance_gap <= 1e-6 && r.min_margin >= -1e-6;
  return r;
}

}  // namespace hwq
