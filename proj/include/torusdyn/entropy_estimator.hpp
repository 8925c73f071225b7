#pragma once

// Bowen separated-set counts and the two integral upper bounds
//   h_top <= limsup (1/2n) log ∫ K_{f^n} dλ
//   h_top <= limsup (1/n)  log ∫ ||(Df^n)^∧|| dλ
// assembled into a per-n bound chain.
//
// Greedy separated sets are maximal, not maximum, so counts are lower
// bounds for N(n, eps). Since the bounds above are upper bounds, the lower
// side is the honest one to test them with.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "torusdyn/core.hpp"
#include "torusdyn/dilatation_field.hpp"
#include "torusdyn/map_catalog.hpp"
#include "torusdyn/torus_geometry.hpp"
#include "torusdyn/wandering_domains.hpp"

namespace torusdyn {

/// d_n(p, q) = max_{1 <= i <= n} d(f^i p, f^i q). The index starts at 1.
inline double bowen_distance(const MapSpec& f, TorusPoint p, TorusPoint q, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "Bowen distance needs n >= 1");
  double d = 0.0;
  for (int i = 1; i <= n; ++i) {
    p = eval(f, p);
    q = eval(f, q);
    d = std::max(d, torus_distance(p, q));
  }
  return d;
}

struct SeparatedReport {
  int n = 0;
  double epsilon = 0.0;
  int count = 0;
  int candidate_count = 0;
  std::uint64_t seed = 0;
};

/// Orbits of a candidate set: level i holds f^i of every candidate.
class OrbitTable {
 public:
  OrbitTable(const MapSpec& f, std::span<const TorusPoint> candidates, int max_level)
      : size_(candidates.size()), levels_(max_level + 1) {
    points_.reserve(size_ * levels_);
    for (const auto& p : candidates) {
      TorusPoint x = p;
      points_.push_back(x);
      for (int i = 1; i < levels_; ++i) {
        x = eval(f, x);
        points_.push_back(x);
      }
    }
  }

  std::size_t size() const { return size_; }
  int max_level() const { return levels_ - 1; }
  const TorusPoint& at(std::size_t candidate, int level) const { return points_[candidate * levels_ + level]; }

 private:
  std::size_t size_;
  int levels_;
  std::vector<TorusPoint> points_;
};

namespace detail {

/// Squared torus distance via per-axis wrapping; agrees with the
/// nine-translate minimum for coordinates in [0,1).
inline double torus_distance_sq(const TorusPoint& p, const TorusPoint& q) {
  double dx = q.x() - p.x();
  double dy = q.y() - p.y();
  dx -= std::round(dx);
  dy -= std::round(dy);
  return dx * dx + dy * dy;
}

/// Greedy pass in candidate order, separating on levels [first, last].
/// Retained points are bucketed by their position at `last`: a candidate
/// closer than eps in the max-metric is closer than eps at that level, so
/// only the 3x3 neighbouring cells of side >= eps need to be searched.
inline int greedy_separated(const OrbitTable& orbits, int first, int last, double eps) {
  const int g = std::max(1, static_cast<int>(std::floor(1.0 / eps)));
  const auto cell_of = [g](double v) { return std::min(g - 1, static_cast<int>(v * g)); };
  std::vector<std::vector<std::size_t>> cells(static_cast<std::size_t>(g) * g);
  const double eps_sq = eps * eps;
  int count = 0;
  for (std::size_t i = 0; i < orbits.size(); ++i) {
    const TorusPoint& key = orbits.at(i, last);
    const int cx = cell_of(key.x()), cy = cell_of(key.y());
    const auto too_close = [&](std::size_t j) {
      for (int lv = last; lv >= first; --lv) {
        if (torus_distance_sq(orbits.at(i, lv), orbits.at(j, lv)) >= eps_sq) return false;
      }
      return true;
    };
    bool rejected = false;
    if (g >= 3) {
      for (int dx = -1; dx <= 1 && !rejected; ++dx) {
        for (int dy = -1; dy <= 1 && !rejected; ++dy) {
          const auto& bucket = cells[((cx + dx + g) % g) * g + (cy + dy + g) % g];
          rejected = std::any_of(bucket.begin(), bucket.end(), too_close);
        }
      }
    } else {
      for (const auto& bucket : cells) {
        if (std::any_of(bucket.begin(), bucket.end(), too_close)) {
          rejected = true;
          break;
        }
      }
    }
    if (!rejected) {
      cells[cx * g + cy].push_back(i);
      ++count;
    }
  }
  return count;
}

}  // namespace detail

inline SeparatedReport separated_count(const OrbitTable& orbits, int n, double epsilon, std::uint64_t seed = 0) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  if (n < 1 || n > orbits.max_level()) throw Error(ErrorKind::InvalidArgument, "n outside the orbit table");
  if (orbits.size() == 0) throw Error(ErrorKind::EmptyRequest, "no candidates");
  return {n, epsilon, detail::greedy_separated(orbits, 1, n, epsilon), static_cast<int>(orbits.size()), seed};
}

inline SeparatedReport separated_count(const MapSpec& f, int n, double epsilon, std::span<const TorusPoint> candidates,
                                       std::uint64_t seed = 0) {
  if (candidates.empty()) throw Error(ErrorKind::EmptyRequest, "no candidates");
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
  return separated_count(OrbitTable(f, candidates, n), n, epsilon, seed);
}

/// Greedy eps-separated count for the plain metric d (no dynamics); the
/// n = 0 baseline that entropy rates are measured against.
inline int packing_count(const OrbitTable& orbits, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  return detail::greedy_separated(orbits, 0, 0, epsilon);
}

/// Candidate set used by the estimators: grid(m) with seeded jitter.
inline std::vector<TorusPoint> entropy_candidates(int grid, double jitter, std::uint64_t seed) {
  return jittered_grid(grid, jitter, seed);
}

struct EntropyFit {
  double epsilon = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<SeparatedReport> reports;
};

/// Least-squares slope of log N(n, eps) against n.
inline EntropyFit fit_entropy(const OrbitTable& orbits, double epsilon, std::span<const int> n_values,
                              std::uint64_t seed = 0) {
  if (n_values.size() < 3) throw Error(ErrorKind::InvalidArgument, "entropy fit needs at least 3 values of n");
  EntropyFit fit;
  fit.epsilon = epsilon;
  for (const int n : n_values) {
    fit.reports.push_back(separated_count(orbits, n, epsilon, seed));
    if (fit.reports.back().count == 0) throw Error(ErrorKind::DegenerateFit, "zero separated count");
  }
  const double m = static_cast<double>(n_values.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : fit.reports) {
    const double x = r.n, y = std::log(static_cast<double>(r.count));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) throw Error(ErrorKind::DegenerateFit, "n values must not all coincide");
  fit.slope = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / m;
  return fit;
}

inline EntropyFit entropy_estimate(const MapSpec& f, double epsilon, std::span<const int> n_values,
                                   std::span<const TorusPoint> candidates, std::uint64_t seed = 0) {
  if (n_values.empty()) throw Error(ErrorKind::InvalidArgument, "entropy fit needs at least 3 values of n");
  if (candidates.empty()) throw Error(ErrorKind::EmptyRequest, "no candidates");
  const int n_max = *std::max_element(n_values.begin(), n_values.end());
  return fit_entropy(OrbitTable(f, candidates, n_max), epsilon, n_values, seed);
}

namespace detail {

/// log of the mean of exp(v_i), shifted by the maximum.
inline double log_mean_exp(std::span<const double> v) {
  if (v.empty()) throw Error(ErrorKind::EmptyRequest, "no quadrature nodes");
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (const double x : v) s += std::exp(x - mx);
  return mx + std::log(s) - std::log(static_cast<double>(v.size()));
}

}  // namespace detail

/// (1/2n) log of the midpoint-rule mean of K_{f^n} (λ(M) = 1).
inline double dilatation_bound(const MapSpec& f, int n, std::span<const TorusPoint> nodes) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
  std::vector<double> log_k;
  log_k.reserve(nodes.size());
  for (const auto& p : nodes) log_k.push_back(orbit_jacobian(f, p, n).log_dilatation());
  return detail::log_mean_exp(log_k) / (2.0 * n);
}

/// (1/n) log of the mean of ||(Df^n)^∧|| = max(s1, det).
inline double przytycki_bound(const MapSpec& f, int n, std::span<const TorusPoint> nodes) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
  std::vector<double> log_norm;
  log_norm.reserve(nodes.size());
  for (const auto& p : nodes) {
    const auto od = orbit_jacobian(f, p, n);
    log_norm.push_back(std::max(od.log_sigma1(), od.log_det));
  }
  return detail::log_mean_exp(log_norm) / n;
}

struct BoundChainParams {
  std::vector<int> n_values{2, 3, 4, 5, 6};
  std::vector<double> epsilons{0.2};
  int candidate_grid = 200;
  double jitter = 0.25;
  int quadrature = 64;
  std::uint64_t seed = 0;
  double slack_scale = 1.0;  ///< slack = slack_scale * (2/n) log 2
  double alpha = 1.0;
  int holder_samples = 10000;
};

struct BoundRecord {
  int n = 0;
  std::vector<int> counts;                 ///< per epsilon
  std::vector<double> entropy_rate;        ///< (1/n) log(N(n,eps) / N(0,eps)) per epsilon
  double dilatation_bound = 0.0;
  double przytycki_bound = 0.0;
  double slack = 0.0;
  std::optional<double> xi;                ///< xi(n) when a collection is attached
  std::optional<double> xi_rate;           ///< xi(n) / n
  std::optional<double> max_log_K_domain;  ///< max log K_{f^n}(f(p)) over sampled domain points
  std::optional<double> xi_route_bound;    ///< C xi(n) + C'
  std::vector<std::string> flags;
};

struct BoundChain {
  std::vector<double> epsilons;
  std::vector<int> baseline_counts;  ///< N(0, eps): separated count for the plain metric
  int candidate_count = 0;
  int quadrature_nodes = 0;
  std::vector<BoundRecord> records;
  std::optional<XiRouteConstants> constants;
  std::string estimator_note =
      "greedy separated sets are maximal, not maximum: counts are lower bounds of N(n,eps)";
  bool flagged() const {
    return std::any_of(records.begin(), records.end(), [](const BoundRecord& r) { return !r.flags.empty(); });
  }
};

inline BoundChain bound_chain(const MapSpec& f, const BoundChainParams& prm,
                              const DomainCollection* collection = nullptr) {
  if (prm.n_values.empty()) throw Error(ErrorKind::InvalidArgument, "bound chain needs at least one n");
  if (prm.epsilons.empty()) throw Error(ErrorKind::InvalidArgument, "bound chain needs at least one epsilon");
  BoundChain chain;
  chain.epsilons = prm.epsilons;
  const auto candidates = entropy_candidates(prm.candidate_grid, prm.jitter, prm.seed);
  const auto nodes = midpoint_grid(prm.quadrature);
  chain.candidate_count = static_cast<int>(candidates.size());
  chain.quadrature_nodes = static_cast<int>(nodes.size());
  const int n_max = *std::max_element(prm.n_values.begin(), prm.n_values.end());
  if (*std::min_element(prm.n_values.begin(), prm.n_values.end()) < 1) {
    throw Error(ErrorKind::InvalidArgument, "n values must be >= 1");
  }
  const OrbitTable orbits(f, candidates, n_max);
  for (const double eps : prm.epsilons) chain.baseline_counts.push_back(packing_count(orbits, eps));

  std::vector<TorusPoint> domain_points;
  if (collection != nullptr && !collection->empty()) {
    const double beta = beta_of(*collection);
    chain.constants = xi_route_constants(f, beta, delta_from_beta(beta), prm.alpha, prm.holder_samples, prm.seed);
    for (const auto& d : collection->domains()) {
      domain_points.push_back(d.center);
      for (const auto& b : d.boundary_samples) domain_points.push_back(b);
    }
  }

  for (const int n : prm.n_values) {
    BoundRecord rec;
    rec.n = n;
    rec.slack = prm.slack_scale * 2.0 / n * std::log(2.0);
    rec.dilatation_bound = dilatation_bound(f, n, nodes);
    rec.przytycki_bound = przytycki_bound(f, n, nodes);
    for (std::size_t e = 0; e < prm.epsilons.size(); ++e) {
      const int count = separated_count(orbits, n, prm.epsilons[e], prm.seed).count;
      const double rate = std::log(static_cast<double>(count) / chain.baseline_counts[e]) / n;
      rec.counts.push_back(count);
      rec.entropy_rate.push_back(rate);
      if (rate > rec.dilatation_bound + rec.slack) {
        rec.flags.push_back("entropy_rate exceeds dilatation_bound + slack at eps=" + std::to_string(prm.epsilons[e]));
      }
      if (rate > rec.przytycki_bound + rec.slack) {
        rec.flags.push_back("entropy_rate exceeds przytycki_bound + slack at eps=" + std::to_string(prm.epsilons[e]));
      }
    }
    if (chain.constants && collection->size() >= static_cast<std::size_t>(n) + 1) {
      rec.xi = xi(*collection, prm.alpha, n);
      rec.xi_rate = *rec.xi / n;
      double worst = 0.0;
      for (const auto& p : domain_points) worst = std::max(worst, orbit_jacobian(f, eval(f, p), n).log_dilatation());
      rec.max_log_K_domain = worst;
      rec.xi_route_bound = chain.constants->c * *rec.xi + chain.constants->c_prime;
      if (worst > *rec.xi_route_bound + 1e-12) rec.flags.push_back("log K on domain points exceeds C xi(n) + C'");
    }
    chain.records.push_back(std::move(rec));
  }
  return chain;
}

}  // namespace torusdyn
