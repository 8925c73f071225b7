#pragma once

// Finite families of permuted domains: disjointness and permutation checks,
// bounded geometry, area budget, accumulation probes, xi(n), the
// sum-of-diameters estimate and the dilatation cap on the complement S.
//
// Every family here is a finite truncation of an infinite object; each
// report carries a truncation note saying so.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "torusdyn/core.hpp"
#include "torusdyn/dilatation_field.hpp"
#include "torusdyn/disk_model.hpp"
#include "torusdyn/map_catalog.hpp"
#include "torusdyn/torus_geometry.hpp"

namespace torusdyn {

inline constexpr int kDefaultBoundarySamples = 64;

/// Domain sandwiched as B(center, inradius) ⊆ D ⊆ B(center, circumradius).
struct Domain {
  int label = 0;
  TorusPoint center;
  double inradius = 0.0;
  double circumradius = 0.0;
  double diameter = 0.0;
  std::vector<TorusPoint> boundary_samples;
};

inline std::vector<TorusPoint> circle_samples(const TorusPoint& center, double radius, int count) {
  std::vector<TorusPoint> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double phi = kTwoPi * i / count;
    out.push_back(center + Vec2{radius * std::cos(phi), radius * std::sin(phi)});
  }
  return out;
}

/// Domain with boundary samples on the circumscribed circle.
inline Domain make_domain(int label, const TorusPoint& center, double inradius, double circumradius,
                          std::optional<double> diameter = std::nullopt,
                          int boundary_count = kDefaultBoundarySamples) {
  if (!(inradius > 0.0 && inradius <= circumradius)) {
    throw Error(ErrorKind::InvalidArgument, "domain radii must satisfy 0 < r <= R");
  }
  if (circumradius > MetricConstants::injectivity_radius) {
    throw Error(ErrorKind::OutOfInjectivityRadius, "circumradius exceeds the injectivity radius");
  }
  const double ell = diameter.value_or(2.0 * circumradius);
  if (!(ell >= inradius && ell <= 2.0 * circumradius)) {
    throw Error(ErrorKind::InvalidArgument, "diameter must lie in [r, 2R]");
  }
  return {label, center, inradius, circumradius, ell, circle_samples(center, circumradius, boundary_count)};
}

inline Domain make_round_domain(int label, const TorusPoint& center, double radius) {
  return make_domain(label, center, radius, radius);
}

class DomainCollection {
 public:
  DomainCollection() = default;
  DomainCollection(std::vector<Domain> domains, std::map<int, int> permutation, double alpha = 1.0,
                   std::string truncation_note = "finite truncation")
      : domains_(std::move(domains)),
        permutation_(std::move(permutation)),
        alpha_(alpha),
        truncation_note_(std::move(truncation_note)) {
    std::set<int> labels;
    for (std::size_t i = 0; i < domains_.size(); ++i) {
      if (!labels.insert(domains_[i].label).second) {
        throw Error(ErrorKind::InvalidArgument, "duplicate domain label " + std::to_string(domains_[i].label));
      }
      index_[domains_[i].label] = i;
    }
    std::set<int> targets;
    for (const auto& [from, to] : permutation_) {
      if (!targets.insert(to).second) {
        throw Error(ErrorKind::InvalidArgument, "permutation is not injective at label " + std::to_string(to));
      }
    }
  }

  const std::vector<Domain>& domains() const { return domains_; }
  const std::map<int, int>& permutation() const { return permutation_; }
  double alpha() const { return alpha_; }
  const std::string& truncation_note() const { return truncation_note_; }
  std::size_t size() const { return domains_.size(); }
  bool empty() const { return domains_.empty(); }

  const Domain* find(int label) const {
    const auto it = index_.find(label);
    return it == index_.end() ? nullptr : &domains_[it->second];
  }
  std::optional<int> sigma(int label) const {
    const auto it = permutation_.find(label);
    if (it == permutation_.end()) return std::nullopt;
    return it->second;
  }

  /// True when p lies outside every circumscribed ball.
  bool in_complement(const TorusPoint& p) const {
    return std::none_of(domains_.begin(), domains_.end(),
                        [&](const Domain& d) { return torus_distance(p, d.center) < d.circumradius; });
  }

 private:
  std::vector<Domain> domains_;
  std::map<int, int> permutation_;
  std::map<int, std::size_t> index_;
  double alpha_ = 1.0;
  std::string truncation_note_;
};

// ---------------------------------------------------------------------------
// Collection-level checks

struct LabelPair {
  int first = 0;
  int second = 0;
  friend bool operator==(const LabelPair&, const LabelPair&) = default;
};

struct CollectionReport {
  std::vector<LabelPair> overlapping;  ///< pairs violating d(p_j,p_k) > R_j + R_k, sorted
  std::vector<int> orbit_repeats;      ///< labels whose sigma-orbit revisits a label
  double covering_radius = 0.0;        ///< max over grid(100) of distance to the nearest domain
  std::string truncation_note;
  bool passed() const { return overlapping.empty() && orbit_repeats.empty(); }
};

/// Pairwise O(N^2) disjointness of closed circumscribed balls.
inline std::vector<LabelPair> overlapping_pairs(const DomainCollection& c) {
  std::vector<LabelPair> out;
  const auto& ds = c.domains();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = i + 1; j < ds.size(); ++j) {
      if (!(torus_distance(ds[i].center, ds[j].center) > ds[i].circumradius + ds[j].circumradius)) {
        out.push_back({std::min(ds[i].label, ds[j].label), std::max(ds[i].label, ds[j].label)});
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const LabelPair& a, const LabelPair& b) { return std::tie(a.first, a.second) < std::tie(b.first, b.second); });
  return out;
}

inline double distance_to_family(const DomainCollection& c, const TorusPoint& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& d : c.domains()) best = std::min(best, std::max(0.0, torus_distance(p, d.center) - d.circumradius));
  return best;
}

inline CollectionReport verify_collection(const DomainCollection& c) {
  CollectionReport rep;
  rep.truncation_note = c.truncation_note();
  rep.overlapping = overlapping_pairs(c);
  for (const auto& d : c.domains()) {
    std::set<int> seen{d.label};
    int cur = d.label;
    while (auto next = c.sigma(cur)) {
      if (!seen.insert(*next).second) {
        rep.orbit_repeats.push_back(d.label);
        break;
      }
      cur = *next;
    }
  }
  if (!c.empty()) {
    for (const auto& p : sample_points(GridSampling{100})) {
      rep.covering_radius = std::max(rep.covering_radius, distance_to_family(c, p));
    }
  }
  return rep;
}

inline double beta_of(const DomainCollection& c) {
  if (c.empty()) throw Error(ErrorKind::EmptyRequest, "beta of an empty collection");
  double beta = 1.0;
  for (const auto& d : c.domains()) beta = std::max(beta, d.circumradius / d.inradius);
  return beta;
}

struct PermutationFailure {
  int label = 0;
  std::string reason;
  double value = 0.0;
};

struct PermutationReport {
  int tested = 0;
  std::vector<PermutationFailure> failures;
  std::string truncation_note;
  bool passed() const { return failures.empty(); }
};

/// Image of a domain re-sandwiched from its mapped boundary samples about
/// the image of its center.
struct Sandwich {
  TorusPoint center;
  double inradius = 0.0;
  double circumradius = 0.0;
};

inline Sandwich image_sandwich(const MapSpec& f, const Domain& d) {
  Sandwich s;
  s.center = eval(f, d.center);
  s.inradius = std::numeric_limits<double>::infinity();
  for (const auto& b : d.boundary_samples) {
    const double r = torus_distance(s.center, eval(f, b));
    s.inradius = std::min(s.inradius, r);
    s.circumradius = std::max(s.circumradius, r);
  }
  return s;
}

/// For every label with a sigma entry: the image center must land within
/// tol of the target center, the image must still have bounded geometry
/// (re-sandwiched ratio <= beta + tol), and it must cover the target's
/// inscribed ball (image inradius >= r_target - tol).
inline PermutationReport verify_permutation(const MapSpec& f, const DomainCollection& c, double tol) {
  PermutationReport rep;
  rep.truncation_note = c.truncation_note();
  if (c.size() > 1 && c.permutation().empty()) {
    throw Error(ErrorKind::IncompletePermutation, "collection carries no permutation");
  }
  const double beta = c.empty() ? 1.0 : beta_of(c);
  for (const auto& d : c.domains()) {
    const auto target_label = c.sigma(d.label);
    if (!target_label) continue;
    const Domain* target = c.find(*target_label);
    if (target == nullptr) {
      throw Error(ErrorKind::IncompletePermutation,
                  "sigma(" + std::to_string(d.label) + ") = " + std::to_string(*target_label) + " is not in the family");
    }
    ++rep.tested;
    const Sandwich img = image_sandwich(f, d);
    const double offset = torus_distance(img.center, target->center);
    if (offset > tol) rep.failures.push_back({d.label, "center", offset});
    const double ratio = img.circumradius / img.inradius;
    if (ratio > beta + tol) rep.failures.push_back({d.label, "geometry", ratio});
    if (img.inradius < target->inradius - tol) rep.failures.push_back({d.label, "coverage", img.inradius});
  }
  return rep;
}

struct NullSequenceReport {
  double epsilon = 0.0;
  int count_at_least_epsilon = 0;
  double area_sum = 0.0;  ///< sum of kappa r_k^2
  bool passed() const { return area_sum <= MetricConstants::total_area; }
};

inline NullSequenceReport null_sequence_check(const DomainCollection& c, double epsilon) {
  NullSequenceReport rep;
  rep.epsilon = epsilon;
  for (const auto& d : c.domains()) {
    if (d.diameter >= epsilon) ++rep.count_at_least_epsilon;
    rep.area_sum += MetricConstants::kappa * d.inradius * d.inradius;
  }
  return rep;
}

struct DensityEntry {
  double scale = 0.0;
  bool satisfied = false;
  std::optional<int> witness;  ///< label of a small domain within `scale` of the probe
};

/// For each scale s: is there a domain with diameter < s within distance s
/// of the probe? Distance is measured to the circumscribed ball.
inline std::vector<DensityEntry> density_diagnostic(const DomainCollection& c, const TorusPoint& probe,
                                                    std::span<const double> scales) {
  if (!c.in_complement(probe)) throw Error(ErrorKind::NotInS, "probe lies inside a domain");
  std::vector<DensityEntry> out;
  for (const double s : scales) {
    DensityEntry e{s, false, std::nullopt};
    for (const auto& d : c.domains()) {
      if (d.diameter < s && torus_distance(probe, d.center) - d.circumradius < s) {
        e.satisfied = true;
        e.witness = d.label;
        break;
      }
    }
    out.push_back(e);
  }
  return out;
}

/// xi(n): sum of the n+1 largest values of ell^alpha.
inline double xi(std::span<const double> diameters, double alpha, int n) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "n must be >= 0");
  if (!(alpha >= 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be >= 0");
  if (diameters.size() < static_cast<std::size_t>(n) + 1) {
    throw Error(ErrorKind::InsufficientFamily, "xi(n) needs at least n+1 domains");
  }
  std::vector<double> powered;
  powered.reserve(diameters.size());
  for (const double l : diameters) powered.push_back(std::pow(l, alpha));
  std::partial_sort(powered.begin(), powered.begin() + n + 1, powered.end(), std::greater<>());
  double sum = 0.0;
  // smallest first keeps the summation error down for decaying families
  for (int i = n; i >= 0; --i) sum += powered[i];
  return sum;
}

inline double xi(const DomainCollection& c, double alpha, int n) {
  std::vector<double> ell;
  for (const auto& d : c.domains()) ell.push_back(d.diameter);
  return xi(ell, alpha, n);
}

/// sup |mu_f| over a midpoint grid (a lower bound of the true supremum).
inline double sup_mu_modulus(const MapSpec& f, int m = 128) {
  double sup = 0.0;
  for (const auto& p : midpoint_grid(m)) sup = std::max(sup, beltrami_at(f, p).mu.modulus());
  return sup;
}

/// sup log K_f over a midpoint grid.
inline double sup_log_dilatation(const MapSpec& f, int m = 128) {
  double sup = 0.0;
  for (const auto& p : midpoint_grid(m)) sup = std::max(sup, log_K_from_singular(jacobian(f, p)));
  return sup;
}

inline constexpr double kHolderSafetyFactor = 2.0;

/// Constants entering [mu_{f^{n+1}}(p), mu_{f^{n+1}}(q)] <= C sum ell^alpha
/// and log K_{f^n}(f(p)) <= C xi(n) + C'.
struct XiRouteConstants {
  double beta = 1.0;
  double delta = 0.0;        ///< radius containing the z_s terms
  double delta_prime = 0.0;  ///< sup |mu_f|
  LipschitzConstants lipschitz;
  HolderEstimate holder;
  double safety_factor = kHolderSafetyFactor;
  double c_tilde1 = 0.0;  ///< C1 * safety * c_mu
  double c_tilde2 = 0.0;  ///< 2 delta / (1 - delta^2) * safety * c_theta
  double c = 0.0;         ///< c_tilde1 + c_tilde2
  double c_prime = 0.0;   ///< 2 log beta + sup log K_f
};

inline XiRouteConstants xi_route_constants(const MapSpec& f, double beta, double delta, double alpha,
                                      int holder_samples, std::uint64_t seed) {
  XiRouteConstants k;
  k.beta = beta;
  k.delta = delta;
  k.delta_prime = sup_mu_modulus(f);
  k.lipschitz = lipschitz_constants_for_radii(delta, k.delta_prime);
  k.holder = holder_estimate(f, alpha, holder_samples, seed);
  k.c_tilde1 = k.lipschitz.c1 * k.safety_factor * k.holder.c_mu;
  k.c_tilde2 = 2.0 * delta / (1.0 - delta * delta) * k.safety_factor * k.holder.c_theta;
  k.c = k.c_tilde1 + k.c_tilde2;
  k.c_prime = 2.0 * std::log(beta) + sup_log_dilatation(f);
  return k;
}

struct SumDiamReport {
  int start_label = 0;
  int n = 0;
  double alpha = 1.0;
  double lhs = 0.0;  ///< max over boundary samples q of [mu_{f^{n+1}}(p), mu_{f^{n+1}}(q)]
  double diameter_sum = 0.0;
  double rhs = 0.0;
  XiRouteConstants constants;
  double observed_delta = 0.0;  ///< max |mu_{f^{n-s}}(q_{s+1})| seen along the chain
  double margin() const { return rhs - lhs; }
  bool passed() const { return lhs <= rhs; }
};

/// Evaluates both sides of the sum-of-diameters estimate along the chain
/// D_t -> D_sigma(t) -> ... (n+1 domains), with p the center of D_t and q
/// ranging over its boundary samples.
///
/// delta is max(delta(beta), observed): a finite family does not force the
/// z_s terms into B_delta(beta), so the radius actually reached is used.
inline SumDiamReport sum_diam_check(const MapSpec& f, const DomainCollection& c, double alpha, int n, int t,
                                    int holder_samples = 10000, std::uint64_t seed = 0) {
  const Domain* start = c.find(t);
  if (start == nullptr) throw Error(ErrorKind::ChainBroken, "start label " + std::to_string(t) + " not in family");
  std::vector<const Domain*> chain{start};
  for (int s = 0; s < n; ++s) {
    const auto next = c.sigma(chain.back()->label);
    const Domain* d = next ? c.find(*next) : nullptr;
    if (d == nullptr) throw Error(ErrorKind::ChainBroken, "sigma-chain from " + std::to_string(t) + " ends early");
    chain.push_back(d);
  }

  SumDiamReport rep;
  rep.start_label = t;
  rep.n = n;
  rep.alpha = alpha;
  for (const Domain* d : chain) rep.diameter_sum += std::pow(d->diameter, alpha);

  const DiskCoeff mu_p = iterate_beltrami(f, start->center, n + 1);
  double observed = 0.0;
  for (const auto& q0 : start->boundary_samples) {
    rep.lhs = std::max(rep.lhs, hyp_dist(mu_p, iterate_beltrami(f, q0, n + 1)));
    TorusPoint q = eval(f, q0);
    for (int s = 0; s < n; ++s) {
      observed = std::max(observed, iterate_beltrami(f, q, n - s).modulus());
      q = eval(f, q);
    }
  }
  rep.observed_delta = observed;
  const double beta = beta_of(c);
  const double delta = std::max(delta_from_beta(beta), observed);
  rep.constants = xi_route_constants(f, beta, delta, alpha, holder_samples, seed);
  rep.rhs = rep.constants.c * rep.diameter_sum;
  return rep;
}

struct BoundedDilatationReport {
  double max_K = 1.0;
  double beta_sq = 1.0;
  int n_max = 0;
  int samples_used = 0;
  double tol = 1e-6;
  std::string truncation_note;
  bool flagged() const { return max_K > beta_sq + tol; }
};

/// max of K_{f^n}(p) over sampled p in S and 1 <= n <= n_max, against beta^2.
inline BoundedDilatationReport bounded_dilatation_diagnostic(const MapSpec& f, const DomainCollection& c, int n_max,
                                                            int samples_in_s, std::uint64_t seed,
                                                            double tol = 1e-6) {
  if (n_max < 1) throw Error(ErrorKind::InvalidArgument, "n_max must be >= 1");
  BoundedDilatationReport rep;
  rep.n_max = n_max;
  rep.tol = tol;
  rep.truncation_note = c.truncation_note();
  rep.beta_sq = c.empty() ? 1.0 : std::pow(beta_of(c), 2);
  double max_log_k = 0.0;
  for (const auto& p : sample_points(RandomSampling{samples_in_s, seed})) {
    if (!c.in_complement(p)) continue;
    ++rep.samples_used;
    OrbitDerivative od;
    TorusPoint x = p;
    for (int k = 1; k <= n_max; ++k) {
      od.push(jacobian(f, x));
      x = eval(f, x);
      max_log_k = std::max(max_log_k, od.log_dilatation());
    }
  }
  if (rep.samples_used == 0) throw Error(ErrorKind::Sampling, "no sample landed in the complement of the domains");
  rep.max_K = std::exp(max_log_k);
  return rep;
}

// ---------------------------------------------------------------------------
// Construction

namespace detail {

/// Continued-fraction test: is v within tol of a rational with denominator
/// at most max_den?
inline bool is_near_rational(double v, double tol = 1e-12, long max_den = 10000) {
  double x = v;
  long h0 = 1, h1 = 0, k0 = 0, k1 = 1;  // convergents h/k
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(x);
    const long ai = static_cast<long>(a);
    const long h2 = ai * h0 + h1, k2 = ai * k0 + k1;
    if (k2 > max_den) return false;
    if (std::abs(v - static_cast<double>(h2) / k2) <= tol) return true;
    h1 = h0; h0 = h2;
    k1 = k0; k0 = k2;
    const double frac = x - a;
    if (frac < 1e-15) return true;
    x = 1.0 / frac;
  }
  return false;
}

}  // namespace detail

/// Detects integer relations a + b wx + c wy = 0 with |b|, |c| <= 16 by
/// running the continued-fraction test on each b wx + c wy.
inline bool rationally_dependent(double wx, double wy, double tol = 1e-12) {
  for (int b = -16; b <= 16; ++b) {
    for (int c = -16; c <= 16; ++c) {
      if (b == 0 && c == 0) continue;
      if (b < 0 || (b == 0 && c < 0)) continue;  // sign symmetry
      if (detail::is_near_rational(b * wx + c * wy, tol)) return true;
    }
  }
  return false;
}

struct TranslationFamilyParams {
  double wx = 0.0;
  double wy = 0.0;
  int count = 1;
  double c = 0.01;
  double rho = 0.98;
  TorusPoint origin{0.0, 0.0};
  double margin = 1e-6;
};

/// Round disks on the orbit p_k = p_0 + k omega with r_k = c rho^k and
/// sigma(k) = k + 1; c is shrunk by 10% until all pairs are disjoint with
/// the requested margin. sigma is left undefined at the last label.
inline DomainCollection build_translation_family(const TranslationFamilyParams& prm) {
  if (prm.count < 1) throw Error(ErrorKind::InvalidArgument, "family needs at least one domain");
  if (!(prm.rho > 0.0 && prm.rho < 1.0)) throw Error(ErrorKind::InvalidArgument, "rho must lie in (0,1)");
  if (!(prm.c > 0.0)) throw Error(ErrorKind::InvalidArgument, "c must be positive");
  if (prm.count > 1 && rationally_dependent(prm.wx, prm.wy)) {
    throw Error(ErrorKind::InvalidArgument, "omega is rationally dependent");
  }
  std::vector<TorusPoint> centers;
  for (int k = 0; k < prm.count; ++k) centers.push_back(prm.origin + Vec2{k * prm.wx, k * prm.wy});

  // largest admissible c: every pair needs c (rho^j + rho^k) < d_jk - margin
  double c = std::min(prm.c, MetricConstants::injectivity_radius);
  const auto fits = [&](double cc) {
    for (int j = 0; j < prm.count; ++j)
      for (int k = j + 1; k < prm.count; ++k)
        if (!(torus_distance(centers[j], centers[k]) > cc * (std::pow(prm.rho, j) + std::pow(prm.rho, k)) + prm.margin))
          return false;
    return true;
  };
  while (!fits(c)) {
    c *= 0.9;
    if (c < 1e-9) throw Error(ErrorKind::ConstructionFailure, "cannot make the family disjoint");
  }

  std::vector<Domain> domains;
  std::map<int, int> sigma;
  for (int k = 0; k < prm.count; ++k) {
    domains.push_back(make_round_domain(k, centers[k], c * std::pow(prm.rho, k)));
    if (k + 1 < prm.count) sigma[k] = k + 1;
  }
  return DomainCollection(std::move(domains), std::move(sigma), 1.0,
                          "finite truncation: " + std::to_string(prm.count) +
                              " domains on one translation orbit; sigma undefined at the last label");
}

}  // namespace torusdyn
