#pragma once

// Complex dilatation of torus maps in the global conformal coordinate
// z = x + iy: mu_f = f_zbar / f_z, theta_f = conj(f_z) / f_z,
// K_f = (1 + |mu|) / (1 - |mu|), together with the composition law
//   mu_{g o f}(p) = T_{mu_f(p)}(theta_f(p) mu_g(f(p)))
// and the exterior-power norms of Df.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "torusdyn/core.hpp"
#include "torusdyn/disk_model.hpp"
#include "torusdyn/map_catalog.hpp"
#include "torusdyn/torus_geometry.hpp"

namespace torusdyn {

struct Wirtinger {
  Complex fz;
  Complex fzbar;
};

/// f_z = ((a+d) + i(c-b))/2, f_zbar = ((a-d) + i(c+b))/2.
inline Wirtinger wirtinger(const Jacobian2& j) {
  return {Complex(0.5 * (j.a + j.d), 0.5 * (j.c - j.b)), Complex(0.5 * (j.a - j.d), 0.5 * (j.c + j.b))};
}

struct BeltramiSample {
  DiskCoeff mu;
  UnitModulus theta;
};

struct DilatationValue {
  double k = 1.0;
};

inline BeltramiSample beltrami_from_jacobian(const Jacobian2& j) {
  const double det = j.det();
  if (!(det > 0.0)) throw Error(ErrorKind::Orientation, "Beltrami coefficient needs det Df > 0");
  const auto w = wirtinger(j);
  // det = |f_z|^2 - |f_zbar|^2, so 1 - |mu|^2 = det / |f_z|^2 exactly
  const double gap = det / std::norm(w.fz);
  return {DiskCoeff::with_gap(w.fzbar / w.fz, gap), UnitModulus(std::conj(w.fz) / w.fz)};
}

inline BeltramiSample beltrami_at(const MapSpec& f, const TorusPoint& p) {
  return beltrami_from_jacobian(jacobian(f, p));
}

inline double log_K_from_mu(const DiskCoeff& mu) { return mu.log_radial(); }

inline DilatationValue K_from_mu(const DiskCoeff& mu) { return {std::exp(log_K_from_mu(mu))}; }
inline DilatationValue K_from_mu(const BeltramiSample& s) { return K_from_mu(s.mu); }

inline double log_K_from_singular(const Jacobian2& j) {
  const double det = j.det();
  if (det == 0.0) throw Error(ErrorKind::Degenerate, "singular Jacobian has no finite dilatation");
  if (det < 0.0) throw Error(ErrorKind::Orientation, "dilatation needs det Df > 0");
  const auto sv = singular_values(j);
  return std::log(sv.s1) - std::log(sv.s2);
}

/// K = max|Df v| / min|Df v| over unit v.
inline DilatationValue K_from_singular(const Jacobian2& j) { return {std::exp(log_K_from_singular(j))}; }

/// mu_{g o f}(p) as the Mobius image T_{mu_f}(theta_f mu_g(f(p))).
inline DiskCoeff compose_beltrami(const BeltramiSample& f_at_p, const BeltramiSample& g_at_fp) {
  return mobius_T(f_at_p.mu, rotate(f_at_p.theta, g_at_fp.mu));
}

/// Same composition written as the quotient
/// (mu_f + theta_f mu_g) / (1 + conj(mu_f) theta_f mu_g).
inline DiskCoeff compose_beltrami_quotient(const BeltramiSample& f_at_p, const BeltramiSample& g_at_fp) {
  const Complex mf = f_at_p.mu.value();
  const Complex tg = f_at_p.theta.value() * g_at_fp.mu.value();
  const Complex den = 1.0 + std::conj(mf) * tg;
  return DiskCoeff::with_gap((mf + tg) / den, f_at_p.mu.gap() * g_at_fp.mu.gap() / std::norm(den));
}

/// mu_{f^n}(p) by the recursion
///   mu_{f^{k+1}}(p) = T_{mu_f(p)}(theta_f(p) mu_{f^k}(f(p))),
/// unwound from the far end of the orbit.
inline DiskCoeff iterate_beltrami(const MapSpec& f, const TorusPoint& p, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "iterate count must be >= 1");
  std::vector<BeltramiSample> along;
  along.reserve(n);
  TorusPoint x = p;
  for (int i = 0; i < n; ++i) {
    along.push_back(beltrami_at(f, x));
    x = eval(f, x);
  }
  DiskCoeff mu = along.back().mu;
  for (int i = n - 2; i >= 0; --i) mu = mobius_T(along[i].mu, rotate(along[i].theta, mu));
  return mu;
}

/// mu of Df^n assembled from the renormalised cocycle. The scale factor
/// drops out of mu; the gap is rebuilt from log det and log s1.
inline DiskCoeff beltrami_of_orbit(const OrbitDerivative& od) {
  const auto w = wirtinger(od.matrix);
  // 1 - |mu|^2 = det / |f_z|^2 and |f_z| = (s1 + s2) / 2 for the normalised matrix
  const double log_s1 = std::log(singular_values(od.matrix).s1);
  const double log_det_normalized = od.log_det - 2.0 * od.log_scale;
  const double s2 = std::exp(log_det_normalized - log_s1);
  const double fz_abs = 0.5 * (std::exp(log_s1) + s2);
  const double gap = std::exp(log_det_normalized) / (fz_abs * fz_abs);
  return DiskCoeff::with_gap(w.fzbar / w.fz, gap);
}

struct IdentityCheck {
  double lhs = 0.0;  ///< log K of g o f^{-1} at f(p)
  double rhs = 0.0;  ///< [mu_g(p), mu_f(p)]
};

/// Checks log K_{g o f^{-1}}(f(p)) = [mu_g(p), mu_f(p)] given Dg_p and Df_p.
/// D(g o f^{-1})_{f(p)} = Dg_p (Df_p)^{-1}.
inline IdentityCheck log_K_identity_check(const Jacobian2& g_at_p, const Jacobian2& f_at_p) {
  const Jacobian2 composite = g_at_p * f_at_p.inverse();
  return {log_K_from_singular(composite),
          hyp_dist(beltrami_from_jacobian(g_at_p).mu, beltrami_from_jacobian(f_at_p).mu)};
}

/// Map-level form: the Jacobian of g o f^{-1} is evaluated at f(p), pulling
/// back through inverse_eval.
inline IdentityCheck log_K_identity_check(const MapSpec& g, const MapSpec& f, const TorusPoint& p) {
  const TorusPoint fp = eval(f, p);
  const TorusPoint back = inverse_eval(f, fp);
  const Jacobian2 composite = jacobian(g, back) * jacobian(f, back).inverse();
  return {log_K_from_singular(composite), hyp_dist(beltrami_at(g, p).mu, beltrami_at(f, p).mu)};
}

struct ExteriorNorms {
  double norm1 = 1.0;  ///< largest singular value
  double norm2 = 1.0;  ///< |det|
  double full = 1.0;   ///< max(norm1, norm2)
};

inline ExteriorNorms exterior_norm(const Jacobian2& j) {
  if (!(j.det() > 0.0)) throw Error(ErrorKind::Orientation, "exterior norms need det Df > 0");
  const double s1 = singular_values(j).s1;
  const double det = j.det();
  return {s1, det, std::max(s1, det)};
}

struct HolderEstimate {
  double alpha = 1.0;
  double c_mu = 0.0;     ///< sup [mu(p), mu(q)] / d(p,q)^alpha over sampled pairs
  double c_theta = 0.0;  ///< sup |arg(theta(p)/theta(q))| / d(p,q)^alpha
  int sample_count = 0;
};

/// Empirical Holder constants of mu_f and theta_f. These are suprema over
/// sampled pairs, hence lower bounds of the true constants. Pair
/// separations are log-uniform in [1e-4, 0.5] so short scales are probed.
inline HolderEstimate holder_estimate(const MapSpec& f, double alpha, int sample_count, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0,1]");
  if (sample_count < 1) throw Error(ErrorKind::EmptyRequest, "holder estimate needs samples");
  HolderEstimate est;
  est.alpha = alpha;
  est.sample_count = sample_count;
  if (f.has_constant_jacobian()) return est;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double log_lo = std::log(1e-4), log_hi = std::log(0.5);
  for (int i = 0; i < sample_count; ++i) {
    const TorusPoint p(unit(rng), unit(rng));
    const double r = std::exp(log_lo + (log_hi - log_lo) * unit(rng));
    const double phi = kTwoPi * unit(rng);
    const TorusPoint q = p + Vec2{r * std::cos(phi), r * std::sin(phi)};
    const double d = torus_distance(p, q);
    if (d <= 0.0) continue;
    const auto bp = beltrami_at(f, p);
    const auto bq = beltrami_at(f, q);
    const double scale = std::pow(d, alpha);
    est.c_mu = std::max(est.c_mu, hyp_dist(bp.mu, bq.mu) / scale);
    const double angle = std::abs(std::arg(bp.theta.value() / bq.theta.value()));
    est.c_theta = std::max(est.c_theta, angle / scale);
  }
  return est;
}

/// One row of a mu / theta / K dump.
struct FieldSample {
  double x = 0.0, y = 0.0;
  double mu_re = 0.0, mu_im = 0.0;
  double theta_arg = 0.0;
  double K = 1.0;
};

inline std::vector<FieldSample> mu_field(const MapSpec& f, int m) {
  std::vector<FieldSample> rows;
  for (const auto& p : sample_points(GridSampling{m})) {
    const auto s = beltrami_at(f, p);
    rows.push_back({p.x(), p.y(), s.mu.re(), s.mu.im(), s.theta.angle(), K_from_mu(s).k});
  }
  return rows;
}

struct TelescopingCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  std::vector<double> terms;
  double margin() const { return rhs - lhs; }
};

/// Both sides of
///   [mu_{f^{n+1}}(p0), mu_{f^{n+1}}(q0)]
///     <= sum_{s=0}^{n} [T_{mu_f(p_s)}(theta_f(p_s) z_s), T_{mu_f(q_s)}(theta_f(q_s) z_s)]
/// with z_s = mu_{f^{n-s}}(q_{s+1}) (zero when n = s), p_s = f^s(p0), q_s = f^s(q0).
inline TelescopingCheck telescoping_check(const MapSpec& f, const TorusPoint& p0, const TorusPoint& q0, int n) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "n must be >= 0");
  TelescopingCheck out;
  out.lhs = hyp_dist(iterate_beltrami(f, p0, n + 1), iterate_beltrami(f, q0, n + 1));
  TorusPoint p = p0, q = q0;
  for (int s = 0; s <= n; ++s) {
    const TorusPoint q_next = eval(f, q);
    const DiskCoeff z = (n - s == 0) ? DiskCoeff() : iterate_beltrami(f, q_next, n - s);
    const auto bp = beltrami_at(f, p);
    const auto bq = beltrami_at(f, q);
    const double term = hyp_dist(mobius_T(bp.mu, rotate(bp.theta, z)), mobius_T(bq.mu, rotate(bq.theta, z)));
    out.terms.push_back(term);
    out.rhs += term;
    p = eval(f, p);
    q = q_next;
  }
  return out;
}

}  // namespace torusdyn
