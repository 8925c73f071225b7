#pragma once

// Poincare disk: hyperbolic distance, the Mobius isometries
// T_a(z) = (a + z) / (1 + conj(a) z), and the constants of the Lipschitz
// estimate |T_a(z) - T_b(z)| <= C |a - b|.
//
// The hyperbolic distance is normalised so that [mu, 0] = log K with
// K = (1 + |mu|) / (1 - |mu|), i.e. the length element is 2|dz|/(1-|z|^2).

#include <algorithm>
#include <cmath>

#include "torusdyn/core.hpp"

namespace torusdyn {

/// A point of the open unit disk.
///
/// Alongside the value we carry gap = 1 - |z|^2. Mobius maps and rotations
/// transform the gap multiplicatively, so it stays accurate long after |z|
/// itself has rounded to 1 (e.g. mu of A^50 for the cat map, where
/// 1 - |mu| ~ 1e-42). Everything that needs log K reads the gap.
class DiskCoeff {
 public:
  DiskCoeff() = default;
  DiskCoeff(double re, double im) : DiskCoeff(Complex(re, im)) {}
  explicit DiskCoeff(Complex z) : z_(z) {
    const double r = std::abs(z);
    if (!(r < 1.0)) throw Error(ErrorKind::OutsideDisk, "disk coefficient must satisfy |z| < 1");
    gap_ = (1.0 - r) * (1.0 + r);
  }

  /// Trusted construction when the gap is known more accurately than
  /// 1 - |z|^2 can be evaluated.
  static DiskCoeff with_gap(Complex z, double gap) {
    const double r = std::abs(z);
    if (!(gap > 0.0) || !std::isfinite(gap) || !(r <= 1.0 + 1e-12)) {
      throw Error(ErrorKind::OutsideDisk, "disk coefficient gap must be positive");
    }
    DiskCoeff d;
    // a few ulps past the circle is rounding in z; the gap is authoritative
    d.z_ = r > 1.0 ? z / r : z;
    d.gap_ = std::min(gap, 1.0);
    return d;
  }

  Complex value() const { return z_; }
  double re() const { return z_.real(); }
  double im() const { return z_.imag(); }
  double modulus() const { return std::abs(z_); }
  /// 1 - |z|^2
  double gap() const { return gap_; }

  /// log((1 + |z|) / (1 - |z|)), computed from the gap.
  double log_radial() const {
    const double r = modulus();
    return 2.0 * std::log1p(r) - std::log(gap_);
  }

 private:
  Complex z_{0.0, 0.0};
  double gap_ = 1.0;
};

/// A point of the unit circle; renormalised on construction.
class UnitModulus {
 public:
  UnitModulus() = default;
  UnitModulus(double re, double im) : UnitModulus(Complex(re, im)) {}
  explicit UnitModulus(Complex w) {
    const double r = std::abs(w);
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw Error(ErrorKind::InvalidArgument, "unit modulus needs a nonzero finite value");
    }
    w_ = w / r;
  }
  static UnitModulus from_angle(double phi) { return UnitModulus(std::polar(1.0, phi)); }

  Complex value() const { return w_; }
  double angle() const { return std::arg(w_); }

 private:
  Complex w_{1.0, 0.0};
};

inline DiskCoeff rotate(const UnitModulus& w, const DiskCoeff& z) {
  return DiskCoeff::with_gap(w.value() * z.value(), z.gap());
}

/// Hyperbolic distance log((1+t)/(1-t)), t = |z - w| / |1 - conj(w) z|.
inline double hyp_dist(const DiskCoeff& z, const DiskCoeff& w) {
  const Complex num = z.value() - w.value();
  if (num == Complex(0.0, 0.0)) return 0.0;
  const double den_abs = std::abs(1.0 - std::conj(w.value()) * z.value());
  const double t = std::abs(num) / den_abs;
  if (t < 0.5) return 2.0 * std::atanh(t);
  // 1 - t^2 = (1-|z|^2)(1-|w|^2) / |1 - conj(w) z|^2
  const double one_minus_t_sq = z.gap() * w.gap() / (den_abs * den_abs);
  return 2.0 * std::log1p(std::min(t, 1.0)) - std::log(one_minus_t_sq);
}

/// T_a(z) = (a + z) / (1 + conj(a) z).
inline DiskCoeff mobius_T(const DiskCoeff& a, const DiskCoeff& z) {
  const Complex den = 1.0 + std::conj(a.value()) * z.value();
  const double den_sq = std::norm(den);
  return DiskCoeff::with_gap((a.value() + z.value()) / den, a.gap() * z.gap() / den_sq);
}

/// Constants of the Mobius Lipschitz estimate for a, b in B_{delta'} and
/// z in B_delta (all Euclidean disks about 0).
struct LipschitzConstants {
  double delta = 0.0;          ///< bound on |z|
  double delta_prime = 0.0;    ///< bound on |a|, |b|
  double delta_dprime = 0.0;   ///< bound on |T_a(z)|
  double q1 = 1.0;             ///< lower bound of |(1 + conj(a) z)(1 + conj(b) z)|
  double q2 = 0.0;             ///< |a conj(b) - conj(a) b| <= q2 |a - b|
  double c1_euclidean = 1.0;   ///< |T_a(z) - T_b(z)| <= c1_euclidean |a - b|
  double c1 = 2.0;             ///< same inequality in the hyperbolic metric
};

inline double delta_from_beta(double beta) {
  if (!(beta >= 1.0)) throw Error(ErrorKind::InvalidArgument, "beta must be >= 1");
  const double b2 = beta * beta;
  return (b2 - 1.0) / (b2 + 1.0);
}

/// Lipschitz constants for explicit radii delta (z) and delta' (a, b).
///
/// The numerator of T_a(z) - T_b(z) is
///   (a - b) + (a conj(b) - conj(a) b) z + (conj(b) - conj(a)) z^2,
/// bounded by (1 + q2 delta + delta^2) |a - b|; the denominator is at least
/// q1 = (1 - delta delta')^2. Euclidean and hyperbolic metrics on B_dbar
/// are compared through the conformal factor 2 / (1 - dbar^2).
inline LipschitzConstants lipschitz_constants_for_radii(double delta, double delta_prime) {
  if (!(delta >= 0.0 && delta < 1.0)) throw Error(ErrorKind::InvalidArgument, "delta must lie in [0,1)");
  if (!(delta_prime >= 0.0 && delta_prime < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "delta_prime must lie in [0,1)");
  }
  LipschitzConstants c;
  c.delta = delta;
  c.delta_prime = delta_prime;
  c.delta_dprime = (delta + delta_prime) / (1.0 + delta * delta_prime);
  const double d = 1.0 - delta_prime * delta;
  c.q1 = d * d;
  c.q2 = 2.0 * delta_prime;
  c.c1_euclidean = (1.0 + c.q2 * delta + delta * delta) / c.q1;
  const double dbar = std::max({delta, delta_prime, c.delta_dprime});
  c.c1 = c.c1_euclidean * 2.0 / (1.0 - dbar * dbar);
  return c;
}

inline LipschitzConstants lipschitz_constants(double beta, double delta_prime) {
  return lipschitz_constants_for_radii(delta_from_beta(beta), delta_prime);
}

}  // namespace torusdyn
