#pragma once

// Catalog of orientation-preserving torus diffeomorphisms with analytic
// Jacobians, closed-form inverses and an overflow-safe derivative cocycle.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <type_traits>
#include <variant>

#include "torusdyn/core.hpp"
#include "torusdyn/torus_geometry.hpp"

namespace torusdyn {

/// [[a, b], [c, d]] = [[du/dx, du/dy], [dv/dx, dv/dy]].
struct Jacobian2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  static Jacobian2 identity() { return {}; }

  double det() const { return a * d - b * c; }
  double frobenius_sq() const { return a * a + b * b + c * c + d * d; }
  double max_abs() const { return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)}); }

  Jacobian2 inverse() const {
    const double D = det();
    if (D == 0.0) throw Error(ErrorKind::Degenerate, "singular Jacobian");
    return {d / D, -b / D, -c / D, a / D};
  }

  Vec2 apply(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }

  friend Jacobian2 operator*(const Jacobian2& l, const Jacobian2& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
            l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
  }
  friend Jacobian2 operator*(double s, const Jacobian2& m) {
    return {s * m.a, s * m.b, s * m.c, s * m.d};
  }
  friend Jacobian2 operator-(const Jacobian2& l, const Jacobian2& r) {
    return {l.a - r.a, l.b - r.b, l.c - r.c, l.d - r.d};
  }
};

struct SingularValues {
  double s1 = 1.0;
  double s2 = 1.0;
};

/// Closed-form singular values from JᵀJ: s1^2 = (T + sqrt(T^2 - 4D^2)) / 2
/// with T = ||J||_F^2, D = det J. T^2 - 4D^2 is evaluated as the product
/// (T - 2D)(T + 2D) of two sums of squares, so there is no cancellation
/// for nearly conformal J.
inline SingularValues singular_values(const Jacobian2& j) {
  const double t_minus = (j.a - j.d) * (j.a - j.d) + (j.b + j.c) * (j.b + j.c);
  const double t_plus = (j.a + j.d) * (j.a + j.d) + (j.b - j.c) * (j.b - j.c);
  const double T = j.frobenius_sq();
  const double s1_sq = 0.5 * (T + std::sqrt(t_minus * t_plus));
  const double s1 = std::sqrt(s1_sq);
  const double s2 = s1 > 0.0 ? std::abs(j.det()) / s1 : 0.0;
  return {s1, s2};
}

struct Translation {
  double wx = 0.0, wy = 0.0;
};

/// Integer matrix with determinant +1 acting on R^2/Z^2.
struct LinearAutomorphism {
  std::array<long, 4> m{1, 0, 0, 1};
};

/// (x, y) -> (x + w1, y + w2 + amplitude sin(2 pi frequency x)).
struct SkewProduct {
  double w1 = 0.0, w2 = 0.0, amplitude = 0.0;
  int frequency = 1;
};

/// Chirikov standard map with y' = y + (k / 2pi) sin(2 pi x), x' = x + y'.
struct StandardMap {
  double k = 0.0;
};

/// Translation by omega after a smooth radial twist about `center`:
/// points at distance d < radius are rotated by
/// strength * exp(1 - 1 / (1 - (d/radius)^2)); everything else is fixed.
/// The twist preserves distance to the center, hence area.
struct PerturbedTranslation {
  double wx = 0.0, wy = 0.0;
  TorusPoint center;
  double radius = 0.1;
  double strength = 0.0;
};

using MapKind = std::variant<Translation, LinearAutomorphism, SkewProduct, StandardMap, PerturbedTranslation>;

class MapSpec {
 public:
  explicit MapSpec(MapKind kind) : kind_(std::move(kind)) { validate(); }

  static MapSpec translation(double wx, double wy) { return MapSpec(Translation{wx, wy}); }
  static MapSpec linear(long a, long b, long c, long d) { return MapSpec(LinearAutomorphism{{a, b, c, d}}); }
  static MapSpec cat() { return linear(2, 1, 1, 1); }
  static MapSpec skew(double w1, double w2, double amplitude, int frequency) {
    return MapSpec(SkewProduct{w1, w2, amplitude, frequency});
  }
  static MapSpec standard_map(double k) { return MapSpec(StandardMap{k}); }
  static MapSpec perturbed_translation(double wx, double wy, TorusPoint center, double radius, double strength) {
    return MapSpec(PerturbedTranslation{wx, wy, center, radius, strength});
  }

  const MapKind& kind() const { return kind_; }

  std::string name() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, Translation>) return "translation";
          else if constexpr (std::is_same_v<T, LinearAutomorphism>) return "linear";
          else if constexpr (std::is_same_v<T, SkewProduct>) return "skew";
          else if constexpr (std::is_same_v<T, StandardMap>) return "standard_map";
          else return "perturbed_translation";
        },
        kind_);
  }

  /// True when Df is the same matrix at every point.
  bool has_constant_jacobian() const {
    return std::holds_alternative<Translation>(kind_) || std::holds_alternative<LinearAutomorphism>(kind_);
  }

 private:
  void validate() const {
    if (const auto* l = std::get_if<LinearAutomorphism>(&kind_)) {
      const long det = l->m[0] * l->m[3] - l->m[1] * l->m[2];
      if (det != 1) throw Error(ErrorKind::InvalidArgument, "linear map must have determinant +1");
    } else if (const auto* s = std::get_if<SkewProduct>(&kind_)) {
      if (s->frequency == 0) throw Error(ErrorKind::InvalidArgument, "skew frequency must be a nonzero integer");
    } else if (const auto* b = std::get_if<PerturbedTranslation>(&kind_)) {
      if (!(b->radius > 0.0 && b->radius < MetricConstants::injectivity_radius)) {
        throw Error(ErrorKind::InvalidArgument, "bump radius must lie in (0, 1/2)");
      }
    }
  }

  MapKind kind_;
};

namespace detail {

/// Twist angle and its derivative with respect to the distance d.
struct TwistProfile {
  double angle = 0.0;
  double slope = 0.0;
};

inline TwistProfile twist_profile(const PerturbedTranslation& b, double d) {
  const double t = d / b.radius;
  if (t >= 1.0) return {};
  const double u = 1.0 - t * t;
  const double phi = std::exp(1.0 - 1.0 / u);
  const double dphi_dt = phi * (-2.0 * t / (u * u));
  return {b.strength * phi, b.strength * dphi_dt / b.radius};
}

inline Vec2 rotated(Vec2 v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

}  // namespace detail

inline TorusPoint eval(const MapSpec& f, const TorusPoint& p) {
  return std::visit(
      [&](const auto& k) -> TorusPoint {
        using T = std::decay_t<decltype(k)>;
        const double x = p.x(), y = p.y();
        if constexpr (std::is_same_v<T, Translation>) {
          return {x + k.wx, y + k.wy};
        } else if constexpr (std::is_same_v<T, LinearAutomorphism>) {
          return {k.m[0] * x + k.m[1] * y, k.m[2] * x + k.m[3] * y};
        } else if constexpr (std::is_same_v<T, SkewProduct>) {
          return {x + k.w1, y + k.w2 + k.amplitude * std::sin(kTwoPi * k.frequency * x)};
        } else if constexpr (std::is_same_v<T, StandardMap>) {
          const double y1 = y + k.k / kTwoPi * std::sin(kTwoPi * x);
          return {x + y1, y1};
        } else {
          const Vec2 v = shortest_displacement(k.center, p);
          const auto prof = detail::twist_profile(k, v.norm());
          const TorusPoint twisted = k.center + detail::rotated(v, prof.angle);
          return twisted + Vec2{k.wx, k.wy};
        }
      },
      f.kind());
}

inline Jacobian2 jacobian(const MapSpec& f, const TorusPoint& p) {
  return std::visit(
      [&](const auto& k) -> Jacobian2 {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Translation>) {
          return Jacobian2::identity();
        } else if constexpr (std::is_same_v<T, LinearAutomorphism>) {
          return {static_cast<double>(k.m[0]), static_cast<double>(k.m[1]),
                  static_cast<double>(k.m[2]), static_cast<double>(k.m[3])};
        } else if constexpr (std::is_same_v<T, SkewProduct>) {
          const double w = kTwoPi * k.frequency;
          return {1.0, 0.0, k.amplitude * w * std::cos(w * p.x()), 1.0};
        } else if constexpr (std::is_same_v<T, StandardMap>) {
          const double kc = k.k * std::cos(kTwoPi * p.x());
          return {1.0 + kc, 1.0, kc, 1.0};
        } else {
          const Vec2 v = shortest_displacement(k.center, p);
          const double d = v.norm();
          const auto prof = detail::twist_profile(k, d);
          if (prof.angle == 0.0 && prof.slope == 0.0) return Jacobian2::identity();
          // D(R(a(d)) v) = R(a) (I + (J v) (a'(d) v / d)^T), J = rotation by pi/2
          const Vec2 jv{-v.y, v.x};
          const Vec2 grad = d > 0.0 ? (prof.slope / d) * v : Vec2{0.0, 0.0};
          const Jacobian2 inner{1.0 + jv.x * grad.x, jv.x * grad.y, jv.y * grad.x, 1.0 + jv.y * grad.y};
          const double c = std::cos(prof.angle), s = std::sin(prof.angle);
          return Jacobian2{c, -s, s, c} * inner;
        }
      },
      f.kind());
}

/// Central-difference Jacobian; cross-validation only.
inline Jacobian2 jacobian_fd(const MapSpec& f, const TorusPoint& p, double h = 1e-5) {
  const Vec2 dx = shortest_displacement(eval(f, p - Vec2{h, 0.0}), eval(f, p + Vec2{h, 0.0}));
  const Vec2 dy = shortest_displacement(eval(f, p - Vec2{0.0, h}), eval(f, p + Vec2{0.0, h}));
  const double s = 0.5 / h;
  return {s * dx.x, s * dy.x, s * dx.y, s * dy.y};
}

inline TorusPoint inverse_eval(const MapSpec& f, const TorusPoint& q) {
  return std::visit(
      [&](const auto& k) -> TorusPoint {
        using T = std::decay_t<decltype(k)>;
        const double x = q.x(), y = q.y();
        if constexpr (std::is_same_v<T, Translation>) {
          return {x - k.wx, y - k.wy};
        } else if constexpr (std::is_same_v<T, LinearAutomorphism>) {
          // adjugate of a determinant-one matrix
          return {k.m[3] * x - k.m[1] * y, -k.m[2] * x + k.m[0] * y};
        } else if constexpr (std::is_same_v<T, SkewProduct>) {
          const double x0 = x - k.w1;
          return {x0, y - k.w2 - k.amplitude * std::sin(kTwoPi * k.frequency * x0)};
        } else if constexpr (std::is_same_v<T, StandardMap>) {
          const double x0 = x - y;
          return {x0, y - k.k / kTwoPi * std::sin(kTwoPi * x0)};
        } else {
          const TorusPoint untranslated = q - Vec2{k.wx, k.wy};
          const Vec2 v = shortest_displacement(k.center, untranslated);
          const auto prof = detail::twist_profile(k, v.norm());
          return k.center + detail::rotated(v, -prof.angle);
        }
      },
      f.kind());
}

inline TorusPoint iterate(const MapSpec& f, TorusPoint p, int n) {
  for (int i = 0; i < n; ++i) p = eval(f, p);
  return p;
}

/// Df^n = exp(log_scale) * matrix, with matrix normalised to unit largest
/// singular value. log_det accumulates log det Df along the orbit so that
/// quantities depending on the smallest singular value stay accurate.
struct OrbitDerivative {
  Jacobian2 matrix;
  double log_scale = 0.0;
  double log_det = 0.0;

  /// log of the largest singular value of Df^n
  double log_sigma1() const { return log_scale + std::log(singular_values(matrix).s1); }
  /// log K = log(s1 / s2) = 2 log s1 - log det
  double log_dilatation() const { return 2.0 * log_sigma1() - log_det; }

  Jacobian2 reconstruct() const { return std::exp(log_scale) * matrix; }

  void renormalize() {
    const double s1 = singular_values(matrix).s1;
    matrix = (1.0 / s1) * matrix;
    log_scale += std::log(s1);
  }

  /// Left-multiply by one more factor Df at the next orbit point.
  void push(const Jacobian2& j) {
    const double det = j.det();
    if (!(det > 0.0)) throw Error(ErrorKind::Orientation, "Jacobian determinant must be positive");
    matrix = j * matrix;
    log_det += std::log(det);
    renormalize();
  }

  /// later * earlier, i.e. D(f^n)_{f^m p} * D(f^m)_p.
  friend OrbitDerivative operator*(const OrbitDerivative& later, const OrbitDerivative& earlier) {
    OrbitDerivative out;
    out.matrix = later.matrix * earlier.matrix;
    out.log_scale = later.log_scale + earlier.log_scale;
    out.log_det = later.log_det + earlier.log_det;
    out.renormalize();
    return out;
  }
};

inline OrbitDerivative orbit_jacobian(const MapSpec& f, TorusPoint p, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "orbit length must be >= 1");
  OrbitDerivative acc;
  for (int i = 0; i < n; ++i) {
    acc.push(jacobian(f, p));
    p = eval(f, p);
  }
  return acc;
}

}  // namespace torusdyn
