#pragma once

// The unit flat torus M = R^2 / Z^2: points, distance, ball areas and
// sampling. kappa = pi and injectivity radius 1/2 are exact for this model.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <variant>
#include <vector>

#include "torusdyn/core.hpp"

namespace torusdyn {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double norm() const { return std::hypot(x, y); }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
};

/// Point of R^2/Z^2; coordinates are kept in [0,1).
class TorusPoint {
 public:
  TorusPoint() = default;
  TorusPoint(double x, double y) : x_(wrap(x)), y_(wrap(y)) {}

  double x() const { return x_; }
  double y() const { return y_; }

  TorusPoint operator+(Vec2 v) const { return {x_ + v.x, y_ + v.y}; }
  TorusPoint operator-(Vec2 v) const { return {x_ - v.x, y_ - v.y}; }

  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;

  static double wrap(double v) {
    double r = v - std::floor(v);
    // v slightly negative can round to exactly 1.0
    return r >= 1.0 ? 0.0 : r;
  }

 private:
  double x_ = 0.0;
  double y_ = 0.0;
};

struct MetricConstants {
  static constexpr double injectivity_radius = 0.5;
  static constexpr double kappa = kPi;
  static constexpr double total_area = 1.0;
};

/// Shortest lift of q - p: the minimum over the 9 integer translates.
inline Vec2 shortest_displacement(const TorusPoint& p, const TorusPoint& q) {
  const double dx = q.x() - p.x();
  const double dy = q.y() - p.y();
  Vec2 best{dx, dy};
  double best_sq = std::numeric_limits<double>::infinity();
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      const double tx = dx + i;
      const double ty = dy + j;
      const double sq = tx * tx + ty * ty;
      if (sq < best_sq) {
        best_sq = sq;
        best = {tx, ty};
      }
    }
  }
  return best;
}

inline double torus_distance(const TorusPoint& p, const TorusPoint& q) {
  return shortest_displacement(p, q).norm();
}

inline double ball_area(double r) {
  if (!(r >= 0.0)) throw Error(ErrorKind::InvalidArgument, "ball radius must be nonnegative");
  if (r > MetricConstants::injectivity_radius) {
    throw Error(ErrorKind::OutOfInjectivityRadius, "ball radius exceeds 1/2");
  }
  return MetricConstants::kappa * r * r;
}

struct GridSampling {
  int m = 0;
};

struct RandomSampling {
  int count = 0;
  std::uint64_t seed = 0;
};

using SampleMode = std::variant<GridSampling, RandomSampling>;

/// grid(m): the lattice {(i/m, j/m)} in row-major (i outer) order.
/// random(count, seed): i.i.d. uniform points, reproducible from the seed.
inline std::vector<TorusPoint> sample_points(const SampleMode& mode) {
  std::vector<TorusPoint> out;
  if (const auto* g = std::get_if<GridSampling>(&mode)) {
    if (g->m < 1) throw Error(ErrorKind::EmptyRequest, "grid size must be >= 1");
    out.reserve(static_cast<std::size_t>(g->m) * g->m);
    for (int i = 0; i < g->m; ++i)
      for (int j = 0; j < g->m; ++j)
        out.emplace_back(static_cast<double>(i) / g->m, static_cast<double>(j) / g->m);
    return out;
  }
  const auto& r = std::get<RandomSampling>(mode);
  if (r.count < 1) throw Error(ErrorKind::EmptyRequest, "sample count must be >= 1");
  std::mt19937_64 rng(r.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  out.reserve(r.count);
  for (int k = 0; k < r.count; ++k) {
    const double x = unit(rng);
    const double y = unit(rng);
    out.emplace_back(x, y);
  }
  return out;
}

/// Cell midpoints ((i+1/2)/m, (j+1/2)/m); nodes of the midpoint quadrature rule.
inline std::vector<TorusPoint> midpoint_grid(int m) {
  if (m < 1) throw Error(ErrorKind::EmptyRequest, "quadrature size must be >= 1");
  std::vector<TorusPoint> out;
  out.reserve(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) out.emplace_back((i + 0.5) / m, (j + 0.5) / m);
  return out;
}

/// m x m lattice with every point displaced uniformly by up to
/// +-jitter cell widths in each coordinate.
inline std::vector<TorusPoint> jittered_grid(int m, double jitter, std::uint64_t seed) {
  if (m < 1) throw Error(ErrorKind::EmptyRequest, "grid size must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> shift(-jitter, jitter);
  std::vector<TorusPoint> out;
  out.reserve(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double dx = shift(rng);
      const double dy = shift(rng);
      out.emplace_back((i + dx) / m, (j + dy) / m);
    }
  }
  return out;
}

}  // namespace torusdyn
