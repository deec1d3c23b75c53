#pragma once

// Minkowski 1+1 geometry in natural units (c = 1), metric signature (+,-).

#include <cmath>
#include <utility>

#include "collapse/error.hpp"

namespace collapse {

struct FourVector {
  double t = 0.0;
  double z = 0.0;

  friend constexpr FourVector operator+(FourVector a, FourVector b) {
    return {a.t + b.t, a.z + b.z};
  }
  friend constexpr FourVector operator-(FourVector a, FourVector b) {
    return {a.t - b.t, a.z - b.z};
  }
  friend constexpr FourVector operator*(double k, FourVector a) {
    return {k * a.t, k * a.z};
  }
  friend constexpr bool operator==(FourVector, FourVector) = default;
};

constexpr double dot(FourVector u, FourVector v) { return u.t * v.t - u.z * v.z; }

struct LightCone {
  double plus = 0.0;   // t + z
  double minus = 0.0;  // t - z
};

struct SpacetimeEvent {
  double t = 0.0;
  double z = 0.0;

  constexpr double x_plus() const { return t + z; }
  constexpr double x_minus() const { return t - z; }

  static constexpr SpacetimeEvent from_lightcone(double x_plus, double x_minus) {
    return {0.5 * (x_plus + x_minus), 0.5 * (x_plus - x_minus)};
  }

  friend constexpr FourVector operator-(SpacetimeEvent a, SpacetimeEvent b) {
    return {a.t - b.t, a.z - b.z};
  }
  friend constexpr bool operator==(SpacetimeEvent, SpacetimeEvent) = default;
};

constexpr LightCone lightcone_coords(SpacetimeEvent e) {
  return {e.x_plus(), e.x_minus()};
}

// Closed forward cone: the boundary rays belong to the cone.
constexpr bool in_forward_cone(SpacetimeEvent origin, SpacetimeEvent e) {
  return e.x_plus() >= origin.x_plus() && e.x_minus() >= origin.x_minus();
}

// Strictly spacelike separation (neither event on or inside the other's cone).
constexpr bool spacelike_separated(SpacetimeEvent a, SpacetimeEvent b) {
  const FourVector d = b - a;
  return dot(d, d) < 0.0;
}

inline FourVector boost(double velocity, FourVector v) {
  if (!(std::abs(velocity) < 1.0)) {
    throw DomainError("boost: |velocity| must be < 1");
  }
  const double gamma = 1.0 / std::sqrt((1.0 - velocity) * (1.0 + velocity));
  return {gamma * (v.t - velocity * v.z), gamma * (v.z - velocity * v.t)};
}

inline SpacetimeEvent boost(double velocity, SpacetimeEvent e) {
  const FourVector b = boost(velocity, FourVector{e.t, e.z});
  return {b.t, b.z};
}

// Relative tolerance under which a displacement counts as null.
inline constexpr double kNullTolerance = 1e-9;

namespace detail {

inline void check_collapse_inputs(FourVector p, FourVector dx) {
  if (!(dot(p, p) > 0.0)) {
    throw DomainError("collapse distance: momentum vector must be timelike");
  }
  const double scale = dx.t * dx.t + dx.z * dx.z;
  if (std::abs(dot(dx, dx)) > kNullTolerance * scale) {
    throw PreconditionError("collapse distance: displacement is not a null vector");
  }
}

}  // namespace detail

// Invariant squared distance alpha.alpha = -(P.dx)^2 / (P.P) between a point
// on the forward light cone (reached by the null displacement dx) and the
// worldline of the momentum vector P. Always <= 0; equals -dz^2 in the rest
// frame of P.
inline double collapse_distance_sq(FourVector p, FourVector dx) {
  detail::check_collapse_inputs(p, dx);
  const double pdx = dot(p, dx);
  return -(pdx * pdx) / dot(p, p);
}

// Component of dx Minkowski-orthogonal to P.
inline FourVector alpha_vector(FourVector p, FourVector dx) {
  detail::check_collapse_inputs(p, dx);
  const double k = dot(p, dx) / dot(p, p);
  return dx - k * p;
}

}  // namespace collapse
