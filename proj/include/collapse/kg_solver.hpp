#pragma once

// Klein-Gordon equation in light-cone coordinates,
//
//   d^2 psi / dx+ dx-  =  -(mu^2 / 4) psi,      mu = m c / hbar,
//
// posed as a Goursat problem: psi is given on the two null rays x- = apex-
// and x+ = apex+ bounding the forward cone of an apex event, and is marched
// into the cone. Alongside the full solver, the zeroth-order collapsed solution
// (quantum evolution neglected) is built by transporting boundary data along
// lines of constant characteristic variable.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "collapse/error.hpp"
#include "collapse/geometry.hpp"
#include "collapse/wavefunction.hpp"

namespace collapse {

// Boundary data on the forward cone of `apex`. Both functions take the offset
// from the apex along their ray.
struct BoundaryData {
  SpacetimeEvent apex;
  std::function<complex(double)> on_xminus_zero;  // psi(apex+ + s, apex-)
  std::function<complex(double)> on_xplus_zero;   // psi(apex+, apex- + s)
};

struct CharacteristicGrid {
  SpacetimeEvent origin;
  double extent = 0.0;
  int n = 0;
  double mu = 0.0;
  std::vector<complex> values;  // row-major, (i: x+ index, j: x- index)

  double spacing() const { return extent / (n - 1); }
  complex& at(int i, int j) { return values[static_cast<std::size_t>(i) * n + j]; }
  const complex& at(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
  double x_plus(int i) const { return origin.x_plus() + i * spacing(); }
  double x_minus(int j) const { return origin.x_minus() + j * spacing(); }
  SpacetimeEvent event(int i, int j) const {
    return SpacetimeEvent::from_lightcone(x_plus(i), x_minus(j));
  }
};

inline double default_extent(double beta) { return 8.0 / std::sqrt(beta); }

namespace detail {

inline void check_grid(double extent, int n) {
  if (n < 2) throw PreconditionError("grid needs n >= 2");
  if (!(extent > 0.0) || !std::isfinite(extent)) throw PreconditionError("grid extent must be > 0");
}

inline void check_apex(const BoundaryData& bd) {
  if (!bd.on_xminus_zero || !bd.on_xplus_zero) {
    throw PreconditionError("boundary data is missing a ray");
  }
  const complex a = bd.on_xminus_zero(0.0);
  const complex b = bd.on_xplus_zero(0.0);
  if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) {
    throw PreconditionError("boundary rays disagree at the apex");
  }
}

inline void check_on_shell(double energy, double momentum, double mass) {
  if (!(mass > 0.0)) throw DomainError("mass must be > 0");
  const double off = energy * energy - momentum * momentum - mass * mass;
  if (std::abs(off) > 1e-9 * std::max(1.0, energy * energy)) {
    throw DomainError("(E, p) is off shell");
  }
}

}  // namespace detail

// Single hit at the origin on a plane wave of four-momentum (E, p):
//   psi(x+, 0) = N exp(-i (E-p) x+ / 2) exp(-beta (E-p)^2 x+^2 / (8 m^2))
//   psi(0, x-) = N exp(-i (E+p) x- / 2) exp(-beta (E+p)^2 x-^2 / (8 m^2))
inline BoundaryData collapse_boundary(double energy, double momentum, double beta, double mass,
                                      double norm = 1.0) {
  detail::check_on_shell(energy, momentum, mass);
  if (!(beta >= 0.0)) throw DomainError("beta must be >= 0");
  const double em = energy - momentum;
  const double ep = energy + momentum;
  const double k = beta / (8.0 * mass * mass);
  BoundaryData bd;
  bd.on_xminus_zero = [=](double xp) {
    return norm * std::exp(complex(-k * em * em * xp * xp, -0.5 * em * xp));
  };
  bd.on_xplus_zero = [=](double xm) {
    return norm * std::exp(complex(-k * ep * ep * xm * xm, -0.5 * ep * xm));
  };
  return bd;
}

// Plane wave N exp(-i E t + i p z) restricted to the two rays of `apex`.
inline BoundaryData plane_wave_boundary(double energy, double momentum,
                                        SpacetimeEvent apex = {}, double norm = 1.0) {
  auto psi = [=](double xp, double xm) {
    return norm * std::exp(complex(0.0, -0.5 * ((energy - momentum) * xp +
                                                 (energy + momentum) * xm)));
  };
  BoundaryData bd;
  bd.apex = apex;
  bd.on_xminus_zero = [=](double s) { return psi(apex.x_plus() + s, apex.x_minus()); };
  bd.on_xplus_zero = [=](double s) { return psi(apex.x_plus(), apex.x_minus() + s); };
  return bd;
}

// Characteristic marching with trapezoidal quadrature of the right-hand side
// over each cell:
//   psi11 (1 + c) = psi10 + psi01 - psi00 - c (psi10 + psi01 + psi00),
//   c = mu^2 h^2 / 16.
// Second-order accurate.
inline CharacteristicGrid solve_goursat(const BoundaryData& bd, double mu, double extent, int n) {
  detail::check_grid(extent, n);
  detail::check_apex(bd);
  if (!(mu >= 0.0)) throw PreconditionError("mu must be >= 0");
  CharacteristicGrid g;
  g.origin = bd.apex;
  g.extent = extent;
  g.n = n;
  g.mu = mu;
  g.values.assign(static_cast<std::size_t>(n) * n, complex{});
  const double h = g.spacing();
  for (int i = 0; i < n; ++i) g.at(i, 0) = bd.on_xminus_zero(i * h);
  for (int j = 1; j < n; ++j) g.at(0, j) = bd.on_xplus_zero(j * h);
  const double c = mu * mu * h * h / 16.0;
  const double inv = 1.0 / (1.0 + c);
  for (int i = 1; i < n; ++i) {
    for (int j = 1; j < n; ++j) {
      const complex p10 = g.at(i, j - 1);
      const complex p01 = g.at(i - 1, j);
      const complex p00 = g.at(i - 1, j - 1);
      g.at(i, j) = (p10 + p01 - p00 - c * (p10 + p01 + p00)) * inv;
    }
  }
  return g;
}

// psi = planewave(E, p) * h(lambda), lambda = ((E-p) dx+ - (E+p) dx-) / m,
// with h read off the boundary rays. At rest lambda = x+ - x- = 2 z (relative
// to the apex); for p != 0 lambda is the rest-frame coordinate of the boosted
// packet, so the construction is frame independent.
class ZerothOrderSolution {
 public:
  ZerothOrderSolution(BoundaryData bd, double energy, double momentum)
      : bd_(std::move(bd)), em_(energy - momentum), ep_(energy + momentum) {
    detail::check_apex(bd_);
    if (!(em_ > 0.0) || !(ep_ > 0.0)) throw DomainError("zeroth-order solution needs E > |p|");
    mass_ = std::sqrt(em_ * ep_);
  }

  // Reduced boundary profiles as functions of the characteristic variable.
  complex h_from_xminus_ray(double lambda) const {
    const double s = mass_ * lambda / em_;
    return bd_.on_xminus_zero(s) / plane_wave(s, 0.0);
  }
  complex h_from_xplus_ray(double lambda) const {
    const double s = -mass_ * lambda / ep_;
    return bd_.on_xplus_zero(s) / plane_wave(0.0, s);
  }

  // Max |h_A - h_B| over lambda in [-range, range], relative to max |h|.
  double discrepancy(double range, int samples = 401) const {
    double diff = 0.0;
    double peak = 0.0;
    for (int k = 0; k < samples; ++k) {
      const double lambda = -range + 2.0 * range * k / (samples - 1);
      const complex a = h_from_xminus_ray(lambda);
      const complex b = h_from_xplus_ray(lambda);
      diff = std::max(diff, std::abs(a - b));
      peak = std::max({peak, std::abs(a), std::abs(b)});
    }
    return peak > 0.0 ? diff / peak : diff;
  }

  // psi at offsets (dx+, dx-) from the apex.
  complex at_offset(double dxp, double dxm) const {
    const double lambda = (em_ * dxp - ep_ * dxm) / mass_;
    const complex h = lambda >= 0.0 ? h_from_xminus_ray(lambda) : h_from_xplus_ray(lambda);
    return plane_wave(dxp, dxm) * h;
  }

  complex operator()(SpacetimeEvent e) const {
    return at_offset(e.x_plus() - bd_.apex.x_plus(), e.x_minus() - bd_.apex.x_minus());
  }

  const BoundaryData& boundary() const { return bd_; }

 private:
  complex plane_wave(double dxp, double dxm) const {
    return std::exp(complex(0.0, -0.5 * (em_ * dxp + ep_ * dxm)));
  }

  BoundaryData bd_;
  double em_;
  double ep_;
  double mass_ = 0.0;
};

inline constexpr double kBoundaryConsistencyTol = 1e-8;

// Throws ConsistencyError when the two rays do not describe one profile h
// over lambda in [-check_range, check_range].
inline ZerothOrderSolution zeroth_order_solution(const BoundaryData& bd, double energy,
                                                 double momentum, double check_range) {
  ZerothOrderSolution sol(bd, energy, momentum);
  const double d = sol.discrepancy(check_range);
  if (d > kBoundaryConsistencyTol) {
    throw ConsistencyError("boundary data is not a function of the characteristic variable", d);
  }
  return sol;
}

// Zeroth-order solution on a characteristic grid. At rest, lambda of node
// (i, j) equals that of boundary node (i - j, 0) or (0, j - i), so the interior
// is filled from sampled boundary values alone.
inline CharacteristicGrid zeroth_order_grid(const BoundaryData& bd, double energy,
                                            double momentum, double extent, int n) {
  detail::check_grid(extent, n);
  const ZerothOrderSolution sol = zeroth_order_solution(bd, energy, momentum, extent);
  CharacteristicGrid g;
  g.origin = bd.apex;
  g.extent = extent;
  g.n = n;
  g.mu = std::sqrt((energy - momentum) * (energy + momentum));
  g.values.assign(static_cast<std::size_t>(n) * n, complex{});
  const double h = g.spacing();
  auto pw = [&](double dxp, double dxm) {
    return std::exp(complex(0.0, -0.5 * ((energy - momentum) * dxp + (energy + momentum) * dxm)));
  };
  if (momentum == 0.0) {
    std::vector<complex> along_plus(n);
    std::vector<complex> along_minus(n);
    for (int k = 0; k < n; ++k) {
      along_plus[k] = bd.on_xminus_zero(k * h) / pw(k * h, 0.0);
      along_minus[k] = bd.on_xplus_zero(k * h) / pw(0.0, k * h);
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const complex w = i >= j ? along_plus[i - j] : along_minus[j - i];
        g.at(i, j) = pw(i * h, j * h) * w;
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) g.at(i, j) = sol.at_offset(i * h, j * h);
    }
  }
  return g;
}

// Rest-frame zeroth-order solution inside the cone of a single hit at X:
// N exp(-i m t) exp(-beta (z - z_X)^2 / 2).
inline std::function<complex(SpacetimeEvent)> collapsed_region(SpacetimeEvent hit, double beta,
                                                               double mass, double norm = 1.0) {
  return [=](SpacetimeEvent e) {
    const double d = e.z - hit.z;
    return norm * std::exp(complex(-0.5 * beta * d * d, -mass * e.t));
  };
}

// Boundary data on the cone of X3, the earliest event inside both forward
// cones of two spacelike hits with equal rest-frame momenta. Along each ray
// the wavefunction of the region collapsed by one hit is multiplied by the
// collapse factor exp((beta/2) alpha^2) of the other hit, whose cone the ray
// lies on. Coincident hits are accepted (the data then describe a single hit
// of strength 2 beta).
inline BoundaryData double_collapse_boundary(
    SpacetimeEvent x1, SpacetimeEvent x2, double beta, double mass,
    std::function<complex(SpacetimeEvent)> psi_w1,
    std::function<complex(SpacetimeEvent)> psi_w2) {
  if (!(x1 == x2) && !spacelike_separated(x1, x2)) {
    throw OrderingError(
        "double_collapse_boundary: hits are not spacelike; apply them sequentially");
  }
  if (!(beta > 0.0) || !(mass > 0.0)) throw DomainError("beta and mass must be > 0");
  // Label the hits so that `right` has the larger x+ (and the smaller x-).
  const bool swap = x1.x_plus() > x2.x_plus();
  const SpacetimeEvent left = swap ? x2 : x1;
  const SpacetimeEvent right = swap ? x1 : x2;
  auto psi_left = swap ? psi_w2 : psi_w1;
  auto psi_right = swap ? psi_w1 : psi_w2;

  const SpacetimeEvent apex = SpacetimeEvent::from_lightcone(right.x_plus(), left.x_minus());
  const FourVector rest{mass, 0.0};
  auto factor = [=](SpacetimeEvent from, SpacetimeEvent to) {
    return std::exp(0.5 * beta * collapse_distance_sq(rest, to - from));
  };
  BoundaryData bd;
  bd.apex = apex;
  // x- = apex-: the right-going ray lies on the cone of `left`.
  bd.on_xminus_zero = [=](double s) {
    const SpacetimeEvent e = SpacetimeEvent::from_lightcone(apex.x_plus() + s, apex.x_minus());
    return psi_right(e) * factor(left, e);
  };
  // x+ = apex+: the left-going ray lies on the cone of `right`.
  bd.on_xplus_zero = [=](double s) {
    const SpacetimeEvent e = SpacetimeEvent::from_lightcone(apex.x_plus(), apex.x_minus() + s);
    return psi_left(e) * factor(right, e);
  };
  return bd;
}

}  // namespace collapse
