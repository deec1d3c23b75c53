#pragma once

// Collapse-race diagrams for the probability that peak 1 (single particle) or
// the psi branch (two correlated particles) dominates.
//
// Every diagram contributes  constant_part + p_coefficient * P  where P is the
// overall dominance probability; only the "incompatible pair then restart"
// diagrams (ii, iii, 2ii, 2iii) have a nonzero p_coefficient. Time is measured
// in units of the signal delay T, so the rate is lambda = lambdaT.
//
// Two evaluation modes:
//   closed_series  the O((lambda T)^2) Taylor polynomial of each diagram
//   quadrature     the exact diagram integral, adaptive Gauss-Kronrod

#include <array>
#include <cmath>
#include <span>
#include <string_view>

#include "collapse/error.hpp"
#include "collapse/quadrature.hpp"

namespace collapse {

enum class Diagram {
  i, ii, iii, iv, v, vi, vii, viii,
  two_i, two_ii, two_iii, two_iv, two_v, two_vi, two_vii,
};

inline constexpr std::array<Diagram, 8> kSingleParticleDiagrams = {
    Diagram::i, Diagram::ii, Diagram::iii, Diagram::iv,
    Diagram::v, Diagram::vi, Diagram::vii, Diagram::viii};

inline constexpr std::array<Diagram, 7> kTwoParticleDiagrams = {
    Diagram::two_i, Diagram::two_ii,  Diagram::two_iii, Diagram::two_iv,
    Diagram::two_v, Diagram::two_vi, Diagram::two_vii};

constexpr int particle_count(Diagram d) { return d >= Diagram::two_i ? 2 : 1; }

constexpr std::string_view label(Diagram d) {
  constexpr std::array<std::string_view, 15> names = {
      "i", "ii", "iii", "iv", "v", "vi", "vii", "viii",
      "2i", "2ii", "2iii", "2iv", "2v", "2vi", "2vii"};
  return names[static_cast<std::size_t>(d)];
}

inline std::span<const Diagram> diagrams_for(int particles) {
  if (particles == 1) return kSingleParticleDiagrams;
  if (particles == 2) return kTwoParticleDiagrams;
  throw DomainError("particle count must be 1 or 2");
}

enum class Mode { closed_series, quadrature };

struct DiagramResult {
  double constant_part = 0.0;
  double p_coefficient = 0.0;
  Mode mode = Mode::closed_series;
};

// Coefficients of 1, x, x^2 (x = lambda T) of the truncated closed forms.
struct DiagramSeries {
  std::array<double, 3> constant{};
  std::array<double, 3> p{};
};

namespace detail {

inline void check_a2(double a2) {
  if (!(a2 >= 0.0 && a2 <= 1.0)) throw DomainError("a2 must lie in [0, 1]");
}

inline void check_lambda_t(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("lambdaT must be finite and >= 0");
}

inline double poly(const std::array<double, 3>& c, double x) { return c[0] + x * (c[1] + x * c[2]); }

}  // namespace detail

// Truncated expansion of each diagram integral to second order.
inline DiagramSeries diagram_series(Diagram d, double a2) {
  detail::check_a2(a2);
  const double s = a2;
  const double u = 1.0 - a2;
  const double su = s * u;
  DiagramSeries r;
  switch (d) {
    case Diagram::i:
      r.constant = {s, -s * u, 0.5 * s * u * u};
      break;
    case Diagram::ii:
    case Diagram::iii:
      r.p = {0.0, su, -3.5 * su};
      break;
    case Diagram::iv:
      r.constant = {0.0, 0.0, 1.5 * su};
      break;
    case Diagram::v:
      r.constant = {0.0, 0.0, 1.5 * s * su};
      break;
    case Diagram::vi:
      r.constant = {0.0, 0.0, 0.5 * s * su};
      break;
    case Diagram::vii:
      // The printed coefficient 1/2 |a|^2 |b|^4 does not follow from the
      // integrand; the integrand gives 1/2 |a|^2 |b|^2.
      r.constant = {0.0, 0.0, 0.5 * su};
      break;
    case Diagram::viii:
      r.constant = {0.0, 0.0, 0.5 * s * su};
      break;
    case Diagram::two_i:
      // Integrand expansion: |a|^2 (1 - x|b|^2 + x^2 |b|^2 / 2).
      r.constant = {s, -s * u, 0.5 * su};
      break;
    case Diagram::two_ii:
    case Diagram::two_iii:
      r.p = {0.0, su, -3.0 * su};
      break;
    case Diagram::two_iv:
      r.constant = {0.0, 0.0, 0.5 * s * su};
      break;
    case Diagram::two_v:
      r.constant = {0.0, 0.0, 1.5 * su};
      break;
    case Diagram::two_vi:
      r.constant = {0.0, 0.0, 0.5 * su};
      break;
    case Diagram::two_vii:
      r.constant = {0.0, 0.0, 0.5 * s * su};
      break;
  }
  return r;
}

namespace detail {

// Exact diagram integrals with T = 1 and rate x.
inline DiagramResult diagram_quadrature(Diagram d, double s, double x) {
  using std::exp;
  const double u = 1.0 - s;
  DiagramResult r{0.0, 0.0, Mode::quadrature};
  switch (d) {
    case Diagram::i:
      r.constant_part = s * exp(-x * u);
      break;
    case Diagram::ii:
    case Diagram::iii:
      r.p_coefficient = s * integrate(
          [&](double t) {
            return exp(-x * u) * x * u * exp(-x * (1.0 + t) * s) * exp(-2.0 * x) *
                   exp(-x * t * u);
          },
          0.0, 1.0);
      break;
    case Diagram::iv:
      r.constant_part = s * integrate(
          [&](double t) {
            const double inner = integrate(
                [&](double tp) { return exp(-2.0 * x) * x * exp(-x * tp * u); }, 0.0, 1.0 + t);
            return exp(-x * u) * x * u * exp(-x * (1.0 + t) * s) * inner;
          },
          0.0, 1.0);
      break;
    case Diagram::v:
      r.constant_part = s * integrate(
          [&](double t) {
            return exp(-x * u) * x * u * x * s * (1.0 + t) * exp(-x * (1.0 + t) * s);
          },
          0.0, 1.0);
      break;
    case Diagram::vi:
      r.constant_part = u * integrate(
          [&](double t) {
            return exp(-x * s) * x * s * exp(-x * (1.0 + t) * u) * x * s * (1.0 - t);
          },
          0.0, 1.0);
      break;
    case Diagram::vii:
      r.constant_part = u * integrate(
          [&](double t) {
            const double inner = integrate(
                [&](double tp) { return x * exp(-2.0 * x) * exp(-x * tp * u); }, 0.0, 1.0 - t);
            return exp(-x * s) * x * s * exp(-x * (1.0 + t) * u) * inner;
          },
          0.0, 1.0);
      break;
    case Diagram::viii:
      r.constant_part = u * integrate(
          [&](double t) {
            const double inner = integrate(
                [&](double tp) {
                  return x * s * exp(-2.0 * x) * exp(-x * t * s) *
                         exp(-x * (1.0 - t + tp) * u);
                },
                0.0, t);
            return exp(-x * s) * x * s * exp(-x * (1.0 + t) * u) * inner;
          },
          0.0, 1.0);
      break;
    case Diagram::two_i:
      r.constant_part =
          s * (exp(-x) + integrate([&](double t) { return x * s * exp(-x * t); }, 0.0, 1.0));
      break;
    case Diagram::two_ii:
    case Diagram::two_iii:
      r.p_coefficient =
          s * integrate([&](double t) { return x * u * exp(-2.0 * x * (1.0 + t)); }, 0.0, 1.0);
      break;
    case Diagram::two_iv:
      r.constant_part = s * integrate(
          [&](double t) {
            const double inner = integrate(
                [&](double tp) {
                  return x * s * exp(-x * (1.0 + tp)) * exp(-x * (1.0 - t + tp));
                },
                0.0, t);
            return x * u * inner;
          },
          0.0, 1.0);
      break;
    case Diagram::two_v:
      r.constant_part = s * integrate(
          [&](double t) {
            const double inner =
                integrate([&](double tp) { return x * exp(-x * tp); }, 0.0, 1.0 + t);
            return x * u * exp(-x) * exp(-x * (1.0 + t)) * inner;
          },
          0.0, 1.0);
      break;
    case Diagram::two_vi:
      r.constant_part = u * integrate(
          [&](double t) {
            const double inner =
                integrate([&](double tp) { return x * exp(-x * tp); }, 0.0, 1.0 - t);
            return x * s * exp(-x) * exp(-x * (1.0 + t)) * inner;
          },
          0.0, 1.0);
      break;
    case Diagram::two_vii:
      r.constant_part = u * integrate(
          [&](double t) {
            const double inner = integrate(
                [&](double tp) { return x * s * exp(-x * (1.0 - t + tp)); }, 0.0, t);
            return x * s * exp(-x) * exp(-x * (1.0 + t)) * inner;
          },
          0.0, 1.0);
      break;
  }
  return r;
}

}  // namespace detail

inline DiagramResult diagram(Diagram d, double a2, double lambda_t, Mode mode) {
  detail::check_a2(a2);
  detail::check_lambda_t(lambda_t);
  if (mode == Mode::quadrature) return detail::diagram_quadrature(d, a2, lambda_t);
  const DiagramSeries c = diagram_series(d, a2);
  return {detail::poly(c.constant, lambda_t), detail::poly(c.p, lambda_t), Mode::closed_series};
}

inline DiagramResult diagram2(Diagram d, double a2, double lambda_t, Mode mode) {
  if (particle_count(d) != 2) throw DomainError("diagram2 expects a two-particle diagram");
  return diagram(d, a2, lambda_t, mode);
}

struct SeriesCoefficients {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

// Dominance probability P = c0 + c1 x + c2 x^2.
inline SeriesCoefficients series_coefficients(double a2) {
  detail::check_a2(a2);
  const double s = a2;
  const double u = 1.0 - a2;
  const double su = s * u;
  const double c1 = su * (s - u);
  return {s, c1, -0.5 * c1 * (5.0 - 4.0 * su)};
}

// Second-order Taylor coefficients of A / (1 - B) built from the diagram
// closed forms. Independent route to series_coefficients.
inline SeriesCoefficients resummed_coefficients(double a2, int particles) {
  std::array<double, 3> a{};
  std::array<double, 3> b{};
  for (Diagram d : diagrams_for(particles)) {
    const DiagramSeries c = diagram_series(d, a2);
    for (std::size_t k = 0; k < 3; ++k) {
      a[k] += c.constant[k];
      b[k] += c.p[k];
    }
  }
  // 1/(1-B) = 1 + b1 x + (b2 + b1^2) x^2 + ...   (b0 = 0)
  return {a[0], a[1] + a[0] * b[1], a[2] + a[1] * b[1] + a[0] * (b[2] + b[1] * b[1])};
}

struct RegimeCheck {
  double restart_coefficient = 0.0;  // B, summed p_coefficients
  bool ok = true;
};

// The expansion is trusted while B < 1/2 and, in series mode, while every
// truncated p_coefficient is still a probability (x(1 - 3.5x) >= 0).
inline RegimeCheck regime(double a2, double lambda_t, int particles, Mode mode) {
  RegimeCheck r;
  bool negative = false;
  for (Diagram d : diagrams_for(particles)) {
    const DiagramResult dr = diagram(d, a2, lambda_t, mode);
    r.restart_coefficient += dr.p_coefficient;
    if (dr.p_coefficient < 0.0 || dr.constant_part < 0.0) negative = true;
  }
  r.ok = r.restart_coefficient < 0.5 && !negative;
  return r;
}

namespace detail {

// Evaluated from the larger weight and mirrored, so that
// P(a2) + P(1 - a2) == 1 holds exactly in floating point.
inline double series_total(double a2, double x) {
  if (a2 < 0.5) return 1.0 - series_total(1.0 - a2, x);
  const SeriesCoefficients c = series_coefficients(a2);
  return c.c0 + x * (c.c1 + x * c.c2);
}

}  // namespace detail

// Probability that peak 1 (psi branch) dominates. Quadrature mode solves the
// self-consistency P = A + B P exactly; series mode returns its second-order
// expansion, which is the same polynomial for one and two particles.
inline double total_probability(double a2, double lambda_t, int particles, Mode mode) {
  detail::check_a2(a2);
  detail::check_lambda_t(lambda_t);
  diagrams_for(particles);
  if (mode == Mode::closed_series) {
    if (!regime(a2, lambda_t, particles, mode).ok) {
      throw RegimeError("total_probability: lambdaT outside the series regime");
    }
    return detail::series_total(a2, lambda_t);
  }
  double a = 0.0;
  double b = 0.0;
  for (Diagram d : diagrams_for(particles)) {
    const DiagramResult dr = diagram(d, a2, lambda_t, mode);
    a += dr.constant_part;
    b += dr.p_coefficient;
  }
  if (b >= 0.5) throw RegimeError("total_probability: restart coefficient B >= 0.5");
  return a / (1.0 - b);
}

}  // namespace collapse
