#pragma once

// One-dimensional wavefunctions represented as finite sums of complex
// Gaussian packets
//
//   psi(t, z) = sum_k A_k exp(-gamma_k (z - c_k)^2) exp(-i E_k t + i p_k z)
//
// All algebra (hits, overlaps, norms, Bohm momentum) is done in closed form on
// the term list. The treatment is quasi-static: free spreading between hits is
// neglected and time enters only through the plane-wave phases.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "collapse/error.hpp"
#include "collapse/geometry.hpp"

namespace collapse {

using complex = std::complex<double>;

struct GaussianTerm {
  complex amplitude{1.0, 0.0};
  double center = 0.0;
  double width_coeff = 1.0;  // gamma in exp(-gamma (z - c)^2)
  double energy = 0.0;
  double momentum = 0.0;

  complex operator()(double t, double z) const {
    const double d = z - center;
    return amplitude * std::exp(complex(-width_coeff * d * d, momentum * z - energy * t));
  }
};

struct WaveState {
  std::vector<GaussianTerm> terms;
  double mass = 1.0;

  complex operator()(double t, double z) const {
    complex sum{0.0, 0.0};
    for (const auto& term : terms) sum += term(t, z);
    return sum;
  }
};

struct HitRecord {
  SpacetimeEvent event;
  double strength = 1.0;  // beta
  FourVector momentum_vector{1.0, 0.0};
};

// <a|b> = integral of conj(a) b over the real line at time t.
inline complex overlap(const GaussianTerm& a, const GaussianTerm& b, double t = 0.0) {
  const double g = a.width_coeff + b.width_coeff;
  const double dc = a.center - b.center;
  const double mean = (a.width_coeff * a.center + b.width_coeff * b.center) / g;
  const double k = b.momentum - a.momentum;
  const double real_exp = -(a.width_coeff * b.width_coeff / g) * dc * dc - k * k / (4.0 * g);
  const double phase = k * mean + (a.energy - b.energy) * t;
  return std::conj(a.amplitude) * b.amplitude * std::sqrt(std::numbers::pi / g) *
         std::exp(complex(real_exp, phase));
}

inline double norm_sq(std::span<const GaussianTerm> terms, double t = 0.0) {
  double sum = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    sum += overlap(terms[i], terms[i], t).real();
    for (std::size_t j = i + 1; j < terms.size(); ++j) {
      sum += 2.0 * overlap(terms[i], terms[j], t).real();
    }
  }
  return sum;
}

inline double norm_sq(const WaveState& state, double t = 0.0) { return norm_sq(state.terms, t); }

inline void validate(const WaveState& state) {
  if (state.terms.empty()) throw PreconditionError("wave state has no terms");
  for (const auto& term : state.terms) {
    if (!(term.width_coeff > 0.0)) {
      throw PreconditionError("gaussian term width_coeff must be > 0");
    }
  }
}

// Normalized at t = 0.
inline WaveState normalize(WaveState state) {
  validate(state);
  const double n2 = norm_sq(state);
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw PreconditionError("wave state has zero or non-finite norm");
  }
  const double scale = 1.0 / std::sqrt(n2);
  for (auto& term : state.terms) term.amplitude *= scale;
  return state;
}

// Normalized superposition a exp(-alpha (z-z1)^2) + b exp(-alpha (z-z2)^2) at
// rest with mass m.
inline WaveState two_peak_state(complex a, complex b, double alpha, double z1, double z2,
                                double mass = 1.0) {
  WaveState s;
  s.mass = mass;
  s.terms.push_back({a, z1, alpha, mass, 0.0});
  s.terms.push_back({b, z2, alpha, mass, 0.0});
  // Rescale each packet to unit norm so |a|^2, |b|^2 are the branch weights.
  for (auto& term : s.terms) {
    term.amplitude *= std::pow(2.0 * alpha / std::numbers::pi, 0.25);
  }
  return s;
}

// Four-vector Re(p_op psi / psi) with p_op = (i d/dt, -i d/dz).
inline FourVector bohm_momentum(const WaveState& state, SpacetimeEvent at) {
  validate(state);
  complex psi{0.0, 0.0};
  complex e_psi{0.0, 0.0};
  complex p_psi{0.0, 0.0};
  double peak = 0.0;
  for (const auto& term : state.terms) {
    const complex v = term(at.t, at.z);
    psi += v;
    e_psi += term.energy * v;
    p_psi += complex(term.momentum, 2.0 * term.width_coeff * (at.z - term.center)) * v;
    peak = std::max(peak, std::abs(term.amplitude));
  }
  if (std::abs(psi) < 1e-12 * peak) {
    throw NodeError("bohm_momentum: wavefunction vanishes at the evaluation point");
  }
  return {(e_psi / psi).real(), (p_psi / psi).real()};
}

// Multiply every term by exp(-(beta/2)(z - z1)^2) and complete the square.
// No renormalization.
inline WaveState apply_factor(WaveState state, double beta, double z1) {
  const double half = 0.5 * beta;
  for (auto& term : state.terms) {
    const double g = term.width_coeff + half;
    const double d = term.center - z1;
    term.amplitude *= std::exp(-(term.width_coeff * half / g) * d * d);
    term.center = (term.width_coeff * term.center + half * z1) / g;
    term.width_coeff = g;
  }
  return state;
}

namespace detail {

inline void check_hit(const HitRecord& hit) {
  if (!(hit.strength > 0.0)) throw PreconditionError("hit strength must be > 0");
  if (!(dot(hit.momentum_vector, hit.momentum_vector) > 0.0)) {
    throw DomainError("hit momentum vector must be timelike");
  }
}

}  // namespace detail

// Zeroth-order collapse in the rest frame of the hit momentum: the state
// inside the forward cone of the hit is the old state times the hit Gaussian.
inline WaveState apply_hit(const WaveState& state, const HitRecord& hit) {
  detail::check_hit(hit);
  return normalize(apply_factor(state, hit.strength, hit.event.z));
}

// Two spacelike hits with equal momentum vectors. The product of the two hit
// Gaussians is formed first, symmetrically in the two hits, so swapping them
// gives a bit-identical result.
inline WaveState apply_double_hit(const WaveState& state, const HitRecord& hit1,
                                  const HitRecord& hit2) {
  detail::check_hit(hit1);
  detail::check_hit(hit2);
  const FourVector dp = hit1.momentum_vector - hit2.momentum_vector;
  const double scale = std::abs(hit1.momentum_vector.t) + std::abs(hit2.momentum_vector.t);
  if (std::abs(dp.t) + std::abs(dp.z) > 1e-12 * scale) {
    throw PreconditionError("apply_double_hit: hits must carry equal momentum vectors");
  }
  const double b1 = hit1.strength;
  const double b2 = hit2.strength;
  const double z1 = hit1.event.z;
  const double z2 = hit2.event.z;
  const double total = b1 + b2;
  const double mid = (b1 * z1 + b2 * z2) / total;
  const double dz = z1 - z2;
  WaveState out = apply_factor(state, total, mid);
  const double prefactor = std::exp(-(b1 * b2 / (2.0 * total)) * dz * dz);
  for (auto& term : out.terms) term.amplitude *= prefactor;
  return normalize(std::move(out));
}

struct PeakShift {
  double z1 = 0.0;
  double z2 = 0.0;
};

// Centers of the two packets of width alpha after an incompatible pair of hits
// of strength beta, one on each packet.
inline PeakShift two_peak_shift(double alpha, double beta, double z1, double z2) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw PreconditionError("two_peak_shift: alpha and beta must be > 0");
  }
  const double k = 0.5 * beta / (alpha + beta);
  return {z1 + k * (z2 - z1), z2 + k * (z1 - z2)};
}

// True when the shifted centre sits well into the tail of the original peak:
// exp(-alpha beta^2 d^2 / (4 (alpha+beta)^2)) < threshold.
inline bool tail_shift_condition(double alpha, double beta, double separation,
                                 double threshold = 1e-3) {
  if (!(alpha > 0.0) || !(beta > 0.0) || separation < 0.0) {
    throw PreconditionError("tail_shift_condition: alpha, beta > 0 and separation >= 0");
  }
  const double ab = alpha + beta;
  const double q = alpha * beta * beta * separation * separation / (4.0 * ab * ab);
  return std::exp(-q) < threshold;
}

// Terms sharing a center form one peak; peaks are numbered in order of first
// appearance in the term list.
inline std::vector<std::vector<std::size_t>> peak_groups(const WaveState& state) {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<double> centers;
  for (std::size_t k = 0; k < state.terms.size(); ++k) {
    const double c = state.terms[k].center;
    auto it = std::find_if(centers.begin(), centers.end(), [c](double other) {
      return std::abs(other - c) <= 1e-9 * std::max(1.0, std::abs(c));
    });
    if (it == centers.end()) {
      centers.push_back(c);
      groups.push_back({k});
    } else {
      groups[static_cast<std::size_t>(it - centers.begin())].push_back(k);
    }
  }
  return groups;
}

// Born weight of every peak: squared norm of its term group over the sum of
// group norms. Peaks with non-negligible weight must satisfy
// gamma_min * (c_i - c_j)^2 >= 25.
inline std::vector<double> peak_weights(const WaveState& state) {
  validate(state);
  const auto groups = peak_groups(state);
  std::vector<double> w;
  std::vector<double> centers;
  std::vector<double> widths;
  for (const auto& g : groups) {
    std::vector<GaussianTerm> sub;
    double width = state.terms[g.front()].width_coeff;
    for (auto k : g) {
      sub.push_back(state.terms[k]);
      width = std::min(width, state.terms[k].width_coeff);
    }
    w.push_back(norm_sq(sub));
    centers.push_back(state.terms[g.front()].center);
    widths.push_back(width);
  }
  double total = 0.0;
  for (double x : w) total += x;
  if (!(total > 0.0)) throw PreconditionError("peak_weights: state has zero norm");
  for (double& x : w) x /= total;

  constexpr double kNegligible = 1e-12;
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = i + 1; j < w.size(); ++j) {
      if (w[i] < kNegligible || w[j] < kNegligible) continue;
      const double d = centers[i] - centers[j];
      if (std::min(widths[i], widths[j]) * d * d < 25.0) {
        throw PartitionError("peak_weights: peaks overlap (gamma * separation^2 < 25)");
      }
    }
  }
  return w;
}

inline double peak_weight(const WaveState& state, std::size_t peak_index) {
  const auto w = peak_weights(state);
  if (peak_index >= w.size()) throw PreconditionError("peak_weight: no such peak");
  return w[peak_index];
}

inline std::vector<complex> sample(const WaveState& state, double t,
                                   std::span<const double> z_grid) {
  std::vector<complex> out;
  out.reserve(z_grid.size());
  for (double z : z_grid) out.push_back(state(t, z));
  return out;
}

}  // namespace collapse
