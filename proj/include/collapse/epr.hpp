#pragma once

// Correlated two-particle state
//   psi = a phi1(z1) phi2(z2) + b chi1(z1) chi2(z2)
// with Gaussian one-particle packets exp(-alpha (z - c)^2): phi1 at z11,
// chi1 at z12 (particle 1), phi2 at z21, chi2 at z22 (particle 2).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

#include "collapse/collapse_process.hpp"
#include "collapse/error.hpp"
#include "collapse/wavefunction.hpp"

namespace collapse {

struct HitFactor {
  int particle = 1;
  double center = 0.0;
  double strength = 0.0;
};

struct TwoParticleState {
  complex a{1.0, 0.0};
  complex b{0.0, 0.0};
  double z11 = 0.0;
  double z12 = 0.0;
  double z21 = 0.0;
  double z22 = 0.0;
  double width_coeff = 1.0;
  std::vector<HitFactor> hit_factors;
};

struct EprCenters {
  double z11 = 0.0;
  double z12 = 0.0;
  double z21 = 0.0;
  double z22 = 0.0;
};

inline TwoParticleState make_epr(complex a, complex b, EprCenters c, double alpha) {
  const double total = std::norm(a) + std::norm(b);
  if (std::abs(total - 1.0) > 1e-10) {
    throw PreconditionError("make_epr: |a|^2 + |b|^2 must equal 1");
  }
  if (!(alpha > 0.0)) throw PreconditionError("make_epr: alpha must be > 0");
  auto fail = [](const char* inequality, double lhs, double rhs) {
    std::ostringstream os;
    os << "make_epr: " << inequality << " violated (" << lhs << " < " << rhs << ")";
    throw PreconditionError(os.str());
  };
  const double d1 = c.z11 - c.z12;
  const double d2 = c.z21 - c.z22;
  if (alpha * d1 * d1 < 25.0) fail("alpha (z11 - z12)^2 >= 25", alpha * d1 * d1, 25.0);
  if (alpha * d2 * d2 < 25.0) fail("alpha (z21 - z22)^2 >= 25", alpha * d2 * d2, 25.0);
  if (std::abs(c.z11 - c.z21) < 10.0 * std::abs(d1)) {
    fail("|z11 - z21| >= 10 |z11 - z12|", std::abs(c.z11 - c.z21), 10.0 * std::abs(d1));
  }
  return {a, b, c.z11, c.z12, c.z21, c.z22, alpha, {}};
}

namespace detail {

// Integral over z of exp(-2 alpha (z - c)^2) times |hit factor|^2 for every
// hit on `particle`, by completing the square one hit at a time. Returned as
// a log to keep strongly suppressed branches representable.
inline double log_suppressed_norm(const TwoParticleState& s, int particle, double center) {
  double coeff = 2.0 * s.width_coeff;
  double mean = center;
  double log_pref = 0.0;
  for (const HitFactor& h : s.hit_factors) {
    if (h.particle != particle || h.strength == 0.0) continue;
    const double g = coeff + h.strength;
    const double d = mean - h.center;
    log_pref -= coeff * h.strength / g * d * d;
    mean = (coeff * mean + h.strength * h.center) / g;
    coeff = g;
  }
  return log_pref + 0.5 * std::log(std::numbers::pi / coeff);
}

}  // namespace detail

// (psi-branch weight, chi-branch weight), normalized to sum to 1. The two
// branches are treated as orthogonal, which the construction geometry
// guarantees to far below double precision.
inline std::array<double, 2> branch_weights(const TwoParticleState& s) {
  if (std::norm(s.b) == 0.0) return {1.0, 0.0};
  if (std::norm(s.a) == 0.0) return {0.0, 1.0};
  const double lp = std::log(std::norm(s.a)) + detail::log_suppressed_norm(s, 1, s.z11) +
                    detail::log_suppressed_norm(s, 2, s.z21);
  const double lc = std::log(std::norm(s.b)) + detail::log_suppressed_norm(s, 1, s.z12) +
                    detail::log_suppressed_norm(s, 2, s.z22);
  const double m = std::max(lp, lc);
  const double wp = std::exp(lp - m);
  const double wc = std::exp(lc - m);
  return {wp / (wp + wc), wc / (wp + wc)};
}

inline TwoParticleState apply_particle_hit(TwoParticleState s, int particle, double center,
                                           double beta) {
  if (particle != 1 && particle != 2) throw PreconditionError("particle must be 1 or 2");
  if (!(beta >= 0.0)) throw PreconditionError("beta must be >= 0");
  s.hit_factors.push_back({particle, center, beta});
  return s;
}

// Spacelike hits on different branches: particle 1 at z11 (psi branch),
// particle 2 at z22 (chi branch).
inline TwoParticleState apply_incompatible_pair(TwoParticleState s, double beta) {
  if (!(beta > 0.0)) throw PreconditionError("apply_incompatible_pair: beta must be > 0");
  const double z11 = s.z11;
  const double z22 = s.z22;
  s = apply_particle_hit(std::move(s), 1, z11, beta);
  return apply_particle_hit(std::move(s), 2, z22, beta);
}

// Both particles hit on the psi branch.
inline TwoParticleState apply_compatible_pair(TwoParticleState s, double beta) {
  if (!(beta > 0.0)) throw PreconditionError("apply_compatible_pair: beta must be > 0");
  const double z11 = s.z11;
  const double z21 = s.z21;
  s = apply_particle_hit(std::move(s), 1, z11, beta);
  return apply_particle_hit(std::move(s), 2, z21, beta);
}

// Race with one particle per side: a hit on either peak of a particle is known
// to that particle's other peak at once and to the other particle after T.
inline TrialOutcome simulate_epr_trial(const ProcessParams& params, TrialRng& rng,
                                       std::vector<CollapseRecord>* log = nullptr) {
  return simulate_trial(params, rng, Topology::two_particle, log);
}

inline TrialOutcome simulate_epr_trial(const ProcessParams& params, std::int64_t trial_index,
                                       std::vector<CollapseRecord>* log = nullptr) {
  return simulate_trial(params, trial_index, Topology::two_particle, log);
}

inline McEstimate estimate_epr(const ProcessParams& params, unsigned lanes = 1) {
  return estimate(params, Topology::two_particle, lanes);
}

}  // namespace collapse
