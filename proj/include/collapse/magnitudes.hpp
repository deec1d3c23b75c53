#pragma once

// Order-of-magnitude estimates for a laboratory test: lambda T from apparatus
// parameters, the perception-time lower bound, and detectability sweeps.

#include <span>
#include <vector>

#include "collapse/error.hpp"
#include "collapse/series.hpp"

namespace collapse {

inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s
inline constexpr double kDefaultPerceptionTime = 1e-4;  // s

struct ApparatusParams {
  double L = 0.0;        // m
  double N = 1.0;        // particles in the apparatus
  double tau_col = 1e16;  // s, single-particle collapse time
  double tau_per = kDefaultPerceptionTime;
};

inline void validate(const ApparatusParams& p) {
  if (!(p.L >= 0.0)) throw DomainError("L must be >= 0");
  if (!(p.N > 0.0)) throw DomainError("N must be > 0");
  if (!(p.tau_col > 0.0)) throw DomainError("tau_col must be > 0");
  if (!(p.tau_per > 0.0)) throw DomainError("tau_per must be > 0");
}

inline double light_time(double L) { return L / kSpeedOfLight; }

inline double lambda_T(const ApparatusParams& p) {
  validate(p);
  return light_time(p.L) * (p.N / p.tau_col);
}

inline double perception_bound(const ApparatusParams& p) {
  validate(p);
  return light_time(p.L) / p.tau_per;
}

// Set when the apparatus would take longer to collapse than an observer
// takes to perceive the outcome.
inline bool perception_violated(const ApparatusParams& p) {
  return lambda_T(p) < perception_bound(p);
}

struct DetectabilityCell {
  double L = 0.0;
  double N = 0.0;
  double lambda_t = 0.0;
  double deviation = 0.0;  // P_series - a2; 0 when out of regime
  bool flagged = false;
  bool regime_ok = true;
};

inline std::vector<DetectabilityCell> detectability_sweep(std::span<const double> L_grid,
                                                          std::span<const double> N_grid,
                                                          double tau_col, double a2,
                                                          double threshold) {
  if (L_grid.empty() || N_grid.empty()) throw PreconditionError("sweep grids must be nonempty");
  if (!(a2 > 0.0 && a2 < 1.0)) throw DomainError("a2 must lie in (0, 1)");
  std::vector<DetectabilityCell> cells;
  cells.reserve(L_grid.size() * N_grid.size());
  for (double L : L_grid) {
    for (double N : N_grid) {
      DetectabilityCell c;
      c.L = L;
      c.N = N;
      c.lambda_t = lambda_T({L, N, tau_col, kDefaultPerceptionTime});
      c.regime_ok = regime(a2, c.lambda_t, 1, Mode::closed_series).ok;
      if (c.regime_ok) {
        c.deviation = total_probability(a2, c.lambda_t, 1, Mode::closed_series) - a2;
        c.flagged = std::abs(c.deviation) >= threshold;
      }
      cells.push_back(c);
    }
  }
  return cells;
}

}  // namespace collapse
