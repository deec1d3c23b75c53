#pragma once

// Event-driven simulation of the collapse race between two branches whose
// peaks sit on two sides separated by a light-travel delay T.
//
// Knowledge model. Each side k keeps a view n_k[b] = number of hits on branch
// b it knows about: its own hits immediately, the other side's hits after T.
// Under full suppression the branch weights seen by side k are
//   n_k[0] > n_k[1]  ->  (1, 0)
//   n_k[0] < n_k[1]  ->  (0, 1)
//   equal            ->  (a^2, b^2)
// i.e. a known hit kills the other branch, a further known hit on a killed
// branch is impossible, and an incompatible pair restores the initial ratio.
//
// Topologies.
//   single_particle: side 0 holds peak 1 (branch 0), side 1 holds peak 2
//     (branch 1); side k is hit at rate lambda * w_k[k].
//   two_particle: each side holds one peak of each branch (intra-side signals
//     are instantaneous); side k hits branch b at rate lambda * w_k[b].
//
// Branch b has won once the other branch has zero weight in both views and
// none of its hits is still in flight; from then on it has zero rate on both
// sides for ever.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <random>
#include <span>
#include <string_view>
#include <thread>
#include <vector>

#include "collapse/error.hpp"
#include "collapse/series.hpp"

namespace collapse {

inline constexpr std::string_view kRuleVariantId =
    "knowledge-count-v2: own hits known at once, remote hits after T; "
    "follow-up hits on a favoured branch carry weight 1; exact restart on equal counts; "
    "resolved once the losing branch has zero weight in both views and nothing in flight";

enum class Topology { single_particle, two_particle };

struct ProcessParams {
  double a2 = 0.5;
  double lambda = 1.0;
  double T = 0.0;
  std::uint64_t master_seed = 0;
  int max_events = 64;
  std::int64_t trials = 1;
};

inline void validate(const ProcessParams& p) {
  if (!(p.a2 >= 0.0 && p.a2 <= 1.0)) throw DomainError("a2 must lie in [0, 1]");
  if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda)) throw DomainError("lambda must be >= 0");
  if (!(p.T >= 0.0) || !std::isfinite(p.T)) throw DomainError("T must be >= 0");
  if (p.trials < 1) throw DomainError("trials must be >= 1");
  if (p.max_events < 1) throw DomainError("max_events must be >= 1");
}

struct CollapseRecord {
  double time = 0.0;
  int peak = 1;  // 1 = peak 1 / psi branch, 2 = peak 2 / chi branch
  int side = 0;
};

struct TrialOutcome {
  int winner = 1;
  int n_events = 0;
  double resolve_time = 0.0;
  bool truncated = false;
};

// Per-trial seed from (master seed, trial index); counter based, so any
// partition of the trial range reproduces the same streams.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

using TrialRng = std::mt19937_64;

namespace detail {

// Uniform in [0, 1) from the top 53 bits; independent of library
// distribution implementations.
inline double uniform01(TrialRng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double exponential(TrialRng& rng, double rate) {
  return -std::log1p(-uniform01(rng)) / rate;
}

struct Signal {
  double arrival;
  int to_side;
  int branch;
};

class Race {
 public:
  Race(const ProcessParams& p, Topology topo) : p_(p), topo_(topo) {}

  TrialOutcome run(TrialRng& rng, std::vector<CollapseRecord>* log) {
    // Nothing happens before the first hit (all views are empty), so the race
    // starts at t = 0 with a hit chosen by the initial weights.
    int side = 0;
    int branch = uniform01(rng) < p_.a2 ? 0 : 1;
    if (topo_ == Topology::single_particle) {
      side = branch;
    } else {
      side = uniform01(rng) < 0.5 ? 0 : 1;
    }
    double now = 0.0;
    hit(now, side, branch, log);

    for (;;) {
      if (int w = winner(); w >= 0) return {w + 1, events_, now, false};

      std::array<std::array<double, 2>, 2> rate{};
      double total = 0.0;
      for (int k = 0; k < 2; ++k) {
        const auto w = weights(k);
        for (int b = 0; b < 2; ++b) {
          if (topo_ == Topology::single_particle && b != k) continue;
          rate[k][b] = p_.lambda * w[b];
          total += rate[k][b];
        }
      }
      const double next_arrival =
          flight_.empty() ? std::numeric_limits<double>::infinity() : flight_.front().arrival;
      const double dt = total > 0.0 ? exponential(rng, total)
                                    : std::numeric_limits<double>::infinity();
      if (!(now + dt < next_arrival)) {
        if (!std::isfinite(next_arrival)) break;  // frozen; cannot happen for valid params
        now = next_arrival;
        deliver();
        continue;
      }
      if (events_ >= p_.max_events) return truncated(now);
      now += dt;
      const double pick = uniform01(rng) * total;
      double acc = 0.0;
      int hk = -1;
      int hb = -1;
      for (int c = 0; c < 4; ++c) {
        const double r = rate[c / 2][c % 2];
        if (r <= 0.0) continue;
        hk = c / 2;  // the last live clock absorbs rounding at the top
        hb = c % 2;
        acc += r;
        if (pick < acc) break;
      }
      hit(now, hk, hb, log);
    }
    return truncated(now);
  }

 private:
  std::array<double, 2> weights(int k) const {
    const auto& n = view_[k];
    if (n[0] > n[1]) return {1.0, 0.0};
    if (n[0] < n[1]) return {0.0, 1.0};
    return {p_.a2, 1.0 - p_.a2};
  }

  void hit(double now, int side, int branch, std::vector<CollapseRecord>* log) {
    ++events_;
    ++view_[side][branch];
    ++in_flight_[branch];
    flight_.push_back({now + p_.T, 1 - side, branch});
    if (log) log->push_back({now, branch + 1, side});
  }

  void deliver() {
    const Signal s = flight_.front();
    flight_.pop_front();
    ++view_[s.to_side][s.branch];
    --in_flight_[s.branch];
  }

  // Branch o can never be hit again once both views give it zero weight and
  // none of its hits is in flight.
  int winner() const {
    for (int b = 0; b < 2; ++b) {
      const int o = 1 - b;
      if (weights(0)[o] == 0.0 && weights(1)[o] == 0.0 && in_flight_[o] == 0) return b;
    }
    return -1;
  }

  // Argmax of the weights summed over both views; ties go to the larger
  // initial weight (peak 1 when a2 = 1/2).
  TrialOutcome truncated(double now) const {
    const auto w0 = weights(0);
    const auto w1 = weights(1);
    const double s0 = w0[0] + w1[0];
    const double s1 = w0[1] + w1[1];
    const int w = s1 > s0 || (s1 == s0 && p_.a2 < 0.5) ? 1 : 0;
    return {w + 1, events_, now, true};
  }

  const ProcessParams& p_;
  Topology topo_;
  std::array<std::array<int, 2>, 2> view_{};
  std::array<int, 2> in_flight_{};
  std::deque<Signal> flight_;
  int events_ = 0;
};

}  // namespace detail

inline TrialOutcome simulate_trial(const ProcessParams& params, TrialRng& rng,
                                   Topology topology = Topology::single_particle,
                                   std::vector<CollapseRecord>* log = nullptr) {
  validate(params);
  return detail::Race(params, topology).run(rng, log);
}

inline TrialOutcome simulate_trial(const ProcessParams& params, std::int64_t trial_index,
                                   Topology topology = Topology::single_particle,
                                   std::vector<CollapseRecord>* log = nullptr) {
  TrialRng rng(derive_seed(params.master_seed, static_cast<std::uint64_t>(trial_index)));
  return simulate_trial(params, rng, topology, log);
}

struct TrialTally {
  std::int64_t wins = 0;  // peak 1 / psi branch
  std::int64_t truncated = 0;
  std::int64_t events = 0;

  TrialTally& operator+=(const TrialTally& o) {
    wins += o.wins;
    truncated += o.truncated;
    events += o.events;
    return *this;
  }
};

inline TrialTally run_trials(const ProcessParams& params, Topology topology,
                             std::int64_t begin, std::int64_t end) {
  TrialTally tally;
  for (std::int64_t i = begin; i < end; ++i) {
    const TrialOutcome o = simulate_trial(params, i, topology);
    tally.wins += o.winner == 1 ? 1 : 0;
    tally.truncated += o.truncated ? 1 : 0;
    tally.events += o.n_events;
  }
  return tally;
}

struct McEstimate {
  double p_hat = 0.0;
  double std_error = 0.0;
  std::int64_t trials = 0;
  double truncation_fraction = 0.0;
  double mean_events = 0.0;
  bool truncation_warning = false;  // truncation_fraction > 1%
};

// Integer tallies only, so the result is bit-identical for any lane count.
inline McEstimate estimate(const ProcessParams& params,
                           Topology topology = Topology::single_particle, unsigned lanes = 1) {
  validate(params);
  lanes = std::max(1u, static_cast<unsigned>(
                           std::min<std::int64_t>(lanes, params.trials)));
  std::vector<TrialTally> parts(lanes);
  if (lanes == 1) {
    parts[0] = run_trials(params, topology, 0, params.trials);
  } else {
    std::vector<std::thread> pool;
    const std::int64_t chunk = (params.trials + lanes - 1) / lanes;
    for (unsigned l = 0; l < lanes; ++l) {
      const std::int64_t b = std::min<std::int64_t>(params.trials, l * chunk);
      const std::int64_t e = std::min<std::int64_t>(params.trials, b + chunk);
      pool.emplace_back([&, l, b, e] { parts[l] = run_trials(params, topology, b, e); });
    }
    for (auto& t : pool) t.join();
  }
  TrialTally sum;
  for (const auto& p : parts) sum += p;

  McEstimate est;
  est.trials = params.trials;
  const double n = static_cast<double>(params.trials);
  est.p_hat = static_cast<double>(sum.wins) / n;
  est.std_error = std::sqrt(est.p_hat * (1.0 - est.p_hat) / n);
  est.truncation_fraction = static_cast<double>(sum.truncated) / n;
  est.mean_events = static_cast<double>(sum.events) / n;
  est.truncation_warning = est.truncation_fraction > 0.01;
  return est;
}

struct DeviationRow {
  double a2 = 0.0;
  double lambda_t = 0.0;
  McEstimate mc;
  double p_series = 0.0;
  double deviation_mc = 0.0;      // p_hat - a2
  double deviation_series = 0.0;  // P_series - a2
};

// Monte Carlo and series deviations from the Born weight over a grid. Runs
// with T = 1 and lambda = lambdaT; each cell gets its own derived seed.
inline std::vector<DeviationRow> deviation_curve(std::span<const double> a2_grid,
                                                 std::span<const double> lambda_t_grid,
                                                 std::int64_t trials, std::uint64_t seed,
                                                 Topology topology = Topology::single_particle,
                                                 unsigned lanes = 1) {
  if (a2_grid.empty() || lambda_t_grid.empty()) {
    throw PreconditionError("deviation_curve: grids must be nonempty");
  }
  std::vector<DeviationRow> rows;
  std::uint64_t cell = 0;
  const int particles = topology == Topology::single_particle ? 1 : 2;
  for (double a2 : a2_grid) {
    for (double x : lambda_t_grid) {
      ProcessParams p;
      p.a2 = a2;
      p.lambda = x;
      p.T = 1.0;
      p.trials = trials;
      p.master_seed = derive_seed(seed, 0x5eed0000ULL + cell++);
      DeviationRow r;
      r.a2 = a2;
      r.lambda_t = x;
      r.mc = estimate(p, topology, lanes);
      r.p_series = total_probability(a2, x, particles, Mode::closed_series);
      r.deviation_mc = r.mc.p_hat - a2;
      r.deviation_series = r.p_series - a2;
      rows.push_back(r);
    }
  }
  return rows;
}

}  // namespace collapse
