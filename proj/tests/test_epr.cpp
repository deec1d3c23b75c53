#include <catch_amalgamated.hpp>

#include <numbers>

#include "collapse/epr.hpp"
#include "collapse/quadrature.hpp"

using namespace collapse;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const EprCenters kGeometry{-50.0, -44.0, 50.0, 56.0};

// Branch weight by direct quadrature of the separable branch density.
double branch_norm(const TwoParticleState& s, double c1, double c2) {
  auto density = [&](int particle, double center) {
    return [&, particle, center](double z) {
      double v = std::exp(-2.0 * s.width_coeff * (z - center) * (z - center));
      for (const HitFactor& h : s.hit_factors) {
        if (h.particle == particle) v *= std::exp(-h.strength * (z - h.center) * (z - h.center));
      }
      return v;
    };
  };
  return integrate(density(1, c1), c1 - 20, c1 + 20) * integrate(density(2, c2), c2 - 20, c2 + 20);
}

}  // namespace

TEST_CASE("construction") {
  const double r = std::numbers::sqrt2 / 2;
  const auto half = branch_weights(make_epr(r, r, kGeometry, 1.0));
  CHECK_THAT(half[0], WithinAbs(0.5, 1e-15));
  CHECK_THAT(half[1], WithinAbs(0.5, 1e-15));

  const auto product = branch_weights(make_epr(1.0, 0.0, kGeometry, 1.0));
  CHECK(product[0] == 1.0);
  CHECK(product[1] == 0.0);

  const auto born = branch_weights(make_epr(std::sqrt(0.7), std::sqrt(0.3), kGeometry, 1.0));
  CHECK_THAT(born[0], WithinAbs(0.7, 1e-14));
  CHECK_THAT(born[1], WithinAbs(0.3, 1e-14));
}

TEST_CASE("construction errors name the inequality") {
  CHECK_THROWS_AS(make_epr(1.0, 1.0, kGeometry, 1.0), PreconditionError);
  CHECK_THROWS_WITH(make_epr(1.0, 0.0, {0.0, 1.0, 50.0, 56.0}, 1.0),
                    Catch::Matchers::ContainsSubstring("(z11 - z12)^2"));
  CHECK_THROWS_WITH(make_epr(1.0, 0.0, {0.0, 6.0, 50.0, 51.0}, 1.0),
                    Catch::Matchers::ContainsSubstring("(z21 - z22)^2"));
  CHECK_THROWS_WITH(make_epr(1.0, 0.0, {0.0, 6.0, 30.0, 36.0}, 1.0),
                    Catch::Matchers::ContainsSubstring("|z11 - z21|"));
}

TEST_CASE("incompatible pair restores the initial ratio") {
  for (double beta : {0.1, 1.0, 5.0}) {
    const TwoParticleState s = make_epr(std::sqrt(0.7), std::sqrt(0.3), kGeometry, 1.0);
    const auto w = branch_weights(apply_incompatible_pair(s, beta));
    CHECK_THAT(w[0] / w[1], WithinRel(0.7 / 0.3, 1e-9));
    CHECK_THAT(w[0] + w[1], WithinAbs(1.0, 1e-15));
  }
  const TwoParticleState s = make_epr(std::sqrt(0.7), std::sqrt(0.3), kGeometry, 1.0);
  const auto tiny = branch_weights(apply_incompatible_pair(s, 1e-12));
  CHECK_THAT(tiny[0], WithinAbs(0.7, 1e-9));
}

TEST_CASE("compatible pair kills the other branch") {
  const TwoParticleState s = make_epr(std::sqrt(0.5), std::sqrt(0.5), kGeometry, 1.0);
  const auto w = branch_weights(apply_compatible_pair(s, 1.0));
  CHECK(w[1] <= 1e-6);
}

TEST_CASE("closed-form branch weights match quadrature") {
  TwoParticleState s = make_epr(std::sqrt(0.6), std::sqrt(0.4), {-20, -16, 20, 24.5}, 2.0);
  s = apply_particle_hit(s, 1, -18.5, 0.3);
  s = apply_particle_hit(s, 2, 23.0, 0.2);
  s = apply_particle_hit(s, 1, -16.2, 0.15);
  const double np = 0.6 * branch_norm(s, s.z11, s.z21);
  const double nc = 0.4 * branch_norm(s, s.z12, s.z22);
  const auto w = branch_weights(s);
  CHECK_THAT(w[0], WithinRel(np / (np + nc), 1e-9));
  CHECK_THAT(w[1], WithinRel(nc / (np + nc), 1e-9));
}

TEST_CASE("two-particle race") {
  ProcessParams p;
  p.a2 = 0.7;
  p.lambda = 2.0;
  p.T = 0.0;
  p.trials = 20000;
  p.master_seed = 77;
  for (std::int64_t k = 0; k < 200; ++k) CHECK(simulate_epr_trial(p, k).n_events == 1);
  const McEstimate born = estimate_epr(p);
  CHECK(std::abs(born.p_hat - 0.7) <= 3 * born.std_error);

  p.a2 = 0.5;
  p.lambda = 0.1;
  p.T = 1.0;
  p.trials = 100000;
  const McEstimate even = estimate_epr(p, 3);
  CHECK(std::abs(even.p_hat - 0.5) <= 3 * even.std_error);

  p.a2 = 0.7;
  p.lambda = 0.05;
  p.trials = 200000;
  const McEstimate race = estimate_epr(p);
  const McEstimate single = estimate(p);
  CHECK(std::abs(race.p_hat - 0.7037632) <= std::max(3 * race.std_error, 10 * 0.05 * 0.05 * 0.05));
  CHECK(std::abs(race.p_hat - single.p_hat) <= 3 * std::hypot(race.std_error, single.std_error));
}

TEST_CASE("two-particle hits land on both branches of each side") {
  ProcessParams p;
  p.a2 = 0.5;
  p.lambda = 3.0;
  p.T = 1.0;
  p.trials = 1;
  bool mixed = false;
  for (std::int64_t k = 0; k < 500 && !mixed; ++k) {
    std::vector<CollapseRecord> log;
    p.master_seed = static_cast<std::uint64_t>(k);
    TrialRng rng(derive_seed(p.master_seed, 0));
    simulate_epr_trial(p, rng, &log);
    for (const CollapseRecord& r : log) mixed |= r.side != r.peak - 1;
  }
  CHECK(mixed);
}
