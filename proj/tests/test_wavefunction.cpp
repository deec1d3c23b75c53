#include <catch_amalgamated.hpp>

#include <numbers>
#include <vector>

#include "collapse/wavefunction.hpp"

using namespace collapse;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> z(n);
  for (int k = 0; k < n; ++k) z[k] = a + (b - a) * k / (n - 1);
  return z;
}

double trapezoid_norm(const WaveState& s, double a, double b, int n) {
  const auto z = linspace(a, b, n);
  const auto v = sample(s, 0.0, z);
  const double h = z[1] - z[0];
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += (k == 0 || k == n - 1 ? 0.5 : 1.0) * std::norm(v[k]);
  return sum * h;
}

// Central differences of the sampled wavefunction.
FourVector fd_bohm(const WaveState& s, SpacetimeEvent e, double h = 1e-5) {
  const complex psi = s(e.t, e.z);
  const complex dt = (s(e.t + h, e.z) - s(e.t - h, e.z)) / (2 * h);
  const complex dz = (s(e.t, e.z + h) - s(e.t, e.z - h)) / (2 * h);
  const complex i{0, 1};
  return {(i * dt / psi).real(), (-i * dz / psi).real()};
}

std::vector<double> local_maxima(const std::vector<double>& z, const std::vector<complex>& v) {
  std::vector<double> out;
  for (std::size_t k = 1; k + 1 < v.size(); ++k) {
    if (std::abs(v[k]) > std::abs(v[k - 1]) && std::abs(v[k]) >= std::abs(v[k + 1])) {
      out.push_back(z[k]);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("bohm momentum of a broad moving packet is its four-momentum") {
  WaveState s;
  s.terms.push_back({1.0, 0.0, 1e-8, 1.25, 0.75});
  const FourVector p = bohm_momentum(s, {0.3, 2.0});
  CHECK_THAT(p.t, WithinRel(1.25, 1e-12));
  CHECK_THAT(p.z, WithinAbs(0.75, 1e-7));
}

TEST_CASE("bohm momentum of a real packet at rest") {
  const WaveState s = two_peak_state(1.0, 0.0, 0.8, 1.5, 40.0, 2.0);
  for (double z : {1.5, 0.0, 3.7}) {
    const FourVector p = bohm_momentum(s, {0.0, z});
    CHECK(p.t == 2.0);
    CHECK(p.z == 0.0);
  }
}

TEST_CASE("bohm momentum matches finite differences") {
  WaveState s;
  s.mass = 1.0;
  s.terms.push_back({{0.8, 0.1}, -1.0, 0.5, std::hypot(1.0, 0.3), 0.3});
  s.terms.push_back({{0.2, -0.5}, 1.2, 0.7, std::hypot(1.0, -0.6), -0.6});
  for (double z : {-1.3, -0.2, 0.4, 1.1}) {
    const SpacetimeEvent e{0.2, z};
    const FourVector a = bohm_momentum(s, e);
    const FourVector f = fd_bohm(s, e);
    CHECK_THAT(a.t, WithinAbs(f.t, 1e-7));
    CHECK_THAT(a.z, WithinAbs(f.z, 1e-7));
  }
}

TEST_CASE("bohm momentum at a node") {
  WaveState s;
  s.terms.push_back({1.0, 0.0, 1.0, 1.0, 0.0});
  s.terms.push_back({-1.0, 0.0, 1.0, 1.0, 0.0});
  CHECK_THROWS_AS(bohm_momentum(s, {0, 0.5}), NodeError);
}

TEST_CASE("hit centered on a packet") {
  WaveState s;
  s.terms.push_back({0.7, 1.0, 2.0, 1.0, 0.0});
  const WaveState h = apply_factor(s, 3.0, 1.0);
  CHECK(h.terms[0].center == 1.0);
  CHECK(h.terms[0].width_coeff == 3.5);
  CHECK(h.terms[0].amplitude == complex(0.7));
}

TEST_CASE("hit factor equals pointwise multiplication") {
  const WaveState s = two_peak_state(std::sqrt(0.6), std::sqrt(0.4), 0.9, -2.0, 3.0);
  const WaveState h = apply_factor(s, 1.3, 0.4);
  for (double z : linspace(-6, 6, 37)) {
    const complex expect = s(0.0, z) * std::exp(-0.65 * (z - 0.4) * (z - 0.4));
    CHECK(std::abs(h(0.0, z) - expect) <= 1e-13);
  }
  for (std::size_t k = 0; k < s.terms.size(); ++k) {
    CHECK(h.terms[k].width_coeff == s.terms[k].width_coeff + 0.65);
  }
}

TEST_CASE("strong hit kills the other peak") {
  const WaveState s = two_peak_state(std::sqrt(0.5), std::sqrt(0.5), 1.0, -5.0, 5.0);
  const WaveState h = apply_hit(s, {{0.0, -5.0}, 10.0});
  CHECK(peak_weight(h, 0) >= 1 - 1e-6);

  const auto z = linspace(-15, 15, 30001);
  const auto v = sample(h, 0.0, z);
  double left = 0, right = 0;
  for (std::size_t k = 0; k < z.size(); ++k) (z[k] < 0 ? left : right) += std::norm(v[k]);
  CHECK(left / (left + right) >= 1 - 1e-6);
}

TEST_CASE("weak hit is close to identity") {
  const WaveState s = two_peak_state(std::sqrt(0.3), std::sqrt(0.7), 1.0, -4.0, 4.0);
  const WaveState h = apply_hit(s, {{0.0, 1.0}, 1e-9});
  for (double z : linspace(-6, 6, 13)) CHECK(std::abs(h(0, z) - s(0, z)) < 1e-7);
}

TEST_CASE("hits commute") {
  const WaveState s = two_peak_state(std::sqrt(0.3), std::sqrt(0.7), 1.0, -4.0, 4.0);
  const HitRecord h1{{0.0, -3.0}, 0.8};
  const HitRecord h2{{0.5, 2.0}, 1.7};
  const WaveState a = apply_hit(apply_hit(s, h1), h2);
  const WaveState b = apply_hit(apply_hit(s, h2), h1);
  for (std::size_t k = 0; k < a.terms.size(); ++k) {
    CHECK(std::abs(a.terms[k].amplitude - b.terms[k].amplitude) <=
          1e-12 * std::abs(a.terms[k].amplitude));
    CHECK_THAT(a.terms[k].center, WithinRel(b.terms[k].center, 1e-12));
    CHECK_THAT(a.terms[k].width_coeff, WithinRel(b.terms[k].width_coeff, 1e-12));
  }
}

TEST_CASE("double hit") {
  const WaveState broad = two_peak_state(1.0, 0.0, 1e-6, 0.0, 1e6);
  const HitRecord h1{{0.0, -1.5}, 1.0};
  const HitRecord h2{{0.0, 1.5}, 1.0};
  const WaveState d = apply_double_hit(broad, h1, h2);
  CHECK_THAT(d.terms[0].center, WithinAbs(0.0, 1e-12));
  CHECK_THAT(d.terms[0].width_coeff, WithinRel(1.0, 1e-5));

  const WaveState swapped = apply_double_hit(broad, h2, h1);
  for (std::size_t k = 0; k < d.terms.size(); ++k) {
    CHECK(d.terms[k].amplitude == swapped.terms[k].amplitude);
    CHECK(d.terms[k].center == swapped.terms[k].center);
    CHECK(d.terms[k].width_coeff == swapped.terms[k].width_coeff);
  }

  const WaveState s = two_peak_state(std::sqrt(0.3), std::sqrt(0.7), 0.5, -4.0, 4.0);
  const WaveState seq = apply_hit(apply_hit(s, h1), h2);
  const WaveState both = apply_double_hit(s, h1, h2);
  for (double z : linspace(-6, 6, 25)) CHECK(std::abs(seq(0, z) - both(0, z)) < 1e-12);

  const WaveState same = apply_double_hit(s, h1, h1);
  const WaveState single = apply_hit(s, {{0.0, -1.5}, 2.0});
  for (double z : linspace(-6, 6, 25)) CHECK(std::abs(same(0, z) - single(0, z)) < 1e-12);

  CHECK_THROWS_AS(apply_double_hit(s, h1, {{0.0, 1.5}, 1.0, {1.25, 0.75}}), PreconditionError);
}

TEST_CASE("two peak shift") {
  const PeakShift q = two_peak_shift(2.0, 1.0, 0.0, 6.0);
  CHECK_THAT(q.z1, WithinAbs(1.0, 1e-15));
  CHECK_THAT(q.z2, WithinAbs(5.0, 1e-15));

  const PeakShift e = two_peak_shift(1.3, 1.3, -2.0, 6.0);
  CHECK(e.z1 == -2.0 + 0.25 * 8.0);
  CHECK(e.z2 == 6.0 - 0.25 * 8.0);

  const PeakShift w = two_peak_shift(1.0, 1e-12, 0.0, 6.0);
  CHECK_THAT(w.z1, WithinAbs(0.0, 1e-11));
  CHECK_THAT(w.z2, WithinAbs(6.0, 1e-11));
}

TEST_CASE("two peak shift agrees with grid argmax") {
  for (double ratio : {0.5, 1.0, 2.0, 10.0}) {
    const double beta = 1.0;
    const double alpha = ratio * beta;
    const double z1 = 0.0;
    const double z2 = 12.0;
    WaveState s = two_peak_state(std::sqrt(0.5), std::sqrt(0.5), alpha, z1, z2);
    s = apply_factor(apply_factor(s, beta, z1), beta, z2);
    const auto z = linspace(-5, 17, 22001);
    const auto maxima = local_maxima(z, sample(s, 0.0, z));
    REQUIRE(maxima.size() == 2);
    const PeakShift q = two_peak_shift(alpha, beta, z1, z2);
    const double h = z[1] - z[0];
    CHECK(std::abs(maxima[0] - q.z1) <= h);
    CHECK(std::abs(maxima[1] - q.z2) <= h);
  }
}

TEST_CASE("tail shift condition") {
  CHECK_FALSE(tail_shift_condition(1.0, 1.0, 0.0));
  const double alpha = 100.0;
  const double beta = 1.0;
  CHECK(tail_shift_condition(alpha, beta, 10.0 * 2.0 * std::sqrt(alpha) / beta));
  const double d = std::sqrt(16.0 * std::log(1000.0));
  CHECK_FALSE(tail_shift_condition(1.0, 1.0, d, std::exp(-d * d / 16.0)));
  CHECK(tail_shift_condition(1.0, 1.0, d * 1.001));
}

TEST_CASE("peak weights") {
  const WaveState s = two_peak_state(std::sqrt(0.5), std::sqrt(0.5), 1.0, -5.0, 5.0);
  CHECK_THAT(peak_weight(s, 0), WithinAbs(0.5, 1e-12));
  const WaveState t = two_peak_state(std::sqrt(0.7), std::sqrt(0.3), 1.0, -5.0, 5.0);
  CHECK_THAT(peak_weight(t, 0), WithinAbs(0.7, 1e-12));
  CHECK_THAT(peak_weight(t, 1), WithinAbs(0.3, 1e-12));

  const WaveState close = two_peak_state(std::sqrt(0.5), std::sqrt(0.5), 1.0, -1.0, 1.0);
  CHECK_THROWS_AS(peak_weights(close), PartitionError);
  CHECK_THROWS_AS(peak_weight(t, 2), PreconditionError);
}

TEST_CASE("peak weights sum to one after hits") {
  WaveState s = two_peak_state(std::sqrt(0.35), std::sqrt(0.65), 1.0, -6.0, 6.0);
  for (double z : {-5.0, 5.5, 0.3, -6.2}) {
    s = apply_hit(s, {{0.0, z}, 0.4});
    const auto w = peak_weights(s);
    CHECK_THAT(w[0] + w[1], WithinAbs(1.0, 1e-9));
    CHECK_THAT(norm_sq(s), WithinAbs(1.0, 1e-10));
  }
}

TEST_CASE("sampling") {
  const WaveState s = two_peak_state(1.0, 0.0, 0.6, 0.5, 100.0);
  CHECK_THAT(trapezoid_norm(s, -20, 20, 8001), WithinAbs(1.0, 1e-6));

  WaveState c;
  c.terms.push_back({1.0, 0.0, 1.0, 1.0, 0.0});
  c.terms.push_back({-1.0, 0.0, 1.0, 1.0, 0.0});
  for (complex v : sample(c, 0.3, linspace(-3, 3, 11))) CHECK(v == complex(0.0));

  WaveState p;
  p.terms.push_back({1.0, 0.0, 1e-14, 1.25, 0.75});
  const auto v = sample(p, 1.0, linspace(-10, 10, 41));
  for (complex x : v) CHECK_THAT(std::abs(x), WithinRel(1.0, 1e-10));
}

TEST_CASE("normalize and validate") {
  WaveState s;
  s.terms.push_back({3.0, 0.0, 2.0, 1.0, 0.0});
  CHECK_THAT(norm_sq(normalize(s)), WithinAbs(1.0, 1e-12));
  CHECK_THAT(norm_sq(s), WithinRel(9.0 * std::sqrt(std::numbers::pi / 4.0), 1e-12));
  s.terms[0].width_coeff = 0.0;
  CHECK_THROWS_AS(validate(s), PreconditionError);
}
