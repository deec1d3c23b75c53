#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "collapse/error.hpp"
#include "collapse/kg_solver.hpp"
#include "collapse/wavefunction.hpp"

namespace collapse {

// Shortest text that reads back to the same double.
inline std::string exact(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline void write_grid_csv(std::ostream& os, const CharacteristicGrid& g) {
  os << "x_plus,x_minus,t,z,re_psi,im_psi,abs_psi\n";
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      const SpacetimeEvent e = g.event(i, j);
      const complex v = g.at(i, j);
      os << exact(g.x_plus(i)) << ',' << exact(g.x_minus(j)) << ',' << exact(e.t) << ','
         << exact(e.z) << ',' << exact(v.real()) << ',' << exact(v.imag()) << ','
         << exact(std::abs(v)) << '\n';
    }
  }
}

// 32-byte header: "KGLC", uint32 n, f64 extent, f64 mu, 8 reserved bytes;
// then n*n little-endian (re, im) f64 pairs in row-major (x+, x-) order. The
// apex is the origin of the grid's own coordinates.
namespace detail {

static_assert(std::endian::native == std::endian::little,
              "binary grid export assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  os.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& is) {
  char buf[sizeof(T)];
  if (!is.read(buf, sizeof(T))) throw PreconditionError("truncated binary grid");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace detail

inline void write_grid_binary(std::ostream& os, const CharacteristicGrid& g) {
  os.write("KGLC", 4);
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(g.n));
  detail::put<double>(os, g.extent);
  detail::put<double>(os, g.mu);
  detail::put<std::uint64_t>(os, 0);
  for (const complex& v : g.values) {
    detail::put<double>(os, v.real());
    detail::put<double>(os, v.imag());
  }
}

inline CharacteristicGrid read_grid_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "KGLC", 4) != 0) {
    throw PreconditionError("not a KGLC grid");
  }
  CharacteristicGrid g;
  g.n = static_cast<int>(detail::get<std::uint32_t>(is));
  g.extent = detail::get<double>(is);
  g.mu = detail::get<double>(is);
  detail::get<std::uint64_t>(is);
  g.values.resize(static_cast<std::size_t>(g.n) * g.n);
  for (complex& v : g.values) {
    const double re = detail::get<double>(is);
    v = {re, detail::get<double>(is)};
  }
  return g;
}

inline nlohmann::json to_json(const WaveState& s) {
  nlohmann::json terms = nlohmann::json::array();
  for (const GaussianTerm& t : s.terms) {
    terms.push_back({{"re_amp", t.amplitude.real()},
                     {"im_amp", t.amplitude.imag()},
                     {"center", t.center},
                     {"width_coeff", t.width_coeff},
                     {"energy", t.energy},
                     {"momentum", t.momentum}});
  }
  return {{"mass", s.mass}, {"terms", terms}};
}

inline WaveState wave_state_from_json(const nlohmann::json& j) {
  WaveState s;
  s.mass = j.at("mass").get<double>();
  for (const auto& t : j.at("terms")) {
    GaussianTerm g;
    g.amplitude = {t.at("re_amp").get<double>(), t.at("im_amp").get<double>()};
    g.center = t.at("center").get<double>();
    g.width_coeff = t.at("width_coeff").get<double>();
    g.energy = t.at("energy").get<double>();
    g.momentum = t.at("momentum").get<double>();
    s.terms.push_back(g);
  }
  validate(s);
  return s;
}

}  // namespace collapse
