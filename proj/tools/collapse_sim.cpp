#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "collapse/collapse.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace collapse;

namespace {

constexpr const char* kVersion = "1.0.0";

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRegime = 3;
constexpr int kExitUsage = 64;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr);
  std::string hex;
  char buf[3];
  for (unsigned int k = 0; k < len; ++k) {
    std::snprintf(buf, sizeof buf, "%02x", md[k]);
    hex += buf;
  }
  return hex;
}

unsigned lanes() {
  if (const char* env = std::getenv("COLLAPSE_SIM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw ValidationError("COLLAPSE_SIM_THREADS: expected a positive integer, got '" +
                            std::string(env) + "'");
    }
    return static_cast<unsigned>(std::min(v, 256L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Everything a subcommand leaves behind: data files, plots and the manifest.
class Run {
 public:
  Run(std::string command, fs::path dir, std::vector<std::string> formats)
      : command_(std::move(command)), dir_(std::move(dir)), formats_(std::move(formats)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
      throw ValidationError("--output-dir: cannot create '" + dir_.string() + "'");
    }
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  bool wants(const std::string& format) const {
    return std::find(formats_.begin(), formats_.end(), format) != formats_.end();
  }

  void emit(const std::string& name, const std::string& bytes) {
    const fs::path path = dir_ / name;
    std::ofstream os(path, std::ios::binary);
    os << bytes;
    if (!os) throw ValidationError("--output-dir: cannot write '" + path.string() + "'");
    files_[name] = sha256_hex(bytes);
  }

  json results = json::object();
  json config = json::object();
  std::uint64_t seed = 0;
  bool process_rule = false;
  int particle_count = 0;

  void finish(double wall_time) {
    if (wants("json")) emit(command_ + ".json", results.dump(2) + "\n");
    json m;
    m["tool"] = "collapse_sim";
    m["version"] = kVersion;
    m["command"] = command_;
    m["config"] = config;
    m["seed"] = seed;
    if (process_rule) m["rule_variant_id"] = std::string(kRuleVariantId);
    if (particle_count > 0) m["particle_count"] = particle_count;
    for (auto& [k, v] : results.items()) m[k] = v;
    m["files"] = files_;
    m["wall_time"] = wall_time;
    std::ofstream os(dir_ / "manifest.json");
    os << m.dump(2) << "\n";
  }

 private:
  std::string command_;
  fs::path dir_;
  std::vector<std::string> formats_;
  std::map<std::string, std::string> files_;
};

// Text sink for CSV rows; doubles go out in shortest round-trip form.
class Csv {
 public:
  Csv& operator<<(double v) { return put(exact(v)); }
  Csv& operator<<(std::int64_t v) { return put(std::to_string(v)); }
  Csv& operator<<(int v) { return put(std::to_string(v)); }
  Csv& operator<<(char c) {
    text_ += c;
    return *this;
  }
  Csv& operator<<(std::string_view s) { return put(s); }
  Csv& operator<<(const char* s) { return put(s); }
  const std::string& str() const { return text_; }

 private:
  Csv& put(std::string_view s) {
    text_ += s;
    return *this;
  }
  std::string text_;
};

Csv csv_stream() { return {}; }

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void echo_config(const CLI::App& sub, json& out) {
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      out[name] = r.size() == 1 ? json(r[0]) : json(r);
    } else if (!opt->get_default_str().empty()) {
      out[name] = opt->get_default_str();
    }
  }
}

std::string flt(double v) { return exact(v); }

// ---------------------------------------------------------------- options

struct Common {
  std::string output_dir = "collapse_out";
  std::vector<std::string> formats{"csv", "json"};
  std::uint64_t seed = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--output-dir", c.output_dir, "Directory for artifacts")->capture_default_str();
  sub->add_option("--formats", c.formats, "Subset of csv,json,svg")
      ->delimiter(',')
      ->check(CLI::IsMember({"csv", "json", "svg"}))
      ->capture_default_str();
  sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
}

struct SeriesOpts {
  double a2 = 0.0;
  double lambda_t = 0.0;
  int particles = 1;
};

struct McOpts {
  double a2 = 0.0;
  double lambda_t = -1.0;
  double lambda = -1.0;
  double T = -1.0;
  std::int64_t trials = 100000;
  int particles = 1;
  int log_trials = 0;
  double alpha = 1.0;
  double beta = 1.0;
  double sep = 6.0;
};

struct KgOpts {
  std::string mode = "double";
  double beta = 1.0;
  double sep = 4.0;
  int n = 513;
  double extent = 0.0;
  double mass = 1.0;
};

struct ShiftOpts {
  double alpha = 1.0;
  double beta = 1.0;
  double sep = 12.0;
  double threshold = 1e-3;
};

struct MagOpts {
  double L = 10.0;
  double N = 1.0;
  double tau_col = 1e16;
  double tau_per = kDefaultPerceptionTime;
  double a2 = 0.5;
  double threshold = 1e-3;
};

struct SweepOpts {
  std::string mode = "series";
  std::vector<double> a2{0.6, 0.7, 0.9};
  std::vector<double> lambda_t{0.01, 0.02, 0.05, 0.1};
  std::vector<double> L{1.0, 10.0, 100.0, 1000.0};
  std::vector<double> N{1.0, 1e10, 1e20, 1e30};
  double tau_col = 1e16;
  double threshold = 1e-3;
  std::int64_t trials = 100000;
  int particles = 1;
};

struct PlotOpts {
  std::string input;
  std::string mode = "auto";
};

// ---------------------------------------------------------------- series

std::string diagram_csv(double a2, double x, int particles) {
  auto os = csv_stream();
  os << "diagram,constant_series,p_series,constant_quadrature,p_quadrature\n";
  for (Diagram d : diagrams_for(particles)) {
    const DiagramResult s = diagram(d, a2, x, Mode::closed_series);
    const DiagramResult q = diagram(d, a2, x, Mode::quadrature);
    os << label(d) << ',' << s.constant_part << ',' << s.p_coefficient << ',' << q.constant_part
       << ',' << q.p_coefficient << '\n';
  }
  return os.str();
}

int run_series(const SeriesOpts& o, Run& run) {
  const double quad = total_probability(o.a2, o.lambda_t, o.particles, Mode::quadrature);
  const RegimeCheck rc = regime(o.a2, o.lambda_t, o.particles, Mode::closed_series);
  const SeriesCoefficients c = series_coefficients(o.a2);
  run.results["coefficients"] = {c.c0, c.c1, c.c2};
  run.results["P_quadrature"] = quad;
  run.results["restart_coefficient"] = rc.restart_coefficient;
  run.results["regime_ok"] = rc.ok;
  if (run.wants("csv")) run.emit("diagrams.csv", diagram_csv(o.a2, o.lambda_t, o.particles));
  std::printf("P_quadrature = %.10f\n", quad);
  if (!rc.ok) {
    run.results["P_series"] = nullptr;
    std::fprintf(stderr, "error: lambdaT = %g is outside the series regime (B = %.4f)\n",
                 o.lambda_t, rc.restart_coefficient);
    return kExitRegime;
  }
  const double p = total_probability(o.a2, o.lambda_t, o.particles, Mode::closed_series);
  run.results["P_series"] = p;
  run.results["deviation_from_born"] = p - o.a2;
  std::printf("P_series     = %.10f\n", p);
  return kExitOk;
}

// ---------------------------------------------------------------- mc / epr

ProcessParams process_params(const McOpts& o, std::uint64_t seed) {
  ProcessParams p;
  p.a2 = o.a2;
  if (o.lambda_t >= 0.0) {
    p.lambda = o.lambda_t;
    p.T = 1.0;
  } else if (o.lambda >= 0.0 && o.T >= 0.0) {
    p.lambda = o.lambda;
    p.T = o.T;
  } else {
    throw ValidationError("--lambdaT: required unless both --lambda and --T are given");
  }
  p.trials = o.trials;
  p.master_seed = seed;
  return p;
}

int run_mc(const McOpts& o, Topology topo, Run& run) {
  const ProcessParams p = process_params(o, run.seed);
  const int particles = topo == Topology::single_particle ? 1 : 2;
  const McEstimate e = estimate(p, topo, lanes());
  const double x = p.lambda * p.T;

  run.process_rule = true;
  run.particle_count = particles;
  run.results["params"] = {{"a2", p.a2},           {"lambda", p.lambda},
                           {"T", p.T},             {"lambdaT", x},
                           {"trials", p.trials},   {"max_events", p.max_events},
                           {"topology", particles == 1 ? "single_particle" : "two_particle"}};
  run.results["p_hat"] = e.p_hat;
  run.results["std_error"] = e.std_error;
  run.results["truncation_fraction"] = e.truncation_fraction;
  run.results["truncation_warning"] = e.truncation_warning;
  run.results["mean_events"] = e.mean_events;
  const bool in_regime = regime(p.a2, x, particles, Mode::closed_series).ok;
  const double series = in_regime ? total_probability(p.a2, x, particles, Mode::closed_series) : NAN;
  run.results["P_series"] = nullable(series);

  if (topo == Topology::two_particle) {
    const double alpha = o.alpha;
    const EprCenters c{0.0, o.sep, 20.0 * o.sep, 21.0 * o.sep};
    const TwoParticleState s = make_epr(std::sqrt(p.a2), std::sqrt(1.0 - p.a2), c, alpha);
    const auto w = branch_weights(apply_incompatible_pair(s, o.beta));
    run.results["restart_weights"] = {w[0], w[1]};
  }

  if (run.wants("csv")) {
    auto os = csv_stream();
    os << "a2,lambda,T,lambdaT,trials,p_hat,std_error,truncation_fraction,mean_events,P_series\n";
    os << p.a2 << ',' << p.lambda << ',' << p.T << ',' << x << ',' << p.trials << ',' << e.p_hat
       << ',' << e.std_error << ',' << e.truncation_fraction << ',' << e.mean_events << ','
       << series << '\n';
    run.emit(particles == 1 ? "mc.csv" : "epr.csv", os.str());
    if (o.log_trials > 0) {
      auto log = csv_stream();
      log << "trial,time,peak\n";
      const std::int64_t count = std::min<std::int64_t>(o.log_trials, p.trials);
      for (std::int64_t k = 0; k < count; ++k) {
        std::vector<CollapseRecord> records;
        simulate_trial(p, k, topo, &records);
        for (const CollapseRecord& r : records) log << k << ',' << r.time << ',' << r.peak << '\n';
      }
      run.emit("events.csv", log.str());
    }
  }
  std::printf("p_hat = %.6f +- %.6f (trials %lld, truncated %.2e)\n", e.p_hat, e.std_error,
              static_cast<long long>(p.trials), e.truncation_fraction);
  if (std::isfinite(series)) std::printf("P_series = %.6f\n", series);
  if (e.truncation_warning) {
    std::fprintf(stderr, "warning: %.2f%% of trials hit the event cap\n",
                 100.0 * e.truncation_fraction);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- kg

std::string grid_heat_svg(const CharacteristicGrid& g, const std::string& title) {
  std::vector<double> t, z, v;
  const int stride = std::max(1, g.n / 200);
  for (int i = 0; i < g.n; i += stride) {
    for (int j = 0; j < g.n; j += stride) {
      const SpacetimeEvent e = g.event(i, j);
      t.push_back(e.z);
      z.push_back(e.t);
      v.push_back(std::abs(g.at(i, j)));
    }
  }
  return svg::heat_map(t, z, v, {title, "z", "t"});
}

int run_kg(KgOpts o, Run& run) {
  if (!(o.beta > 0.0)) throw ValidationError("--beta: must be > 0");
  if (!(o.mass > 0.0)) throw ValidationError("--mass: must be > 0");
  if (o.n < 2) throw ValidationError("--n: must be >= 2");
  if (o.extent == 0.0) o.extent = default_extent(o.beta);
  if (!(o.extent > 0.0)) throw ValidationError("--extent: must be > 0");
  run.results["extent"] = o.extent;
  run.results["spacing"] = o.extent / (o.n - 1);

  CharacteristicGrid grid;
  if (o.mode == "plane") {
    const BoundaryData bd = plane_wave_boundary(o.mass, 0.0);
    grid = solve_goursat(bd, o.mass, o.extent, o.n);
    double err = 0.0;
    for (int i = 0; i < grid.n; ++i) {
      for (int j = 0; j < grid.n; ++j) {
        err = std::max(err, std::abs(grid.at(i, j) - std::exp(complex(0.0, -o.mass * grid.event(i, j).t))));
      }
    }
    run.results["max_error"] = err;
  } else if (o.mode == "single") {
    const BoundaryData bd = collapse_boundary(o.mass, 0.0, o.beta, o.mass);
    grid = zeroth_order_grid(bd, o.mass, 0.0, o.extent, o.n);
    const CharacteristicGrid full = solve_goursat(bd, o.mass, o.extent, o.n);
    double dev = 0.0;
    for (std::size_t k = 0; k < grid.values.size(); ++k) {
      dev = std::max(dev, std::abs(full.values[k] - grid.values[k]));
    }
    run.results["goursat_deviation"] = dev;
    run.results["neglected_scale"] = o.beta * o.extent / o.mass;
  } else if (o.mode == "double") {
    if (!(o.sep > 0.0)) throw ValidationError("--sep: must be > 0");
    const SpacetimeEvent x1{0.0, -0.5 * o.sep};
    const SpacetimeEvent x2{0.0, 0.5 * o.sep};
    const BoundaryData bd = double_collapse_boundary(x1, x2, o.beta, o.mass,
                                                     collapsed_region(x1, o.beta, o.mass),
                                                     collapsed_region(x2, o.beta, o.mass));
    grid = zeroth_order_grid(bd, o.mass, 0.0, o.extent, o.n);
    double rel = 0.0;
    for (int i = 0; i < grid.n; ++i) {
      for (int j = 0; j < grid.n; ++j) {
        const SpacetimeEvent e = grid.event(i, j);
        const double q = (e.z - x1.z) * (e.z - x1.z) + (e.z - x2.z) * (e.z - x2.z);
        const complex expect = std::exp(complex(-0.5 * o.beta * q, -o.mass * e.t));
        rel = std::max(rel, std::abs(grid.at(i, j) - expect) / std::abs(expect));
      }
    }
    // On each time slice i + j = d the nodes sit at z = (i - j) h / 2.
    double offset = 0.0;
    for (int d = 0; d <= 2 * (grid.n - 1); ++d) {
      int best = -1;
      double peak = -1.0;
      for (int i = std::max(0, d - grid.n + 1); i <= std::min(d, grid.n - 1); ++i) {
        const double a = std::abs(grid.at(i, d - i));
        if (a > peak) peak = a, best = i;
      }
      offset = std::max(offset, std::abs(grid.event(best, d - best).z - 0.5 * (x1.z + x2.z)));
    }
    run.results["apex"] = {bd.apex.t, bd.apex.z};
    run.results["midpoint"] = 0.5 * (x1.z + x2.z);
    run.results["max_relative_error"] = rel;
    run.results["max_argmax_offset"] = offset;
  } else {
    throw ValidationError("--mode: expected single, double or plane, got '" + o.mode + "'");
  }

  if (run.wants("csv")) {
    std::ostringstream os;
    write_grid_csv(os, grid);
    run.emit("kg_grid.csv", os.str());
  }
  if (run.wants("svg")) run.emit("kg_grid.svg", grid_heat_svg(grid, "|psi| (" + o.mode + ")"));
  std::printf("grid %d x %d, extent %g\n", grid.n, grid.n, o.extent);
  return kExitOk;
}

// ---------------------------------------------------------------- shift

int run_shift(const ShiftOpts& o, Run& run) {
  const PeakShift s = two_peak_shift(o.alpha, o.beta, 0.0, o.sep);
  const bool tail = tail_shift_condition(o.alpha, o.beta, o.sep, o.threshold);
  run.results["z1_shifted"] = s.z1;
  run.results["z2_shifted"] = s.z2;
  run.results["shift_fraction"] = o.sep > 0 ? s.z1 / o.sep : 0.0;
  run.results["tail_condition"] = tail;
  if (run.wants("csv")) {
    auto os = csv_stream();
    os << "alpha,beta,sep,z1_shifted,z2_shifted,tail_condition\n";
    os << o.alpha << ',' << o.beta << ',' << o.sep << ',' << s.z1 << ',' << s.z2 << ','
       << (tail ? 1 : 0) << '\n';
    run.emit("shift.csv", os.str());
  }
  std::printf("peaks move to %.10g and %.10g; tail condition %s\n", s.z1, s.z2,
              tail ? "holds" : "fails");
  return kExitOk;
}

// ---------------------------------------------------------------- magnitudes

int run_magnitudes(const MagOpts& o, Run& run) {
  const ApparatusParams p{o.L, o.N, o.tau_col, o.tau_per};
  const double x = lambda_T(p);
  run.results["light_time"] = light_time(o.L);
  run.results["lambdaT"] = x;
  run.results["perception_bound"] = perception_bound(p);
  run.results["perception_violated"] = perception_violated(p);
  const auto cells = detectability_sweep(std::vector<double>{o.L}, std::vector<double>{o.N},
                                         o.tau_col, o.a2, o.threshold);
  run.results["deviation"] = cells[0].deviation;
  run.results["regime_ok"] = cells[0].regime_ok;
  run.results["flagged"] = cells[0].flagged;
  if (run.wants("csv")) {
    auto os = csv_stream();
    os << "L_m,N,tau_col,tau_per,lambdaT,perception_bound,perception_violated\n";
    os << o.L << ',' << o.N << ',' << o.tau_col << ',' << o.tau_per << ',' << x << ','
       << perception_bound(p) << ',' << (perception_violated(p) ? 1 : 0) << '\n';
    run.emit("magnitudes.csv", os.str());
  }
  std::printf("lambdaT = %.4e, perception bound = %.4e%s\n", x, perception_bound(p),
              perception_violated(p) ? " (violated)" : "");
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

std::vector<svg::Series> series_by_a2(const std::vector<double>& a2, const std::vector<double>& x,
                                      const std::vector<double>& y, bool markers,
                                      const std::string& suffix) {
  std::vector<svg::Series> out;
  for (std::size_t k = 0; k < a2.size(); ++k) {
    if (out.empty() || out.back().label != "a2=" + flt(a2[k]) + suffix) {
      out.push_back({"a2=" + flt(a2[k]) + suffix, {}, {}, markers});
    }
    if (!std::isfinite(y[k])) continue;
    out.back().x.push_back(x[k]);
    out.back().y.push_back(y[k]);
  }
  return out;
}

int run_sweep(const SweepOpts& o, Run& run) {
  auto os = csv_stream();
  std::string plot;
  if (o.mode == "series") {
    std::vector<double> ca, cx, cy;
    os << "a2,lambdaT,P_series,P_quadrature,deviation_from_born\n";
    int cells = 0, out_of_regime = 0;
    for (double a2 : o.a2) {
      for (double x : o.lambda_t) {
        const double q = total_probability(a2, x, o.particles, Mode::quadrature);
        double s = NAN;
        if (regime(a2, x, o.particles, Mode::closed_series).ok) {
          s = total_probability(a2, x, o.particles, Mode::closed_series);
        } else {
          ++out_of_regime;
        }
        os << a2 << ',' << x << ',' << s << ',' << q << ',' << s - a2 << '\n';
        ca.push_back(a2), cx.push_back(x), cy.push_back(q);
        ++cells;
      }
    }
    run.results["cells"] = cells;
    run.results["out_of_regime"] = out_of_regime;
    plot = svg::line_plot(series_by_a2(ca, cx, cy, false, ""),
                          {"Dominance probability", "lambda T", "P (quadrature)"});
  } else if (o.mode == "mc") {
    const Topology topo = o.particles == 1 ? Topology::single_particle : Topology::two_particle;
    const auto rows = deviation_curve(o.a2, o.lambda_t, o.trials, run.seed, topo, lanes());
    run.process_rule = true;
    run.particle_count = o.particles;
    os << "a2,lambdaT,p_hat,std_error,P_series,deviation_mc,deviation_series,truncation_fraction\n";
    std::vector<double> ca, cx, mc, se;
    for (const DeviationRow& r : rows) {
      os << r.a2 << ',' << r.lambda_t << ',' << r.mc.p_hat << ',' << r.mc.std_error << ','
         << r.p_series << ',' << r.deviation_mc << ',' << r.deviation_series << ','
         << r.mc.truncation_fraction << '\n';
      ca.push_back(r.a2), cx.push_back(r.lambda_t), mc.push_back(r.mc.p_hat),
          se.push_back(r.p_series);
    }
    run.results["cells"] = rows.size();
    auto lines = series_by_a2(ca, cx, mc, true, " MC");
    for (auto& s : series_by_a2(ca, cx, se, false, " series")) lines.push_back(s);
    plot = svg::line_plot(lines, {"Monte Carlo vs series", "lambda T", "P"});
  } else if (o.mode == "detect") {
    const double a2 = o.a2.size() == 1 ? o.a2[0] : 0.7;
    const auto cells = detectability_sweep(o.L, o.N, o.tau_col, a2, o.threshold);
    os << "L_m,N,lambdaT,deviation,flagged,regime_ok\n";
    int flagged = 0;
    std::vector<svg::Series> lines;
    for (const DetectabilityCell& c : cells) {
      os << c.L << ',' << c.N << ',' << c.lambda_t << ',' << c.deviation << ','
         << (c.flagged ? 1 : 0) << ',' << (c.regime_ok ? 1 : 0) << '\n';
      flagged += c.flagged;
      if (lines.empty() || lines.back().label != "L=" + flt(c.L) + " m") {
        lines.push_back({"L=" + flt(c.L) + " m", {}, {}, true});
      }
      if (c.regime_ok && c.lambda_t > 0) {
        lines.back().x.push_back(std::log10(c.N));
        lines.back().y.push_back(std::log10(c.lambda_t));
      }
    }
    run.results["a2"] = a2;
    run.results["cells"] = cells.size();
    run.results["flagged"] = flagged;
    plot = svg::line_plot(lines, {"Detectability", "log10 N", "log10 lambda T"});
  } else {
    throw ValidationError("--mode: expected series, mc or detect, got '" + o.mode + "'");
  }
  if (run.wants("csv")) run.emit("sweep.csv", os.str());
  if (run.wants("svg")) run.emit("sweep.svg", plot);
  std::fputs(os.str().c_str(), stdout);
  return kExitOk;
}

// ---------------------------------------------------------------- plot

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  }
  std::vector<double> values(const std::string& name) const {
    const int c = column(name);
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r[c]);
    return v;
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

Table read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("input: cannot read '" + path + "'");
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("input: empty file");
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) throw ValidationError("input: ragged row '" + line + "'");
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (end == c.c_str() || *end != '\0') throw ValidationError("input: not a number '" + c + "'");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) throw ValidationError("input: no data rows");
  return t;
}

bool has(const Table& t, std::initializer_list<const char*> cols) {
  return std::all_of(cols.begin(), cols.end(), [&](const char* c) { return t.column(c) >= 0; });
}

int run_plot(const PlotOpts& o, Run& run) {
  const Table t = read_csv(o.input);
  std::string out;
  if (has(t, {"t", "z", "abs_psi"}) && (o.mode == "auto" || o.mode == "heat")) {
    out = svg::heat_map(t.values("z"), t.values("t"), t.values("abs_psi"), {"|psi|", "z", "t"});
  } else if (has(t, {"a2", "lambdaT", "p_hat", "P_series"}) && o.mode != "heat") {
    auto lines = series_by_a2(t.values("a2"), t.values("lambdaT"), t.values("p_hat"), true, " MC");
    for (auto& s : series_by_a2(t.values("a2"), t.values("lambdaT"), t.values("P_series"), false,
                                " series")) {
      lines.push_back(s);
    }
    out = svg::line_plot(lines, {"Dominance probability", "lambda T", "P"});
  } else if (has(t, {"a2", "lambdaT", "P_quadrature"}) && o.mode != "heat") {
    out = svg::line_plot(
        series_by_a2(t.values("a2"), t.values("lambdaT"), t.values("P_quadrature"), false, ""),
        {"Dominance probability", "lambda T", "P (quadrature)"});
  } else if (has(t, {"L_m", "N", "lambdaT"}) && o.mode != "heat") {
    std::vector<svg::Series> lines;
    for (const auto& r : t.rows) {
      const std::string name = "L=" + flt(r[t.column("L_m")]) + " m";
      if (lines.empty() || lines.back().label != name) lines.push_back({name, {}, {}, true});
      const double x = r[t.column("lambdaT")];
      if (x > 0) {
        lines.back().x.push_back(std::log10(r[t.column("N")]));
        lines.back().y.push_back(std::log10(x));
      }
    }
    out = svg::line_plot(lines, {"Detectability", "log10 N", "log10 lambda T"});
  } else {
    throw ValidationError("input: unrecognised CSV schema for plot mode '" + o.mode + "'");
  }
  const std::string name = fs::path(o.input).stem().string() + ".svg";
  run.emit(name, out);
  std::printf("%s\n", run.path(name).string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation of local light-cone wavefunction collapse", "collapse_sim"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Key-value (TOML/INI) file; flags on the command line win");
  app.require_subcommand(1);
  app.fallthrough();

  Common common;

  SeriesOpts so;
  CLI::App* series = app.add_subcommand("series", "Dominance probability from the diagram series");
  series->add_option("--a2", so.a2, "Born weight |a|^2 of peak 1")->required()->check(CLI::Range(0.0, 1.0));
  series->add_option("--lambdaT", so.lambda_t, "Race parameter lambda T")->required()->check(CLI::NonNegativeNumber);
  series->add_option("--particles", so.particles, "1 or 2")->check(CLI::IsMember({1, 2}))->capture_default_str();
  add_common(series, common);

  McOpts mo;
  auto add_process = [&](CLI::App* sub) {
    sub->add_option("--a2", mo.a2, "Born weight |a|^2 of peak 1")->required()->check(CLI::Range(0.0, 1.0));
    CLI::Option* x = sub->add_option("--lambdaT", mo.lambda_t, "lambda T (sets T = 1)")->check(CLI::NonNegativeNumber);
    sub->add_option("--lambda", mo.lambda, "Collapse rate")->check(CLI::NonNegativeNumber)->excludes(x);
    sub->add_option("--T", mo.T, "Light-travel delay between the peaks")->check(CLI::NonNegativeNumber)->excludes(x);
    sub->add_option("--trials", mo.trials, "Monte Carlo trials")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--log-trials", mo.log_trials, "Write the event log of the first k trials")->check(CLI::NonNegativeNumber);
    add_common(sub, common);
  };
  CLI::App* mc = app.add_subcommand("mc", "Monte Carlo collapse race, one particle");
  add_process(mc);
  mc->add_option("--particles", mo.particles, "1 or 2")->check(CLI::IsMember({1, 2}))->capture_default_str();
  CLI::App* epr = app.add_subcommand("epr", "Monte Carlo collapse race, correlated pair");
  add_process(epr);
  epr->add_option("--alpha", mo.alpha, "Packet width coefficient")->check(CLI::PositiveNumber)->capture_default_str();
  epr->add_option("--beta", mo.beta, "Hit strength")->check(CLI::PositiveNumber)->capture_default_str();
  epr->add_option("--sep", mo.sep, "Peak separation within a particle")->check(CLI::PositiveNumber)->capture_default_str();

  KgOpts ko;
  CLI::App* kg = app.add_subcommand("kg", "Klein-Gordon solution inside collapse cones");
  kg->add_option("--mode", ko.mode, "single, double or plane")->capture_default_str();
  kg->add_option("--beta", ko.beta, "Hit strength")->capture_default_str();
  kg->add_option("--sep", ko.sep, "Distance between the two hits")->capture_default_str();
  kg->add_option("--n", ko.n, "Nodes per characteristic")->capture_default_str();
  kg->add_option("--extent", ko.extent, "Grid extent along each characteristic (default 8/sqrt(beta))");
  kg->add_option("--mass", ko.mass, "Particle mass")->capture_default_str();
  add_common(kg, common);

  ShiftOpts sh;
  CLI::App* shift = app.add_subcommand("shift", "Peak shifts after an incompatible pair of hits");
  shift->add_option("--alpha", sh.alpha, "Packet width coefficient")->capture_default_str();
  shift->add_option("--beta", sh.beta, "Hit strength")->capture_default_str();
  shift->add_option("--sep", sh.sep, "Peak separation")->capture_default_str();
  shift->add_option("--threshold", sh.threshold, "Tail threshold")->capture_default_str();
  add_common(shift, common);

  MagOpts ma;
  CLI::App* mag = app.add_subcommand("magnitudes", "Apparatus-scale lambda T and perception bound");
  mag->add_option("--L", ma.L, "Apparatus size in metres")->capture_default_str();
  mag->add_option("--N", ma.N, "Particle count")->capture_default_str();
  mag->add_option("--tau-col", ma.tau_col, "Single-particle collapse time in seconds")->capture_default_str();
  mag->add_option("--tau-per", ma.tau_per, "Perception time in seconds")->capture_default_str();
  mag->add_option("--a2", ma.a2, "Born weight for the deviation estimate")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  mag->add_option("--threshold", ma.threshold, "Deviation flag threshold")->capture_default_str();
  add_common(mag, common);

  SweepOpts sw;
  CLI::App* sweep = app.add_subcommand("sweep", "Grids of series, Monte Carlo or detectability cells");
  sweep->add_option("--mode", sw.mode, "series, mc or detect")->capture_default_str();
  sweep->add_option("--a2", sw.a2, "Born weights")->delimiter(',')->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sweep->add_option("--lambdaT", sw.lambda_t, "lambda T values")->delimiter(',')->check(CLI::NonNegativeNumber)->capture_default_str();
  sweep->add_option("--L", sw.L, "Apparatus sizes in metres")->delimiter(',')->capture_default_str();
  sweep->add_option("--N", sw.N, "Particle counts")->delimiter(',')->capture_default_str();
  sweep->add_option("--tau-col", sw.tau_col, "Single-particle collapse time in seconds")->capture_default_str();
  sweep->add_option("--threshold", sw.threshold, "Deviation flag threshold")->capture_default_str();
  sweep->add_option("--trials", sw.trials, "Monte Carlo trials per cell")->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_option("--particles", sw.particles, "1 or 2")->check(CLI::IsMember({1, 2}))->capture_default_str();
  add_common(sweep, common);

  PlotOpts po;
  CLI::App* plot = app.add_subcommand("plot", "Render a CSV written by another command as SVG");
  plot->add_option("input", po.input, "CSV file")->required();
  plot->add_option("--mode", po.mode, "auto, line or heat")->check(CLI::IsMember({"auto", "line", "heat"}))->capture_default_str();
  add_common(plot, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (app.get_subcommands().empty()) {
      if (argc > 1 && argv[1][0] != '-') {
        std::cerr << "error: unknown command '" << argv[1] << "'\n\n" << app.help();
      } else {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
      }
      return kExitUsage;
    }
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    const auto start = std::chrono::steady_clock::now();
    Run run(name, common.output_dir, common.formats);
    run.seed = common.seed;
    echo_config(*sub, run.config);
    int code = kExitOk;
    if (name == "series") code = run_series(so, run);
    else if (name == "mc") code = run_mc(mo, mo.particles == 1 ? Topology::single_particle : Topology::two_particle, run);
    else if (name == "epr") code = run_mc(mo, Topology::two_particle, run);
    else if (name == "kg") code = run_kg(ko, run);
    else if (name == "shift") code = run_shift(sh, run);
    else if (name == "magnitudes") code = run_magnitudes(ma, run);
    else if (name == "sweep") code = run_sweep(sw, run);
    else if (name == "plot") code = run_plot(po, run);
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
    run.finish(wall.count());
    return code;
  } catch (const RegimeError& e) {
    std::cerr << "out of regime: " << e.what() << "\n";
    return kExitRegime;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const OrderingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ConsistencyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
