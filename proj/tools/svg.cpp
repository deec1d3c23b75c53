#include "svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace svg {
namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 480;
constexpr double kLeft = 80;
constexpr double kRight = 30;
constexpr double kTop = 40;
constexpr double kBottom = 60;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                 "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi == lo) {
      const double d = lo == 0 ? 1.0 : 0.05 * std::abs(lo);
      lo -= d;
      hi += d;
    }
  }
};

// Round step (1, 2, 5 times a power of ten) giving about five ticks.
std::vector<double> ticks(Range r) {
  const double raw = (r.hi - r.lo) / 5;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {2.0, 5.0, 10.0}) {
    if (raw > step) step = m * mag;
  }
  std::vector<double> out;
  for (double t = std::ceil(r.lo / step) * step; t <= r.hi + 1e-9 * step; t += step) {
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return out;
}

void frame(std::ostringstream& os, Range xr, Range yr, const Axes& axes) {
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (double t : ticks(xr)) {
    const double px = kLeft + (t - xr.lo) / (xr.hi - xr.lo) * pw;
    os << "<line x1=\"" << num(px) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(px)
       << "\" y2=\"" << kTop + ph + 5 << "\" stroke=\"#333\"/>"
       << "<text x=\"" << num(px) << "\" y=\"" << kTop + ph + 20
       << "\" text-anchor=\"middle\" font-size=\"12\">" << num(t) << "</text>\n";
  }
  for (double t : ticks(yr)) {
    const double py = kTop + ph - (t - yr.lo) / (yr.hi - yr.lo) * ph;
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(py) << "\" x2=\"" << kLeft
       << "\" y2=\"" << num(py) << "\" stroke=\"#333\"/>"
       << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(py + 4)
       << "\" text-anchor=\"end\" font-size=\"12\">" << num(t) << "</text>\n";
  }
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kTop - 15
     << "\" text-anchor=\"middle\" font-size=\"15\">" << escape(axes.title) << "</text>\n";
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15
     << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(axes.x_label) << "</text>\n";
  os << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
     << "transform=\"rotate(-90 18 " << kTop + ph / 2 << ")\">" << escape(axes.y_label)
     << "</text>\n";
}

std::string open() {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return os.str();
}

}  // namespace

std::string line_plot(const std::vector<Series>& series, const Axes& axes) {
  Range xr, yr;
  for (const Series& s : series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  xr.pad();
  yr.pad();
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::ostringstream os;
  os << open();
  frame(os, xr, yr, axes);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* colour = kPalette[k % kPalette.size()];
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t j = 0; j < s.x.size(); ++j) os << num(px(s.x[j])) << ',' << num(py(s.y[j])) << ' ';
    os << "\"/>\n";
    if (s.markers) {
      for (std::size_t j = 0; j < s.x.size(); ++j) {
        os << "<circle cx=\"" << num(px(s.x[j])) << "\" cy=\"" << num(py(s.y[j]))
           << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
      }
    }
    const double ly = kTop + 15 + 16 * static_cast<double>(k);
    os << "<line x1=\"" << kLeft + 10 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + 30 << "\" y2=\""
       << ly << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>"
       << "<text x=\"" << kLeft + 35 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">"
       << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string heat_map(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& value, const Axes& axes) {
  Range xr, yr, vr;
  for (double v : x) xr.add(v);
  for (double v : y) yr.add(v);
  for (double v : value) vr.add(v);
  xr.pad();
  yr.pad();
  vr.pad();
  constexpr int kCols = 160;
  constexpr int kRows = 110;
  std::vector<double> pixel(kCols * kRows, -1.0);
  for (std::size_t k = 0; k < value.size(); ++k) {
    const int c = std::clamp(static_cast<int>((x[k] - xr.lo) / (xr.hi - xr.lo) * kCols), 0, kCols - 1);
    const int r = std::clamp(static_cast<int>((y[k] - yr.lo) / (yr.hi - yr.lo) * kRows), 0, kRows - 1);
    pixel[r * kCols + c] = std::max(pixel[r * kCols + c], value[k]);
  }
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const double cw = pw / kCols;
  const double ch = ph / kRows;

  std::ostringstream os;
  os << open();
  for (int r = 0; r < kRows; ++r) {
    for (int c = 0; c < kCols; ++c) {
      const double v = pixel[r * kCols + c];
      if (v < 0) continue;
      const double f = std::clamp((v - vr.lo) / (vr.hi - vr.lo), 0.0, 1.0);
      // White to dark blue.
      const int red = static_cast<int>(255 * (1 - f));
      const int green = static_cast<int>(255 * (1 - 0.8 * f));
      const int blue = static_cast<int>(255 - 100 * f);
      char colour[8];
      std::snprintf(colour, sizeof colour, "#%02x%02x%02x", red, green, blue);
      os << "<rect x=\"" << num(kLeft + c * cw) << "\" y=\"" << num(kTop + ph - (r + 1) * ch)
         << "\" width=\"" << num(cw + 0.3) << "\" height=\"" << num(ch + 0.3) << "\" fill=\""
         << colour << "\"/>\n";
    }
  }
  frame(os, xr, yr, axes);
  os << "</svg>\n";
  return os.str();
}

}  // namespace svg
