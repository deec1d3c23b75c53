#pragma once

#include <string>
#include <vector>

namespace svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
};

std::string line_plot(const std::vector<Series>& series, const Axes& axes);

// Scattered samples (x, y, value) binned onto a raster; each pixel shows the
// largest value that falls into it.
std::string heat_map(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& value, const Axes& axes);

}  // namespace svg
