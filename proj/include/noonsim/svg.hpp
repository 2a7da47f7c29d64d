#pragma once

#include <string>
#include <vector>

// Minimal self-contained SVG line plots; presentation only, nothing reads
// these back.
namespace noonsim::svg {

enum class Marker { none, circle, diamond };

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  Marker marker = Marker::none;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;

  void write(const std::string& path) const;
};

}  // namespace noonsim::svg
