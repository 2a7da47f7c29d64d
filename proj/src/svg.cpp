#include "noonsim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace noonsim::svg {

namespace {

constexpr double kWidth = 860.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 80.0, kRight = 30.0, kTop = 42.0, kBottom = 58.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double nice_step(double span, int target_ticks) {
  if (span <= 0.0) return 1.0;
  const double raw = span / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace

void Plot::write(const std::string& path) const {
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = 0.0, y_max = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    for (double v : s.x) {
      x_min = std::min(x_min, v);
      x_max = std::max(x_max, v);
    }
    for (double v : s.y) {
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (!(x_max > x_min)) {
    x_min -= 1.0;
    x_max += 1.0;
  }
  if (!(y_max > y_min)) y_max = y_min + 1.0;
  y_max *= 1.06;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - y_min) / (y_max - y_min) * ph; };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("svg: cannot open " + path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
      << "' viewBox='0 0 " << kWidth << " " << kHeight << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' font-family='sans-serif'"
      << " font-size='16'>" << title << "</text>\n";

  // Gridlines and tick labels.
  const double xs = nice_step(x_max - x_min, 8);
  const double ys = nice_step(y_max - y_min, 6);
  out << "<g font-family='sans-serif' font-size='11' fill='#444'>\n";
  for (double t = std::ceil(x_min / xs) * xs; t <= x_max + 1e-9 * xs; t += xs) {
    out << "<line x1='" << px(t) << "' y1='" << kTop << "' x2='" << px(t) << "' y2='"
        << kTop + ph << "' stroke='#e0e0e0'/>\n";
    out << "<text x='" << px(t) << "' y='" << kTop + ph + 16 << "' text-anchor='middle'>" << num(t)
        << "</text>\n";
  }
  for (double t = std::ceil(y_min / ys) * ys; t <= y_max + 1e-9 * ys; t += ys) {
    out << "<line x1='" << kLeft << "' y1='" << py(t) << "' x2='" << kLeft + pw << "' y2='"
        << py(t) << "' stroke='#e0e0e0'/>\n";
    out << "<text x='" << kLeft - 6 << "' y='" << py(t) + 4 << "' text-anchor='end'>" << num(t)
        << "</text>\n";
  }
  out << "</g>\n";
  out << "<rect x='" << kLeft << "' y='" << kTop << "' width='" << pw << "' height='" << ph
      << "' fill='none' stroke='#333'/>\n";
  out << "<text x='" << kLeft + pw / 2 << "' y='" << kHeight - 14
      << "' text-anchor='middle' font-family='sans-serif' font-size='13'>" << x_label
      << "</text>\n";
  out << "<text x='20' y='" << kTop + ph / 2
      << "' text-anchor='middle' font-family='sans-serif' font-size='13' transform='rotate(-90 20 "
      << kTop + ph / 2 << ")'>" << y_label << "</text>\n";

  for (const auto& s : series) {
    out << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.6' points='";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    out << "'/>\n";
    if (s.marker == Marker::circle) {
      for (std::size_t i = 0; i < s.x.size(); ++i)
        out << "<circle cx='" << px(s.x[i]) << "' cy='" << py(s.y[i]) << "' r='3' fill='"
            << s.color << "'/>\n";
    } else if (s.marker == Marker::diamond) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double cx = px(s.x[i]), cy = py(s.y[i]);
        out << "<path d='M " << cx << ' ' << cy - 4 << " L " << cx + 4 << ' ' << cy << " L " << cx
            << ' ' << cy + 4 << " L " << cx - 4 << ' ' << cy << " Z' fill='" << s.color
            << "'/>\n";
      }
    }
  }

  // Legend.
  double ly = kTop + 14;
  out << "<g font-family='sans-serif' font-size='12'>\n";
  for (const auto& s : series) {
    const double lx = kLeft + pw - 170;
    out << "<line x1='" << lx << "' y1='" << ly - 4 << "' x2='" << lx + 24 << "' y2='" << ly - 4
        << "' stroke='" << s.color << "' stroke-width='2'/>\n";
    out << "<text x='" << lx + 30 << "' y='" << ly << "'>" << s.label << "</text>\n";
    ly += 18;
  }
  out << "</g>\n</svg>\n";
  if (!out) throw std::runtime_error("svg: write failed for " + path);
}

}  // namespace noonsim::svg
