#include "chance/svg.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "chance/csv.h"
#include "chance/errors.h"

namespace chance {

namespace {

std::string num(double v) {
  if (v == 0.0) return "0";  // also folds -0
  return csv::format_double(v);
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr double kLegendWidth = 60.0;
constexpr double kPad = 10.0;

// Opens the document for data bounds `r` with room for a legend on the right,
// and opens the y-flipped drawing group.
void open_document(std::ostringstream& s, const Rect& r, const SvgStyle& style, bool legend) {
  const double w = r.width() + 2 * kPad + (legend ? kLegendWidth : 0.0);
  const double h = r.height() + 2 * kPad + (style.title.empty() ? 0.0 : 20.0);
  const double top = -(r.y_max + kPad + (style.title.empty() ? 0.0 : 20.0));
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(std::round(w * style.pixels_per_unit))
    << "\" height=\"" << num(std::round(h * style.pixels_per_unit)) << "\" viewBox=\""
    << num(r.x_min - kPad) << ' ' << num(top) << ' ' << num(w) << ' ' << num(h) << "\">\n";
  if (!style.title.empty()) {
    s << "<text x=\"" << num(r.x_min) << "\" y=\"" << num(-(r.y_max + kPad + 5))
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(style.title) << "</text>\n";
  }
  s << "<g id=\"data\" transform=\"scale(1,-1)\">\n";
}

void pitch_outline(std::ostringstream& s) {
  const double w = kPitchHalfWidth;
  const double l = kPitchLength;
  s << "<g id=\"pitch\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\">\n";
  s << "<rect x=\"" << num(-w) << "\" y=\"0\" width=\"" << num(2 * w) << "\" height=\"" << num(l) << "\"/>\n";
  s << "<line x1=\"" << num(-w) << "\" y1=\"" << num(l / 2) << "\" x2=\"" << num(w) << "\" y2=\""
    << num(l / 2) << "\"/>\n";
  s << "<circle cx=\"0\" cy=\"" << num(l / 2) << "\" r=\"36.67\"/>\n";
  // defended goal (shaded) and the opposition goal
  s << "<rect id=\"defended-goal\" x=\"-15\" y=\"-8\" width=\"30\" height=\"8\" fill=\"#bbbbbb\"/>\n";
  s << "<rect x=\"-15\" y=\"" << num(l) << "\" width=\"30\" height=\"8\"/>\n";
  for (double end : {0.0, l}) {
    const double sign = end == 0.0 ? 1.0 : -1.0;
    const double y6 = end == 0.0 ? 0.0 : l - 22;
    const double y18 = end == 0.0 ? 0.0 : l - 66;
    s << "<rect x=\"-37\" y=\"" << num(y6) << "\" width=\"74\" height=\"22\"/>\n";
    s << "<rect x=\"-81\" y=\"" << num(y18) << "\" width=\"162\" height=\"66\"/>\n";
    s << "<circle cx=\"0\" cy=\"" << num(end + sign * 44) << "\" r=\"1\" fill=\"#333333\"/>\n";
  }
  s << "</g>\n";
  s << "<g id=\"landmarks\" fill=\"#d62728\">\n";
  for (const auto& m : kLandmarks) {
    s << "<circle class=\"landmark\" data-name=\"" << m.name << "\" cx=\"" << num(m.x) << "\" cy=\""
      << num(m.y) << "\" r=\"1.5\"/>\n";
  }
  s << "</g>\n";
}

void legend(std::ostringstream& s, const Rect& r, double lo, double hi, const std::string& label) {
  const double x = r.x_max + kPad + 10;
  const int steps = 10;
  const double h = r.height() / steps;
  s << "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"8\">\n";
  for (int i = 0; i < steps; ++i) {
    const double t = (i + 0.5) / steps;
    // drawn outside the flipped group: screen y is -data y
    s << "<rect x=\"" << num(x) << "\" y=\"" << num(-(r.y_min + (i + 1) * h)) << "\" width=\"12\" height=\""
      << num(h) << "\" fill=\"" << ramp_color(t) << "\"/>\n";
  }
  s << "<text x=\"" << num(x + 14) << "\" y=\"" << num(-r.y_max + 8) << "\">" << escape_xml(csv::format_double(hi))
    << "</text>\n";
  s << "<text x=\"" << num(x + 14) << "\" y=\"" << num(-r.y_min) << "\">" << escape_xml(csv::format_double(lo))
    << "</text>\n";
  s << "<text x=\"" << num(x) << "\" y=\"" << num(-r.y_min + 10) << "\">" << escape_xml(label) << "</text>\n";
  s << "</g>\n";
}

Rect union_rect(Rect a, const Rect& b) {
  a.x_min = std::min(a.x_min, b.x_min);
  a.x_max = std::max(a.x_max, b.x_max);
  a.y_min = std::min(a.y_min, b.y_min);
  a.y_max = std::max(a.y_max, b.y_max);
  return a;
}

}  // namespace

std::string ramp_color(double t) {
  static constexpr std::array<std::array<int, 3>, 5> stops{
      {{0x44, 0x01, 0x54}, {0x3b, 0x52, 0x8b}, {0x21, 0x91, 0x8c}, {0x5e, 0xc9, 0x62}, {0xfd, 0xe7, 0x25}}};
  if (!(t >= 0.0)) t = 0.0;
  t = std::min(t, 1.0);
  const double pos = t * (stops.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(pos), stops.size() - 2);
  const double f = pos - static_cast<double>(i);
  char buf[8];
  int c[3];
  for (int k = 0; k < 3; ++k) {
    c[k] = static_cast<int>(std::lround(stops[i][k] + f * (stops[i + 1][k] - stops[i][k])));
  }
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

std::string pitch_svg(const SvgStyle& style) {
  std::ostringstream s;
  const Rect r{-kPitchHalfWidth - 0.0, static_cast<double>(kPitchHalfWidth), -8.0, kPitchLength + 8.0};
  open_document(s, r, style, false);
  pitch_outline(s);
  s << "</g>\n</svg>\n";
  return s.str();
}

std::string surface_svg(const SurfaceGrid& surface, const SvgStyle& style) {
  if (surface.nx == 0 || surface.ny == 0 || !(surface.bounds.width() > 0.0) ||
      !(surface.bounds.height() > 0.0)) {
    throw DomainError("surface grid has zero area");
  }
  if (surface.values.size() != surface.nx * surface.ny) throw DomainError("surface grid is incomplete");
  const auto [lo_it, hi_it] = std::minmax_element(surface.values.begin(), surface.values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const Rect frame = style.pitch ? union_rect(surface.bounds, {-static_cast<double>(kPitchHalfWidth),
                                                               static_cast<double>(kPitchHalfWidth), -8.0,
                                                               kPitchLength + 8.0})
                                 : surface.bounds;
  std::ostringstream s;
  open_document(s, frame, style, true);
  s << "<g id=\"surface\" shape-rendering=\"crispEdges\">\n";
  const double w = surface.cell_width();
  const double h = surface.cell_height();
  for (std::size_t j = 0; j < surface.ny; ++j) {
    for (std::size_t i = 0; i < surface.nx; ++i) {
      const double t = hi > lo ? (surface.at(i, j) - lo) / (hi - lo) : 0.0;
      s << "<rect class=\"cell\" x=\"" << num(surface.bounds.x_min + i * w) << "\" y=\"" << num(surface.bounds.y_min + j * h)
        << "\" width=\"" << num(w) << "\" height=\"" << num(h) << "\" fill=\"" << ramp_color(t) << "\"/>\n";
    }
  }
  s << "</g>\n";
  if (style.pitch) pitch_outline(s);
  s << "</g>\n";
  legend(s, frame, lo, hi, "density");
  s << "</svg>\n";
  return s.str();
}

std::string voronoi_svg(const std::vector<Polygon>& cells, const Centroids& centroids, const Rect& bounds,
                        const std::vector<double>& weights, const SvgStyle& style) {
  if (!(bounds.width() > 0.0 && bounds.height() > 0.0)) throw DomainError("Voronoi bounds have zero area");
  if (!weights.empty() && weights.size() != cells.size()) {
    throw DomainError("one weight per Voronoi cell is required");
  }
  double lo = 0.0, hi = 1.0;
  if (!weights.empty()) {
    lo = *std::min_element(weights.begin(), weights.end());
    hi = *std::max_element(weights.begin(), weights.end());
  }
  const Rect frame = style.pitch ? union_rect(bounds, {-static_cast<double>(kPitchHalfWidth),
                                                       static_cast<double>(kPitchHalfWidth), -8.0,
                                                       kPitchLength + 8.0})
                                 : bounds;
  std::ostringstream s;
  open_document(s, frame, style, !weights.empty());
  s << "<g id=\"voronoi\" stroke=\"#ffffff\" stroke-width=\"1\">\n";
  for (std::size_t c = 0; c < cells.size(); ++c) {
    double t;
    if (weights.empty()) {
      t = cells.size() > 1 ? static_cast<double>(c) / static_cast<double>(cells.size() - 1) : 0.5;
    } else {
      t = hi > lo ? (weights[c] - lo) / (hi - lo) : 0.0;
    }
    s << "<polygon class=\"cell\" data-component=\"" << c + 1 << "\" fill=\"" << ramp_color(t) << "\" points=\"";
    for (std::size_t k = 0; k < cells[c].size(); ++k) {
      if (k) s << ' ';
      s << num(cells[c][k].x()) << ',' << num(cells[c][k].y());
    }
    s << "\"/>\n";
  }
  s << "</g>\n<g id=\"centroids\" fill=\"#000000\">\n";
  for (const auto& mu : centroids.mu) {
    s << "<circle cx=\"" << num(mu.x()) << "\" cy=\"" << num(mu.y()) << "\" r=\"2\"/>\n";
  }
  s << "</g>\n";
  if (style.pitch) pitch_outline(s);
  s << "</g>\n";
  if (!weights.empty()) legend(s, frame, lo, hi, "weight");
  s << "</svg>\n";
  return s.str();
}

std::string radar_svg(const ReportTable& weights, const SvgStyle& style) {
  weights.validate();
  const std::size_t axes = weights.columns.size();
  if (axes < 3) throw DomainError("a radar plot needs at least three axes");
  double top = 0.0;
  for (const auto& row : weights.values) {
    for (double v : row) top = std::max(top, v);
  }
  if (!(top > 0.0)) top = 1.0;
  const double radius = 100.0;
  const Rect frame{-radius - 20, radius + 20, -radius - 20, radius + 20};
  std::ostringstream s;
  open_document(s, frame, style, true);
  auto point = [&](std::size_t k, double v) {
    const double a = std::numbers::pi / 2 - 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(axes);
    return Eigen::Vector2d(radius * v / top * std::cos(a), radius * v / top * std::sin(a));
  };
  s << "<g id=\"axes\" stroke=\"#999999\" stroke-width=\"0.5\" fill=\"none\">\n";
  s << "<circle cx=\"0\" cy=\"0\" r=\"" << num(radius) << "\"/>\n";
  for (std::size_t k = 0; k < axes; ++k) {
    const auto p = point(k, top);
    s << "<line x1=\"0\" y1=\"0\" x2=\"" << num(p.x()) << "\" y2=\"" << num(p.y()) << "\"/>\n";
  }
  s << "</g>\n<g id=\"series\" fill-opacity=\"0.15\" stroke-width=\"1.5\">\n";
  for (std::size_t r = 0; r < weights.rows.size(); ++r) {
    const double t = weights.rows.size() > 1 ? static_cast<double>(r) / static_cast<double>(weights.rows.size() - 1) : 0.5;
    const auto colour = ramp_color(t);
    s << "<polygon data-series=\"" << escape_xml(weights.rows[r]) << "\" fill=\"" << colour << "\" stroke=\""
      << colour << "\" points=\"";
    for (std::size_t k = 0; k < axes; ++k) {
      const auto p = point(k, weights.values[r][k]);
      if (k) s << ' ';
      s << num(p.x()) << ',' << num(p.y());
    }
    s << "\"/>\n";
  }
  s << "</g>\n</g>\n";
  s << "<g id=\"labels\" font-family=\"sans-serif\" font-size=\"8\">\n";
  for (std::size_t k = 0; k < axes; ++k) {
    const auto p = point(k, top * 1.1);
    s << "<text x=\"" << num(p.x()) << "\" y=\"" << num(-p.y()) << "\" text-anchor=\"middle\">"
      << escape_xml(weights.columns[k]) << "</text>\n";
  }
  for (std::size_t r = 0; r < weights.rows.size(); ++r) {
    const double t = weights.rows.size() > 1 ? static_cast<double>(r) / static_cast<double>(weights.rows.size() - 1) : 0.5;
    s << "<text x=\"" << num(frame.x_max + kPad + 10) << "\" y=\"" << num(-frame.y_max + 10 * (r + 1))
      << "\" fill=\"" << ramp_color(t) << "\">" << escape_xml(weights.rows[r]) << "</text>\n";
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

}  // namespace chance
