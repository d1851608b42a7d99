#pragma once

// Standalone SVG output. Drawing happens in data coordinates inside a group
// that flips the y axis, so pitch features sit at their exact coordinates
// (e.g. the penalty spot circle has cx="0" cy="44").
//
// Colour ramp: linear interpolation through five viridis stops
// #440154 #3b528b #21918c #5ec962 #fde725, from the minimum to the maximum value.

#include <array>
#include <string>
#include <vector>

#include "chance/analytics.h"
#include "chance/geometry.h"

namespace chance {

struct Landmark {
  const char* name;
  double x;
  double y;
};

// Key reference points of the pitch map.
inline constexpr std::array<Landmark, 9> kLandmarks{{
    {"defended-goal-centre", 0, 0},
    {"right-goalpost", 15, 0},
    {"left-goalpost", -15, 0},
    {"six-yard-box-right-corner", 37, 22},
    {"six-yard-box-left-corner", -37, 22},
    {"penalty-spot", 0, 44},
    {"eighteen-yard-box-right-corner", 81, 66},
    {"eighteen-yard-box-left-corner", -81, 66},
    {"centre-spot", 0, 210},
}};

struct SvgStyle {
  std::string title;
  double pixels_per_unit = 1.5;
  bool pitch = true;  // draw the pitch outline
};

// "#rrggbb" for t in [0, 1] (clamped).
std::string ramp_color(double t);

std::string pitch_svg(const SvgStyle& style = {});
// Throws DomainError for a zero-area grid.
std::string surface_svg(const SurfaceGrid& surface, const SvgStyle& style = {});
// weights (optional, one per cell) colour the cells; otherwise cells get distinct ramp colours.
std::string voronoi_svg(const std::vector<Polygon>& cells, const Centroids& centroids, const Rect& bounds,
                        const std::vector<double>& weights = {}, const SvgStyle& style = {});
// One polygon per table row over the component axes.
std::string radar_svg(const ReportTable& weights, const SvgStyle& style = {});

}  // namespace chance
