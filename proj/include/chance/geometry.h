#pragma once

#include <vector>

#include <Eigen/Dense>

#include "chance/model.h"

namespace chance {

struct Rect {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  bool contains(const Eigen::Vector2d& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
  }
  bool contains(const Rect& r) const {
    return r.x_min >= x_min && r.x_max <= x_max && r.y_min >= y_min && r.y_max <= y_max;
  }
};

// The playing area and the region a chance offset can occupy.
Rect pitch_bounds();
Rect delta_bounds();
Rect space_bounds(Space space);

// Counter-clockwise vertices.
using Polygon = std::vector<Eigen::Vector2d>;

double polygon_area(const Polygon& poly);
// Convex polygons only; points on an edge count as inside.
bool convex_contains(const Polygon& poly, const Eigen::Vector2d& p, double tolerance = 0.0);

// Nearest centroid with ties to the lower index.
std::size_t nearest_index(const std::vector<Eigen::Vector2d>& sites, const Eigen::Vector2d& p);

// One convex cell per centroid, in centroid order: the rectangle clipped by the
// perpendicular bisector against every other centroid. Throws DomainError for
// no centroids or duplicates.
std::vector<Polygon> voronoi_cells(const Centroids& centroids, const Rect& bounds);

}  // namespace chance
