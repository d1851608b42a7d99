#include "chance/geometry.h"

#include <cmath>
#include <limits>

#include "chance/errors.h"

namespace chance {

Rect pitch_bounds() {
  return {-static_cast<double>(kPitchHalfWidth), static_cast<double>(kPitchHalfWidth), 0.0,
          static_cast<double>(kPitchLength)};
}

Rect delta_bounds() {
  return {-2.0 * kPitchHalfWidth, 2.0 * kPitchHalfWidth, -static_cast<double>(kPitchLength),
          static_cast<double>(kPitchLength)};
}

Rect space_bounds(Space space) { return space == Space::assist ? pitch_bounds() : delta_bounds(); }

double polygon_area(const Polygon& poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(twice);
}

bool convex_contains(const Polygon& poly, const Eigen::Vector2d& p, double tolerance) {
  if (poly.size() < 3) return false;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector2d e = poly[(i + 1) % poly.size()] - poly[i];
    const Eigen::Vector2d d = p - poly[i];
    if (e.x() * d.y() - e.y() * d.x() < -tolerance * e.norm()) return false;
  }
  return true;
}

std::size_t nearest_index(const std::vector<Eigen::Vector2d>& sites, const Eigen::Vector2d& p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const double d = (p - sites[i]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

namespace {

// Keeps the part of `poly` where n . x <= c.
Polygon clip(const Polygon& poly, const Eigen::Vector2d& n, double c) {
  Polygon out;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    const double fa = n.dot(a) - c;
    const double fb = n.dot(b) - c;
    if (fa <= 0.0) out.push_back(a);
    if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
      const double t = fa / (fa - fb);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

}  // namespace

std::vector<Polygon> voronoi_cells(const Centroids& centroids, const Rect& bounds) {
  const auto& sites = centroids.mu;
  if (sites.empty()) throw DomainError("Voronoi diagram needs at least one centroid");
  if (!(bounds.width() > 0.0 && bounds.height() > 0.0)) throw DomainError("Voronoi bounds have no area");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (std::size_t j = i + 1; j < sites.size(); ++j) {
      if (sites[i] == sites[j]) {
        throw DomainError("centroids " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                          " coincide");
      }
    }
  }
  const Polygon rect{{bounds.x_min, bounds.y_min},
                     {bounds.x_max, bounds.y_min},
                     {bounds.x_max, bounds.y_max},
                     {bounds.x_min, bounds.y_max}};
  std::vector<Polygon> cells;
  cells.reserve(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    Polygon cell = rect;
    for (std::size_t j = 0; j < sites.size() && !cell.empty(); ++j) {
      if (j == i) continue;
      // |x - s_i|^2 <= |x - s_j|^2  <=>  2 (s_j - s_i) . x <= |s_j|^2 - |s_i|^2
      const Eigen::Vector2d n = 2.0 * (sites[j] - sites[i]);
      const double c = sites[j].squaredNorm() - sites[i].squaredNorm();
      cell = clip(cell, n, c);
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace chance
