#include <algorithm>
#include <cmath>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "doctest.h"

#include "chance/svg.h"
#include "support.h"

using namespace chance;
using Eigen::Vector2d;

namespace {

Centroids make_centroids(std::vector<Vector2d> mu) {
  Centroids c;
  c.mu = std::move(mu);
  return c;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("polygon area and containment") {
  const Polygon square{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  CHECK(polygon_area(square) == 4.0);
  CHECK(convex_contains(square, {1, 1}));
  CHECK(convex_contains(square, {2, 1}));
  CHECK_FALSE(convex_contains(square, {2.1, 1}));
  CHECK(nearest_index({{0, 0}, {2, 0}}, {1, 5}) == 0);
  CHECK(nearest_index({{0, 0}, {2, 0}}, {1.5, 0}) == 1);
}

TEST_CASE("voronoi cells") {
  const Rect pitch = pitch_bounds();
  SUBCASE("one centroid") {
    const auto cells = voronoi_cells(make_centroids({{10, 30}}), pitch);
    REQUIRE(cells.size() == 1);
    CHECK(polygon_area(cells[0]) == doctest::Approx(pitch.area()).epsilon(1e-12));
  }
  SUBCASE("two centroids split at x = 0") {
    const auto cells = voronoi_cells(make_centroids({{-40, 100}, {40, 100}}), pitch);
    REQUIRE(cells.size() == 2);
    for (const auto& v : cells[0]) CHECK(v.x() <= 1e-9);
    for (const auto& v : cells[1]) CHECK(v.x() >= -1e-9);
    CHECK(polygon_area(cells[0]) == doctest::Approx(pitch.area() / 2).epsilon(1e-12));
  }
  SUBCASE("eight centroids partition the pitch") {
    const auto c = pitch_centroids(Space::assist);
    const auto cells = voronoi_cells(c, pitch);
    REQUIRE(cells.size() == 8);
    double total = 0.0;
    for (const auto& cell : cells) total += polygon_area(cell);
    CHECK(std::abs(total - pitch.area()) < 1e-3 * pitch.area());
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(voronoi_cells(make_centroids({}), pitch), DomainError);
    CHECK_THROWS_AS(voronoi_cells(make_centroids({{1, 1}, {1, 1}}), pitch), DomainError);
  }
}

TEST_CASE("ramp colours") {
  CHECK(ramp_color(0.0) == "#440154");
  CHECK(ramp_color(1.0) == "#fde725");
  CHECK(ramp_color(0.5) == "#21918c");
  CHECK(ramp_color(-3.0) == "#440154");
  CHECK(ramp_color(7.0) == "#fde725");
}

TEST_CASE("pitch svg carries every landmark at its coordinates") {
  const auto svg = pitch_svg();
  for (const auto& l : kLandmarks) {
    std::ostringstream tag;
    tag << "data-name=\"" << l.name << "\" cx=\"" << l.x << "\" cy=\"" << l.y << "\"";
    CHECK_MESSAGE(svg.find(tag.str()) != std::string::npos, l.name);
  }
  CHECK(svg.find("cx=\"0\" cy=\"44\"") != std::string::npos);
  CHECK(count(svg, "class=\"landmark\"") == 9);
  CHECK(svg == pitch_svg());
}

TEST_CASE("surface svg") {
  SurfaceGrid flat{{-10, 10, 0, 20}, 4, 5, std::vector<double>(20, 0.3)};
  const auto svg = surface_svg(flat);
  std::regex fill("<rect class=\"cell\"[^>]*fill=\"(#[0-9a-f]{6})\"");
  std::set<std::string> fills;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), fill); it != std::sregex_iterator(); ++it) {
    fills.insert((*it)[1]);
  }
  CHECK(count(svg, "class=\"cell\"") == 20);
  CHECK(fills.size() == 1);
  CHECK(svg.find("legend") != std::string::npos);

  SurfaceGrid empty{{0, 0, 0, 5}, 2, 2, std::vector<double>(4, 1.0)};
  CHECK_THROWS_AS(surface_svg(empty), DomainError);
}

TEST_CASE("voronoi svg draws one polygon per cell") {
  const auto c = pitch_centroids(Space::assist);
  const auto cells = voronoi_cells(c, pitch_bounds());
  const auto svg = voronoi_svg(cells, c, pitch_bounds(), {0.1, 0.2, 0.05, 0.15, 0.1, 0.1, 0.2, 0.1});
  CHECK(count(svg, "<polygon class=\"cell\"") == 8);
  CHECK(svg == voronoi_svg(cells, c, pitch_bounds(), {0.1, 0.2, 0.05, 0.15, 0.1, 0.1, 0.2, 0.1}));
}

TEST_CASE("voronoi agrees with nearest-centroid classification") {
  const auto c = pitch_centroids(Space::assist);
  const Rect pitch = pitch_bounds();
  const auto cells = voronoi_cells(c, pitch);
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> ux(pitch.x_min, pitch.x_max), uy(pitch.y_min, pitch.y_max);
  std::size_t agree = 0, tested = 0;
  for (int i = 0; i < 100000; ++i) {
    const Vector2d p(ux(gen), uy(gen));
    std::vector<double> d;
    for (const auto& mu : c.mu) d.push_back((p - mu).norm());
    std::sort(d.begin(), d.end());
    if (d[1] - d[0] < 1e-9) continue;
    ++tested;
    const auto nearest = nearest_index(c.mu, p);
    std::size_t inside = 0, owner = 0;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (convex_contains(cells[k], p)) {
        ++inside;
        owner = k;
      }
    }
    agree += inside == 1 && owner == nearest;
  }
  CHECK(agree == tested);
}
