#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"

#include "chance/analytics.h"
#include "chance/sbc.h"
#include "support.h"

using namespace chance;

namespace {

// Draws built by hand: J teams with `roster` players each, M components.
PosteriorDraws hand_draws(std::size_t teams, std::size_t roster, std::size_t count) {
  PosteriorDraws d;
  d.index = synthetic_index(teams, roster, 8);
  d.assist_centroids = toy_centroids(Space::assist);
  d.delta_centroids = toy_centroids(Space::delta);
  const auto s = initial_state(d.index);
  for (std::size_t i = 0; i < count; ++i) d.draws.push_back({0, i, s.rate, s.players, s.assist, s.delta});
  return d;
}

double column_sum(const ReportTable& t, std::size_t c) {
  double s = 0.0;
  for (const auto& row : t.values) s += row[c];
  return s;
}

}  // namespace

TEST_CASE("team ability table") {
  auto d = hand_draws(4, 1, 3);
  const auto zero = team_ability_table(d);
  CHECK(zero.rows.size() == 4);
  CHECK(zero.columns == std::vector<std::string>{"t1", "t2", "t3", "t4", "t5", "t6"});
  for (const auto& row : zero.values) {
    for (double v : row) CHECK(v == 0.0);
  }
  d.draws[0].rate.set_free_theta(BlockIndex(1), std::vector<double>{0.2, 0.1, -0.5});
  d.draws[1].rate.set_free_theta(BlockIndex(1), std::vector<double>{0.9, -0.4, 0.05});
  d.draws[2].rate.set_free_theta(BlockIndex(6), std::vector<double>{-1.0, 0.3, 0.3});
  const auto t = team_ability_table(d);
  for (std::size_t c = 0; c < 6; ++c) CHECK(std::abs(column_sum(t, c)) < 1e-9);
  CHECK(t.values[0][0] == doctest::Approx((0.2 + 0.9) / 3));
  REQUIRE(t.lower.has_value());
  CHECK((*t.lower)[0][0] <= t.values[0][0]);
  CHECK((*t.upper)[0][0] >= t.values[0][0]);
}

TEST_CASE("home effect summary") {
  auto d = hand_draws(2, 1, 5);
  const std::vector<double> g{0.05, 0.08, 0.1, 0.12, 0.15};
  for (std::size_t i = 0; i < 5; ++i) d.draws[i].rate.gamma.fill(g[i]);
  const auto t = home_effect_summary(d);
  CHECK(t.rows.size() == 6);
  CHECK(t.columns == std::vector<std::string>{"mean", "q2.5", "q97.5"});
  for (const auto& row : t.values) {
    CHECK(row[0] == doctest::Approx(0.1));
    CHECK(row[1] < 0.1);
    CHECK(row[2] > 0.1);
  }
  for (auto& dr : d.draws) dr.rate.gamma.fill(0.3);
  for (const auto& row : home_effect_summary(d).values) {
    CHECK(row[1] == row[2]);
    CHECK(row[0] == doctest::Approx(0.3));
  }
}

TEST_CASE("radar weights") {
  auto d = hand_draws(2, 2, 4);
  const auto prior = radar_weights(d, {"T01P02", "T01"}, Space::delta);
  CHECK(prior.rows.size() == 6);
  CHECK(prior.columns.size() == 8);
  for (const auto& row : prior.values) {
    for (double v : row) CHECK(v == doctest::Approx(0.125).epsilon(1e-15));
  }
  StreamRng rng(3);
  for (auto& dr : d.draws) {
    for (int b = 1; b <= 6; ++b) {
      auto k = kappa_slice(d.index, dr.assist, 0, BlockIndex(b));
      const auto v = sample_dirichlet(rng, std::vector<double>(8, 0.7));
      std::copy(v.begin(), v.end(), k.begin());
    }
  }
  for (const auto& row : radar_weights(d, {"T01P01", "T01"}, Space::assist).values) {
    CHECK(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) < 1e-9);
  }
  CHECK_THROWS_AS(radar_weights(d, {"nobody", "T01"}, Space::assist), LookupError);
}

TEST_CASE("density surface") {
  auto d = hand_draws(2, 1, 1);
  auto& dr = d.draws[0];
  auto k = kappa_slice(d.index, dr.assist, 0, BlockIndex(2));
  std::fill(k.begin(), k.end(), 0.0);
  k[3] = 1.0;
  for (auto& s : dr.assist.sigma) s << 9, 2, 2, 4;
  const GridSpec grid{{-20, 20, 180, 220}, 80, 80};
  const auto s = density_surface(d, {"T01P01", "T01"}, BlockIndex(2), Space::assist, grid);
  REQUIRE(s.values.size() == 6400);

  // a single draw equals the mixture density pointwise
  const std::vector<double> kv(k.begin(), k.end());
  double worst = 0.0;
  std::size_t argmax = 0;
  for (std::size_t j = 0; j < s.ny; ++j) {
    for (std::size_t i = 0; i < s.nx; ++i) {
      const double direct = std::exp(gmm_log_density(s.cell_centre(i, j), kv, d.assist_centroids, dr.assist.sigma));
      worst = std::max(worst, std::abs(direct - s.at(i, j)));
      if (s.values[j * s.nx + i] > s.values[argmax]) argmax = j * s.nx + i;
    }
  }
  CHECK(worst < 1e-12);
  const auto peak = s.cell_centre(argmax % s.nx, argmax / s.nx);
  CHECK((peak - d.assist_centroids.mu[3]).norm() < 0.5 * std::hypot(s.cell_width(), s.cell_height()) + 1e-9);

  CHECK_THROWS_AS(density_surface(d, {"T01P01", "T01"}, BlockIndex(2), Space::assist, {{0, 1, 0, 1}, 1, 5}),
                  DomainError);
  CHECK_THROWS_AS(density_surface(d, {"T01P01", "T01"}, BlockIndex(2), Space::assist, {{0, 0, 0, 1}, 5, 5}),
                  DomainError);
}

TEST_CASE("surface of two draws averages them") {
  auto d = hand_draws(2, 1, 2);
  for (std::size_t i = 0; i < 2; ++i) {
    auto k = kappa_slice(d.index, d.draws[i].delta, 0, BlockIndex(1));
    std::fill(k.begin(), k.end(), 0.0);
    k[i == 0 ? 0 : 4] = 1.0;
  }
  // components 0 and 4 sit opposite each other on the ring with the same covariance
  auto value_at = [&](const Eigen::Vector2d& p) {
    const GridSpec tiny{{p.x() - 1e-3, p.x() + 1e-3, p.y() - 1e-3, p.y() + 1e-3}, 2, 2};
    return density_surface(d, {"T01P01", "T01"}, BlockIndex(1), Space::delta, tiny).values[0];
  };
  const double a = value_at(d.delta_centroids.mu[0]);
  const double b = value_at(d.delta_centroids.mu[4]);
  CHECK(a == doctest::Approx(b).epsilon(1e-6));
  CHECK(a == doctest::Approx(0.5 / (2 * M_PI)).epsilon(1e-6));
  CHECK(value_at(d.delta_centroids.mu[2]) < 1e-3 * a);
}

TEST_CASE("surfaces integrate to one on the standard grid") {
  auto d = hand_draws(2, 2, 3);
  StreamRng rng(8);
  for (auto& dr : d.draws) {
    for (auto& s : dr.assist.sigma) s = sample_inverse_wishart(rng, Eigen::Matrix2d::Identity() * 8, 6);
    auto k = kappa_slice(d.index, dr.assist, 1, BlockIndex(4));
    const auto v = sample_dirichlet(rng, std::vector<double>(8, 1.0));
    std::copy(v.begin(), v.end(), k.begin());
  }
  const auto grid = standard_grid(d, Space::assist);
  const auto s = density_surface(d, {"T01P02", "T01"}, BlockIndex(4), Space::assist, grid);
  CHECK(s.integral() >= 0.98);
  CHECK(s.integral() <= 1.01);
  for (double v : s.values) CHECK(v >= 0.0);
}

TEST_CASE("involvement probability") {
  SUBCASE("identical players share equally") {
    auto d = hand_draws(2, 11, 2);
    const auto t = involvement_probability(d, "T02", BlockIndex(3), PointQuery{{0, 200}}, Role::assist);
    REQUIRE(t.rows.size() == 11);
    for (const auto& row : t.values) CHECK(row[0] == doctest::Approx(1.0 / 11).epsilon(1e-12));
  }
  SUBCASE("the player whose component covers the point") {
    auto d = hand_draws(2, 4, 1);
    auto& dr = d.draws[0];
    for (std::size_t p = 0; p < 4; ++p) {
      auto k = kappa_slice(d.index, dr.assist, p, BlockIndex(1));
      std::fill(k.begin(), k.end(), 0.0);
      k[p == 2 ? 1 : 5] = 1.0;
    }
    // components sit 8 apart with sd 0.8: ten standard deviations
    for (auto& s : dr.assist.sigma) s = Eigen::Matrix2d::Identity() * 0.64;
    const Eigen::Vector2d at = d.assist_centroids.mu[1];
    const auto t = involvement_probability(d, "T01", BlockIndex(1), PointQuery{at}, Role::assist);
    CHECK(t.values[2][0] > 0.95);
    const auto r = involvement_probability(
        d, "T01", BlockIndex(1), RectQuery{{at.x() - 1, at.x() + 1, at.y() - 1, at.y() + 1}}, Role::assist);
    CHECK(r.values[2][0] > 0.95);
  }
  SUBCASE("columns sum to one and scaling every density changes nothing") {
    auto d = hand_draws(3, 5, 3);
    StreamRng rng(1);
    for (auto& dr : d.draws) {
      for (auto& s : dr.delta.sigma) s = sample_inverse_wishart(rng, Eigen::Matrix2d::Identity() * 4, 5);
      for (std::size_t p = 0; p < d.index.player_count(); ++p) {
        auto k = kappa_slice(d.index, dr.delta, p, BlockIndex(5));
        const auto v = sample_dirichlet(rng, std::vector<double>(8, 1.0));
        std::copy(v.begin(), v.end(), k.begin());
      }
      auto phi = phi_slice(d.index, dr.players.phi_chance, 1, BlockIndex(5));
      const auto v = sample_dirichlet(rng, std::vector<double>(5, 1.0));
      std::copy(v.begin(), v.end(), phi.begin());
    }
    const RectQuery q{{-3, 2, -1, 4}, 20};
    const auto t = involvement_probability(d, "T02", BlockIndex(5), q, Role::chance);
    CHECK(std::abs(column_sum(t, 0) - 1.0) < 1e-9);

    // scaling every covariance by c^2 and every centroid by c scales all densities by 1/c^2
    auto scaled = d;
    for (auto& mu : scaled.delta_centroids.mu) mu *= 2.0;
    for (auto& dr : scaled.draws) {
      for (auto& s : dr.delta.sigma) s *= 4.0;
    }
    const RectQuery q2{{-6, 4, -2, 8}, 20};
    const auto u = involvement_probability(scaled, "T02", BlockIndex(5), q2, Role::chance);
    for (std::size_t i = 0; i < 5; ++i) CHECK(u.values[i][0] == doctest::Approx(t.values[i][0]).epsilon(1e-10));

    std::ostringstream a, b;
    write_table_csv(a, t);
    write_table_csv(b, involvement_probability(d, "T02", BlockIndex(5), q, Role::chance));
    CHECK(a.str() == b.str());
  }
  SUBCASE("regions outside the space") {
    auto d = hand_draws(2, 2, 1);
    CHECK_THROWS_AS(involvement_probability(d, "T01", BlockIndex(1), PointQuery{{0, -10}}, Role::assist), DomainError);
    CHECK_THROWS_AS(
        involvement_probability(d, "T01", BlockIndex(1), RectQuery{{100, 200, 10, 20}}, Role::assist), DomainError);
    CHECK_THROWS_AS(involvement_probability(d, "XX", BlockIndex(1), PointQuery{{0, 10}}, Role::assist), LookupError);
  }
}

TEST_CASE("table output") {
  ReportTable t;
  t.title = "x";
  t.row_header = "team";
  t.rows = {"A", "B"};
  t.columns = {"t1"};
  t.values = {{0.5}, {-0.5}};
  std::ostringstream csv, jsonl;
  write_table_csv(csv, t);
  write_table_jsonl(jsonl, t);
  CHECK(csv.str() == "team,t1\nA,0.5\nB,-0.5\n");
  CHECK(jsonl.str() == "{\"team\":\"A\",\"t1\":0.5}\n{\"team\":\"B\",\"t1\":-0.5}\n");
  t.rows = {"A", "A"};
  CHECK_THROWS_AS(t.validate(), DomainError);
  t.rows = {"A"};
  CHECK_THROWS_AS(t.validate(), DomainError);
}
