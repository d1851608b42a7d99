#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"

#include "chance/geometry.h"
#include "chance/simulate.h"
#include "support.h"

using namespace chance;
using namespace chance::testing;

namespace {

struct Toy {
  ModelIndex index = synthetic_index(2, 3, 8);
  ModelState params = initial_state(index);
  Centroids assist = pitch_centroids(Space::assist);
  Centroids delta = pitch_centroids(Space::delta);
};

PosteriorDraws draws_with_lambdas(const std::vector<double>& log_lambdas) {
  PosteriorDraws d;
  d.index = synthetic_index(2, 1, 8);
  for (double l : log_lambdas) {
    Draw draw;
    draw.rate = RateParams::zeros(2);
    draw.rate.gamma[0] = l;
    d.draws.push_back(draw);
  }
  return d;
}

}  // namespace

TEST_CASE("sample_block counts") {
  Toy toy;
  SUBCASE("vanishing rate") {
    toy.params.rate.gamma[0] = -30.0;
    StreamRng rng(1);
    for (int i = 0; i < 1000; ++i) {
      CHECK(sample_block(toy.index, toy.params, {0, 1, BlockIndex(1), true}, toy.assist, toy.delta, rng).empty());
    }
  }
  SUBCASE("Poisson mean") {
    toy.params.rate.gamma[1] = std::log(1.7);
    StreamRng rng(2);
    const int n = 100000;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      total += static_cast<double>(
          sample_block(toy.index, toy.params, {0, 1, BlockIndex(2), true}, toy.assist, toy.delta, rng).size());
    }
    CHECK(std::abs(total / n - 1.7) < 0.017);
  }
  SUBCASE("degenerate phi") {
    toy.params.rate.alpha = 0.0;
    toy.params.rate.gamma[0] = std::log(5.0);
    auto phi = phi_slice(toy.index, toy.params.players.phi_assist, 0, BlockIndex(1));
    std::fill(phi.begin(), phi.end(), 0.0);
    phi[2] = 1.0;
    StreamRng rng(3);
    std::size_t seen = 0;
    for (int i = 0; i < 200; ++i) {
      for (const auto& c : sample_block(toy.index, toy.params, {0, 1, BlockIndex(1), true}, toy.assist, toy.delta, rng)) {
        CHECK(c.assist_player == toy.index.player(2));
        CHECK(c.team_id == toy.index.team(0));
        CHECK(c.assist_loc.on_pitch());
        CHECK(c.chance_loc().on_pitch());
        ++seen;
      }
    }
    CHECK(seen > 500);
  }
}

TEST_CASE("assist components follow kappa") {
  const ModelIndex index = synthetic_index(2, 1, 8);
  auto params = initial_state(index);
  params.rate.gamma[0] = std::log(50.0);
  for (auto& s : params.assist.sigma) s = Eigen::Matrix2d::Identity() * 0.01;
  const std::vector<double> kappa{0.05, 0.3, 0.0, 0.15, 0.1, 0.2, 0.1, 0.1};
  auto k = kappa_slice(index, params.assist, 0, BlockIndex(1));
  std::copy(kappa.begin(), kappa.end(), k.begin());
  const auto centroids = toy_centroids(Space::assist);
  StreamRng rng(4);
  std::vector<double> counts(8, 0.0);
  double n = 0.0;
  SampleOptions opt;
  opt.respect_pitch = false;
  for (int i = 0; i < 400; ++i) {
    for (const auto& c : sample_block(index, params, {0, 1, BlockIndex(1), true}, centroids,
                                      toy_centroids(Space::delta), rng, opt)) {
      counts[nearest_index(centroids.mu, as_vector(c.assist_loc))] += 1;
      n += 1;
    }
  }
  for (int m = 0; m < 8; ++m) {
    const double se = std::sqrt(kappa[m] * (1 - kappa[m]) / n);
    CHECK(std::abs(counts[m] / n - kappa[m]) <= 3 * se + 1e-12);
  }
}

TEST_CASE("a single fixture in fixed mode") {
  Toy toy;
  toy.params.rate.gamma.fill(0.5);
  SimConfig sim;
  sim.index = toy.index;
  sim.fixtures = round_robin_fixtures(toy.index.teams(), 1);
  sim.params = toy.params;
  sim.assist_centroids = toy.assist;
  sim.delta_centroids = toy.delta;
  sim.seed = 5;
  const auto season = simulate_season(sim);
  const auto panel = build_block_panel(season.events, season.fixtures);
  REQUIRE(panel.size() == 12);
  int total = 0;
  for (const auto& r : panel) {
    total += r.count;
    CHECK(r.game_state == 0);
    CHECK(r.red_state == 0);
  }
  CHECK(static_cast<std::size_t>(total) == season.events.size());
  CHECK(season.chances.size() == season.events.size());
  for (const auto& e : season.events) CHECK(e.type == EventType::Chance);

  const auto again = simulate_season(sim);
  CHECK(again.events == season.events);
}

TEST_CASE("goal-coupled game state matches the ingest derivation") {
  auto sim = synthetic_config({.teams = 4, .fixtures = 12, .roster = 3, .seed = 6,
                               .dynamics = StateDynamics::goal_coupled, .conversion = 1.0,
                               .red_card_rate = 0.1});
  const auto season = simulate_season(sim);
  const auto panel = build_block_panel(season.events, season.fixtures);
  // rows come in (home, away) pairs block by block; G at r+1 is the running count difference
  for (std::size_t f = 0; f < season.fixtures.size(); ++f) {
    int diff = 0;
    for (int b = 0; b < 6; ++b) {
      const auto& home = panel[f * 12 + b * 2];
      const auto& away = panel[f * 12 + b * 2 + 1];
      CHECK(home.is_home);
      CHECK(home.game_state == diff);
      CHECK(derive_game_state(season.events, season.fixtures[f], home.team_id, home.block) == diff);
      CHECK(away.game_state == -diff);
      diff += home.count - away.count;
    }
  }
  std::size_t reds = 0;
  for (const auto& e : season.events) reds += e.type == EventType::RedCard;
  CHECK(reds > 0);
}

TEST_CASE("synthetic seasons pass the ingest invariants") {
  const auto s = synthetic({.teams = 6, .fixtures = 30, .roster = 4, .seed = 7,
                            .dynamics = StateDynamics::goal_coupled, .conversion = 0.3, .red_card_rate = 0.05});
  std::ostringstream events, fixtures;
  write_events_csv(events, s.season.events);
  write_fixtures_csv(fixtures, s.season.fixtures);
  std::istringstream ein(events.str()), fin(fixtures.str());
  const auto parsed = parse_events(ein);
  CHECK(parsed.errors.empty());
  CHECK(parsed.records == s.season.events);
  const auto fx = parse_fixtures(fin);
  CHECK(fx.size() == 30);
  const auto panel = build_block_panel(parsed.records, fx);
  CHECK(panel.size() == 360);
  const auto extracted = extract_chances(parsed.records, fx);
  CHECK(extracted.missing_location == 0);
  CHECK(extracted.cross_team == 0);
  REQUIRE(extracted.chances.size() == s.season.chances.size());
  int total = 0;
  for (const auto& r : panel) total += r.count;
  CHECK(static_cast<std::size_t>(total) == extracted.chances.size());
  for (std::size_t i = 0; i < extracted.chances.size(); ++i) {
    const auto& a = extracted.chances[i];
    const auto& b = s.season.chances[i];
    CHECK(a.assist_loc == b.assist_loc);
    CHECK(a.delta == b.delta);
    CHECK(a.assist_player == b.assist_player);
    CHECK(a.block == b.block);
    CHECK(a.chance_loc().on_pitch());
  }
}

TEST_CASE("round robin schedule") {
  const ModelIndex index = synthetic_index(20, 2, 8);
  const auto fx = round_robin_fixtures(index.teams(), 380);
  REQUIRE(fx.size() == 380);
  std::set<std::pair<std::string, std::string>> pairs;
  std::map<std::string, int> home;
  for (const auto& f : fx) {
    CHECK(f.home_team != f.away_team);
    pairs.insert({f.home_team, f.away_team});
    ++home[f.home_team];
  }
  CHECK(pairs.size() == 380);
  for (const auto& [t, n] : home) CHECK(n == 19);
  CHECK(fx.front().date == "2020-08-01");
}

TEST_CASE("posterior predictive counts") {
  SUBCASE("single draw with lambda 1") {
    const auto s = posterior_predictive_counts(draws_with_lambdas({0.0}), {"T01", "T02", true}, BlockIndex(1));
    CHECK(s.mean == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.pmf[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(s.pmf[1] == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(s.mode <= 1);
  }
  SUBCASE("identical draws give that Poisson") {
    const double l = 2.5;
    const auto s = posterior_predictive_counts(draws_with_lambdas({std::log(l), std::log(l), std::log(l)}),
                                               {"T01", "T02", true}, BlockIndex(1));
    double fact = 1.0;
    for (std::size_t k = 0; k < 8; ++k) {
      if (k > 0) fact *= static_cast<double>(k);
      CHECK(s.pmf[k] == doctest::Approx(std::exp(-l) * std::pow(l, k) / fact).epsilon(1e-12));
    }
    CHECK(s.mode == 2);
  }
  SUBCASE("two draws") {
    const auto s = posterior_predictive_counts(draws_with_lambdas({std::log(0.5), std::log(1.5)}),
                                               {"T01", "T02", true}, BlockIndex(1));
    CHECK(s.mean == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.pmf[0] == doctest::Approx((std::exp(-0.5) + std::exp(-1.5)) / 2).epsilon(1e-14));
    CHECK(s.pmf[0] == doctest::Approx(0.4148).epsilon(1e-4));
    CHECK(std::accumulate(s.pmf.begin(), s.pmf.end(), 0.0) >= 0.999);
  }
  SUBCASE("away side ignores gamma") {
    const auto s = posterior_predictive_counts(draws_with_lambdas({3.0}), {"T01", "T02", false}, BlockIndex(1));
    CHECK(s.mean == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("unknown team") {
    CHECK_THROWS_AS(posterior_predictive_counts(draws_with_lambdas({0.0}), {"T01", "XXX", true}, BlockIndex(1)),
                    LookupError);
  }
}
