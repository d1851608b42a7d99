#include "chance/simulate.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <utility>

#include "json.hpp"

#include "chance/errors.h"

namespace chance {

namespace {

Eigen::Vector2d sample_gaussian(StreamRng& rng, const Eigen::Vector2d& mean,
                                const Eigen::Matrix2d& cov) {
  Eigen::LLT<Eigen::Matrix2d> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericError("mixture covariance is not positive-definite");
  const Eigen::Vector2d z(sample_normal(rng), sample_normal(rng));
  return mean + llt.matrixL() * z;
}

Eigen::Vector2d sample_mixture(StreamRng& rng, std::span<const double> kappa,
                               const Centroids& centroids, const std::vector<Eigen::Matrix2d>& sigma) {
  const auto m = sample_categorical(rng, kappa);
  return sample_gaussian(rng, centroids.mu[m], sigma[m]);
}

PitchLocation clamp_to_pitch(PitchLocation p) {
  p.x = std::clamp(p.x, -static_cast<double>(kPitchHalfWidth), static_cast<double>(kPitchHalfWidth));
  p.y = std::clamp(p.y, 0.0, static_cast<double>(kPitchLength));
  return p;
}

constexpr int kMaxResample = 100;

}  // namespace

std::vector<ChanceObservation> sample_block(const ModelIndex& index, const ModelState& params,
                                            const BlockContext& ctx, const Centroids& assist,
                                            const Centroids& delta, StreamRng& rng,
                                            const SampleOptions& options) {
  const RateRow row{ctx.team, ctx.opponent, ctx.block, ctx.is_home, 0, ctx.game_state, ctx.red_state};
  const double lambda = compute_lambda(params.rate, row) * options.rate_scale;
  if (!std::isfinite(lambda)) throw NumericError("chance rate overflowed");
  const int n = sample_poisson(rng, lambda);

  std::vector<ChanceObservation> out;
  if (n == 0) return out;
  if (index.roster_size(ctx.team) == 0) {
    throw DomainError("team " + index.team(ctx.team) + " has an empty roster");
  }
  const auto begin = index.roster_begin(ctx.team);
  const auto phi_a = phi_slice(index, params.players.phi_assist, ctx.team, ctx.block);
  const auto phi_c = phi_slice(index, params.players.phi_chance, ctx.team, ctx.block);
  const auto& team_id = index.team(ctx.team);
  out.reserve(static_cast<std::size_t>(n));

  for (int k = 0; k < n; ++k) {
    const std::size_t a = begin + sample_categorical(rng, phi_a);
    const std::size_t c = begin + sample_categorical(rng, phi_c);
    const auto kappa_a = kappa_slice(index, params.assist, a, ctx.block);
    const auto kappa_d = kappa_slice(index, params.delta, c, ctx.block);

    PitchLocation loc;
    for (int attempt = 0;; ++attempt) {
      const auto x = sample_mixture(rng, kappa_a, assist, params.assist.sigma);
      loc = {x.x(), x.y()};
      if (options.integer_grid) loc = {std::round(loc.x), std::round(loc.y)};
      if (!options.respect_pitch || loc.on_pitch()) break;
      if (attempt + 1 == kMaxResample) {
        loc = clamp_to_pitch(loc);
        break;
      }
    }

    DeltaLocation d;
    for (int attempt = 0;; ++attempt) {
      const auto x = sample_mixture(rng, kappa_d, delta, params.delta.sigma);
      d = {x.x(), x.y()};
      if (options.integer_grid) d = {std::round(d.dx), std::round(d.dy)};
      const PitchLocation chance{loc.x + d.dx, loc.y + d.dy};
      if (!options.respect_pitch || chance.on_pitch()) break;
      if (attempt + 1 == kMaxResample) {
        const auto clamped = clamp_to_pitch(chance);
        d = {clamped.x - loc.x, clamped.y - loc.y};
        break;
      }
    }

    ChanceObservation obs;
    obs.team_id = team_id;
    obs.block = ctx.block;
    obs.assist_player = index.player(a);
    obs.chance_player = index.player(c);
    obs.assist_loc = loc;
    obs.delta = d;
    out.push_back(std::move(obs));
  }
  return out;
}

namespace {

void validate(const SimConfig& config) {
  const auto& index = config.index;
  const auto m = index.components();
  const auto cells = index.player_count() * kBlockCount;
  const auto& s = config.params;
  if (s.rate.team_count != index.team_count() || s.rate.theta.size() != index.team_count() * kBlockCount) {
    throw DomainError("simulation rate parameters do not match the team list");
  }
  if (s.players.phi_assist.size() != cells || s.players.phi_chance.size() != cells ||
      s.assist.kappa.size() != cells * m || s.delta.kappa.size() != cells * m ||
      s.assist.sigma.size() != m || s.delta.sigma.size() != m) {
    throw DomainError("simulation composition parameters do not match the rosters");
  }
  if (config.assist_centroids.size() != m || config.delta_centroids.size() != m) {
    throw DomainError("simulation centroids do not match the number of components");
  }
  for (std::size_t t = 0; t < index.team_count(); ++t) {
    if (index.roster_size(t) == 0) throw DomainError("team " + index.team(t) + " has an empty roster");
  }
  for (const auto& f : config.fixtures) {
    index.team_index(f.home_team);
    index.team_index(f.away_team);
    if (f.home_team == f.away_team) throw DomainError("fixture " + f.fixture_id + " pairs a team with itself");
  }
  if (!(config.conversion >= 0.0 && config.conversion <= 1.0)) {
    throw DomainError("conversion probability must be in [0, 1]");
  }
  if (!(config.red_card_rate >= 0.0 && config.red_card_rate <= 1.0)) {
    throw DomainError("red card rate must be in [0, 1]");
  }
}

double minute_in_block(StreamRng& rng, BlockIndex block) {
  // (15(r-1), 15r]
  return kBlockMinutes * block.number() - kBlockMinutes * rng.uniform();
}

}  // namespace

SyntheticSeason simulate_season(const SimConfig& config) {
  validate(config);
  const auto& index = config.index;
  SyntheticSeason season;
  season.fixtures = config.fixtures;
  season.truth = config.params;
  const bool coupled = config.dynamics == StateDynamics::goal_coupled;
  const SampleOptions options{config.respect_pitch, config.integer_grid, 1.0};

  for (std::size_t f = 0; f < config.fixtures.size(); ++f) {
    const auto& fixture = config.fixtures[f];
    const std::size_t teams[2] = {index.team_index(fixture.home_team),
                                  index.team_index(fixture.away_team)};
    int goals[2] = {0, 0};
    int reds[2] = {0, 0};
    std::vector<EventRecord> events;
    std::vector<std::pair<double, ChanceObservation>> sampled;

    for (int b = 0; b < kBlockCount; ++b) {
      const BlockIndex block = BlockIndex::from_offset(b);
      int new_goals[2] = {0, 0};
      int new_reds[2] = {0, 0};
      for (int side = 0; side < 2; ++side) {
        const int other = 1 - side;
        BlockContext ctx{teams[side], teams[other], block, side == 0,
                         goals[side] - goals[other], reds[other] - reds[side]};
        StreamRng rng = StreamRng::keyed(config.seed, f, static_cast<std::uint64_t>(side), b);
        auto chances = sample_block(index, config.params, ctx, config.assist_centroids,
                                    config.delta_centroids, rng, options);
        for (auto& c : chances) {
          c.fixture_id = fixture.fixture_id;
          EventRecord e;
          e.fixture_id = fixture.fixture_id;
          e.date = fixture.date;
          e.team_id = c.team_id;
          e.minute = minute_in_block(rng, block);
          e.half = block.number() <= 3 ? Half::first : Half::second;
          const int lead = goals[side] + new_goals[side] - goals[other] - new_goals[other];
          const bool goal = coupled && rng.uniform() < config.conversion &&
                            (config.max_lead <= 0 || lead < config.max_lead);
          e.type = goal ? EventType::Goal : EventType::Chance;
          if (goal) ++new_goals[side];
          e.event_player = c.chance_player.player_id;
          e.assist_player = c.assist_player.player_id;
          e.assist_loc = c.assist_loc;
          e.chance_loc = c.chance_loc();
          sampled.emplace_back(e.minute, std::move(c));
          events.push_back(std::move(e));
        }
        if (coupled && config.red_card_rate > 0.0 && rng.uniform() < config.red_card_rate) {
          EventRecord e;
          e.fixture_id = fixture.fixture_id;
          e.date = fixture.date;
          e.team_id = index.team(teams[side]);
          e.minute = minute_in_block(rng, block);
          e.half = block.number() <= 3 ? Half::first : Half::second;
          e.type = EventType::RedCard;
          const auto roster = index.roster_size(teams[side]);
          const auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(roster));
          e.event_player = index.player(index.roster_begin(teams[side]) + std::min(pick, roster - 1)).player_id;
          events.push_back(std::move(e));
          ++new_reds[side];
        }
      }
      for (int side = 0; side < 2; ++side) {
        goals[side] += new_goals[side];
        reds[side] += new_reds[side];
      }
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const EventRecord& x, const EventRecord& y) { return x.minute < y.minute; });
    season.events.insert(season.events.end(), std::make_move_iterator(events.begin()),
                         std::make_move_iterator(events.end()));
    // chances follow the event order so ingest recovers them one to one
    std::stable_sort(sampled.begin(), sampled.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    for (auto& [minute, c] : sampled) season.chances.push_back(std::move(c));
  }
  return season;
}

std::vector<FixtureInfo> round_robin_fixtures(const std::vector<std::string>& teams,
                                              std::size_t fixture_count) {
  if (teams.size() < 2) throw DomainError("a schedule needs at least two teams");
  std::vector<std::string> slots = teams;
  if (slots.size() % 2 == 1) slots.push_back("");  // bye
  const std::size_t n = slots.size();

  // Circle method: first half of the rounds, then the same rounds with venues swapped.
  std::vector<std::vector<std::pair<std::string, std::string>>> rounds;
  std::vector<std::string> order = slots;
  for (std::size_t r = 0; r + 1 < n; ++r) {
    std::vector<std::pair<std::string, std::string>> games;
    for (std::size_t i = 0; i < n / 2; ++i) {
      auto home = order[i];
      auto away = order[n - 1 - i];
      if ((r + i) % 2 == 1) std::swap(home, away);
      if (!home.empty() && !away.empty()) games.emplace_back(home, away);
    }
    rounds.push_back(std::move(games));
    std::rotate(order.begin() + 1, order.end() - 1, order.end());
  }
  const std::size_t half = rounds.size();
  for (std::size_t r = 0; r < half; ++r) {
    auto games = rounds[r];
    for (auto& g : games) std::swap(g.first, g.second);
    rounds.push_back(std::move(games));
  }

  using namespace std::chrono;
  const sys_days start = year{2020} / August / 1;
  std::vector<FixtureInfo> out;
  for (std::size_t r = 0; out.size() < fixture_count; ++r) {
    const year_month_day ymd{start + days{static_cast<int>(r)}};
    char date[32];
    std::snprintf(date, sizeof date, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    for (const auto& [home, away] : rounds[r % rounds.size()]) {
      if (out.size() == fixture_count) break;
      char id[16];
      std::snprintf(id, sizeof id, "F%04zu", out.size() + 1);
      out.push_back({id, date, home, away});
    }
  }
  return out;
}

ModelIndex synthetic_index(std::size_t teams, std::size_t roster_size, std::size_t components) {
  std::map<std::string, std::vector<std::string>> rosters;
  for (std::size_t t = 1; t <= teams; ++t) {
    char team[8];
    std::snprintf(team, sizeof team, "T%02zu", t);
    auto& roster = rosters[team];
    for (std::size_t p = 1; p <= roster_size; ++p) {
      char player[16];
      std::snprintf(player, sizeof player, "%sP%02zu", team, p);
      roster.push_back(player);
    }
  }
  return ModelIndex(std::move(rosters), components);
}

Centroids pitch_centroids(Space space) {
  Centroids c;
  c.space = space;
  if (space == Space::assist) {
    c.mu = {{0, 280}, {-60, 300}, {60, 300}, {-110, 330}, {110, 330}, {0, 360}, {-100, 390}, {100, 390}};
  } else {
    c.mu = {{0, -20}, {-80, -10}, {80, -10}, {0, 10}, {-40, 20}, {40, 20}, {0, 40}, {20, 60}};
  }
  std::sort(c.mu.begin(), c.mu.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.y() != b.y() ? a.y() < b.y() : a.x() < b.x();
  });
  return c;
}

ModelState planted_state(const ModelIndex& index, const PlantedSpec& spec, StreamRng& rng) {
  ModelState s = initial_state(index);
  auto& r = s.rate;
  const std::size_t teams = index.team_count();
  if (teams >= 2) {
    for (int b = 0; b < kBlockCount; ++b) {
      std::vector<double> raw(teams);
      for (auto& v : raw) v = -spec.theta_limit + 2.0 * spec.theta_limit * rng.uniform();
      auto centred = project_sum_to_zero(raw, teams);
      double largest = 0.0;
      for (double v : centred) largest = std::max(largest, std::abs(v));
      const double shrink = largest > spec.theta_limit ? spec.theta_limit / largest : 1.0;
      for (auto& v : centred) v *= shrink;
      r.set_free_theta(BlockIndex::from_offset(b), std::span<const double>(centred).first(teams - 1));
    }
  }
  r.gamma = spec.gamma;
  r.alpha = spec.alpha;
  r.beta = spec.beta;
  r.tau = 0.1;

  std::vector<double> conc;
  for (auto* phi : {&s.players.phi_assist, &s.players.phi_chance}) {
    for (std::size_t t = 0; t < teams; ++t) {
      if (index.roster_size(t) == 0) continue;
      conc.assign(index.roster_size(t), spec.phi_concentration);
      for (int b = 0; b < kBlockCount; ++b) {
        const auto draw = sample_dirichlet(rng, conc);
        auto slice = phi_slice(index, *phi, t, BlockIndex::from_offset(b));
        std::copy(draw.begin(), draw.end(), slice.begin());
      }
    }
  }
  const auto m = index.components();
  conc.assign(m, spec.kappa_concentration);
  for (auto* mp : {&s.assist, &s.delta}) {
    for (std::size_t cell = 0; cell < index.player_count() * kBlockCount; ++cell) {
      const auto draw = sample_dirichlet(rng, conc);
      std::copy(draw.begin(), draw.end(), mp->kappa.begin() + static_cast<std::ptrdiff_t>(cell * m));
    }
  }
  const double sa = spec.assist_sd * spec.assist_sd;
  const double sd = spec.delta_sd * spec.delta_sd;
  s.assist.sigma.assign(m, sa * Eigen::Matrix2d::Identity());
  s.delta.sigma.assign(m, sd * Eigen::Matrix2d::Identity());
  return s;
}

void write_truth_json(std::ostream& out, const ModelIndex& index, const ModelState& truth) {
  nlohmann::ordered_json j;
  j["teams"] = index.teams();
  nlohmann::ordered_json theta;
  for (std::size_t t = 0; t < index.team_count(); ++t) {
    std::vector<double> row;
    for (int b = 0; b < kBlockCount; ++b) row.push_back(truth.rate.theta_at(BlockIndex::from_offset(b), t));
    theta[index.team(t)] = row;
  }
  j["theta"] = theta;
  j["gamma"] = truth.rate.gamma;
  j["alpha"] = truth.rate.alpha;
  j["beta"] = truth.rate.beta;
  j["tau"] = truth.rate.tau;
  std::vector<std::string> players;
  for (std::size_t p = 0; p < index.player_count(); ++p) players.push_back(index.player(p).player_id);
  j["players"] = players;
  j["phi_assist"] = truth.players.phi_assist;
  j["phi_chance"] = truth.players.phi_chance;
  j["kappa_assist"] = truth.assist.kappa;
  j["kappa_delta"] = truth.delta.kappa;
  out << j.dump(1) << '\n';
}

PredictiveSummary posterior_predictive_counts(const PosteriorDraws& draws,
                                              const FixtureScenario& scenario, BlockIndex block,
                                              std::size_t max) {
  if (draws.empty()) throw DomainError("no posterior draws");
  const RateRow row{draws.index.team_index(scenario.team), draws.index.team_index(scenario.opponent),
                    block, scenario.is_home, 0, scenario.game_state, scenario.red_state};
  std::vector<double> lambdas;
  lambdas.reserve(draws.size());
  for (const auto& d : draws.draws) lambdas.push_back(compute_lambda(d.rate, row));

  PredictiveSummary s;
  double second = 0.0;
  for (double l : lambdas) {
    s.mean += l;
    second += l + l * l;  // E[N^2 | lambda]
  }
  s.mean /= static_cast<double>(lambdas.size());
  second /= static_cast<double>(lambdas.size());
  s.sd = std::sqrt(std::max(0.0, second - s.mean * s.mean));
  const auto upper = static_cast<std::size_t>(std::ceil(s.mean + 10.0 * s.sd));
  max = std::max(max, upper);

  s.pmf.assign(max + 1, 0.0);
  for (double l : lambdas) {
    const double log_l = std::log(l);
    for (std::size_t k = 0; k <= max; ++k) {
      const double kk = static_cast<double>(k);
      s.pmf[k] += std::exp(kk * log_l - l - std::lgamma(kk + 1.0));
    }
  }
  for (auto& p : s.pmf) p /= static_cast<double>(lambdas.size());
  s.mode = static_cast<std::size_t>(std::max_element(s.pmf.begin(), s.pmf.end()) - s.pmf.begin());

  auto quantile_at = [&](double p) {
    double cdf = 0.0;
    for (std::size_t k = 0; k < s.pmf.size(); ++k) {
      cdf += s.pmf[k];
      if (cdf >= p) return static_cast<double>(k);
    }
    return static_cast<double>(s.pmf.size() - 1);
  };
  s.q025 = quantile_at(0.025);
  s.median = quantile_at(0.5);
  s.q975 = quantile_at(0.975);
  return s;
}

}  // namespace chance
