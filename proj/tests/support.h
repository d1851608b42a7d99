#pragma once

// Shared fixtures for the unit and acceptance tests: synthetic seasons with a
// known truth, turned into fit inputs the same way the CLI does.

#include <map>
#include <string>
#include <vector>

#include "chance/inference.h"
#include "chance/sbc.h"
#include "chance/simulate.h"

namespace chance::testing {

struct Synthetic {
  SyntheticSeason season;
  FitData data;
};

inline std::map<std::string, std::vector<std::string>> rosters_of(const ModelIndex& index) {
  std::map<std::string, std::vector<std::string>> rosters;
  for (std::size_t p = 0; p < index.player_count(); ++p) {
    rosters[index.player(p).team_id].push_back(index.player(p).player_id);
  }
  return rosters;
}

struct SyntheticSpec {
  std::size_t teams = 6;
  std::size_t fixtures = 60;
  std::size_t roster = 4;
  std::uint64_t seed = 1;
  StateDynamics dynamics = StateDynamics::fixed;
  double conversion = 0.1;
  double red_card_rate = 0.0;
  PlantedSpec planted{};
};

inline SimConfig synthetic_config(const SyntheticSpec& spec) {
  SimConfig sim;
  sim.index = synthetic_index(spec.teams, spec.roster, kDefaultComponents);
  sim.fixtures = round_robin_fixtures(sim.index.teams(), spec.fixtures);
  sim.seed = spec.seed;
  StreamRng rng(derive_seed(spec.seed, 99));
  sim.params = planted_state(sim.index, spec.planted, rng);
  sim.assist_centroids = pitch_centroids(Space::assist);
  sim.delta_centroids = pitch_centroids(Space::delta);
  sim.dynamics = spec.dynamics;
  sim.conversion = spec.conversion;
  sim.red_card_rate = spec.red_card_rate;
  return sim;
}

inline FitData fit_data_for(const SimConfig& sim, const SyntheticSeason& season) {
  const auto panel = build_block_panel(season.events, season.fixtures);
  return prepare_data(panel, season.chances, rosters_of(sim.index), MixtureOptions{}, sim.assist_centroids,
                      sim.delta_centroids);
}

inline Synthetic synthetic(const SyntheticSpec& spec) {
  const auto sim = synthetic_config(spec);
  Synthetic s;
  s.season = simulate_season(sim);
  s.data = fit_data_for(sim, s.season);
  return s;
}

inline FitConfig short_run(std::size_t iterations, std::size_t burn_in, std::uint64_t seed = 1) {
  FitConfig c;
  c.sampler.iterations = iterations;
  c.sampler.burn_in = burn_in;
  c.sampler.seed = seed;
  return c;
}

}  // namespace chance::testing
