#pragma once

// Forward simulation of the generative model: chance counts per block, then
// for each chance the assist and chance players, the assist location and the
// assist-to-chance offset.

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "chance/inference.h"

namespace chance {

enum class StateDynamics {
  fixed,         // G = R = 0 throughout; every chance is a plain Chance event
  goal_coupled,  // chances convert to goals and red cards occur; G, R evolve
};

struct SimConfig {
  ModelIndex index;  // teams and rosters
  std::vector<FixtureInfo> fixtures;
  std::uint64_t seed = 1;
  ModelState params;  // ground truth (or a single posterior draw)
  Centroids assist_centroids;
  Centroids delta_centroids;
  StateDynamics dynamics = StateDynamics::fixed;
  // Harness machinery, not part of the model: the chance of a chance being
  // scored, and of a team receiving a red card in a block (goal-coupled only).
  double conversion = 0.1;
  double red_card_rate = 0.0;
  // Chances stop converting for a side already this many goals ahead, which
  // keeps a positive alpha from feeding on itself. 0 leaves leads unbounded.
  int max_lead = 0;
  // Resample off-pitch locations (up to 100 attempts, then clamp).
  bool respect_pitch = true;
  // Round locations to whole grid units, as in vendor data.
  bool integer_grid = true;
};

struct SyntheticSeason {
  std::vector<EventRecord> events;
  std::vector<FixtureInfo> fixtures;
  std::vector<ChanceObservation> chances;  // exactly the sampled observations
  ModelState truth;
};

struct BlockContext {
  std::size_t team = 0;
  std::size_t opponent = 0;
  BlockIndex block{1};
  bool is_home = false;
  int game_state = 0;
  int red_state = 0;
};

struct SampleOptions {
  bool respect_pitch = true;
  bool integer_grid = false;
  double rate_scale = 1.0;
};

// One team-block: N ~ Pois(lambda), then N compositions. fixture_id is left empty.
std::vector<ChanceObservation> sample_block(const ModelIndex& index, const ModelState& params,
                                            const BlockContext& ctx, const Centroids& assist,
                                            const Centroids& delta, StreamRng& rng,
                                            const SampleOptions& options = {});

// Validates the config (DomainError) and simulates every fixture.
SyntheticSeason simulate_season(const SimConfig& config);

// Round-robin schedule: every ordered pair of teams meets once at home, one
// match per team per round, consecutive dates from 2020-08-01.
std::vector<FixtureInfo> round_robin_fixtures(const std::vector<std::string>& teams,
                                              std::size_t fixture_count);

// Teams "T01".. with players "T01P01"...
ModelIndex synthetic_index(std::size_t teams, std::size_t roster_size, std::size_t components);

// Eight fixed centroids in plausible attacking positions (assist space) or
// offsets (delta space), sorted by (y, x).
Centroids pitch_centroids(Space space);

struct PlantedSpec {
  double theta_limit = 0.5;  // largest |theta| after centring
  std::array<double, kBlockCount> gamma{0.20, 0.22, 0.30, 0.25, 0.25, 0.32};
  double alpha = -0.1;
  double beta = 0.15;
  double assist_sd = 25.0;
  double delta_sd = 15.0;
  double phi_concentration = 2.0;
  double kappa_concentration = 1.0;
};

// Ground truth for recovery runs: theta uniform per block, centred and scaled
// into [-theta_limit, theta_limit]; phi and kappa Dirichlet draws; isotropic Sigma.
ModelState planted_state(const ModelIndex& index, const PlantedSpec& spec, StreamRng& rng);

void write_truth_json(std::ostream& out, const ModelIndex& index, const ModelState& truth);

struct PredictiveSummary {
  double mean = 0.0;
  double sd = 0.0;
  std::vector<double> pmf;  // over 0..max
  std::size_t mode = 0;
  double q025 = 0.0;
  double median = 0.0;
  double q975 = 0.0;
};

struct FixtureScenario {
  std::string team;
  std::string opponent;
  bool is_home = false;
  int game_state = 0;
  int red_state = 0;
};

// Mixture of Poisson(lambda_d) over stored draws; max = ceil(mean + 10 sd)
// unless a larger max is supplied. Throws LookupError for unknown teams.
PredictiveSummary posterior_predictive_counts(const PosteriorDraws& draws,
                                              const FixtureScenario& scenario, BlockIndex block,
                                              std::size_t max = 0);

}  // namespace chance
