#include "chance/sbc.h"

#include <cmath>
#include <mutex>
#include <numbers>
#include <ostream>

#include <boost/math/distributions/chi_squared.hpp>

#include "chance/csv.h"
#include "chance/errors.h"

namespace chance {

ModelPriors toy_priors() {
  ModelPriors p;
  p.rate.effect_sd = 0.3;
  p.rate.tau_shape = 2.0;
  p.rate.tau_rate = 20.0;
  p.composition.phi_concentration = 1.0;
  p.composition.kappa_concentration = 1.0;
  p.composition.sigma_scale = 4.0 * Eigen::Matrix2d::Identity();
  p.composition.sigma_df = 6.0;
  return p;
}

Centroids toy_centroids(Space space, std::size_t components) {
  const Eigen::Vector2d centre = space == Space::assist ? Eigen::Vector2d(0.0, 200.0)
                                                        : Eigen::Vector2d(0.0, 0.0);
  Centroids c;
  c.space = space;
  for (std::size_t m = 0; m < components; ++m) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(components);
    c.mu.push_back(centre + 4.0 * Eigen::Vector2d(std::cos(a), std::sin(a)));
  }
  return c;
}

ModelState sample_prior(const ModelIndex& index, const FitConfig& config, StreamRng& rng) {
  const auto& priors = config.priors;
  ModelState s = initial_state(index);
  auto& r = s.rate;
  r.tau = sample_gamma(rng, priors.rate.tau_shape, priors.rate.tau_rate);
  const double theta_sd = std::sqrt(r.tau);
  if (index.team_count() >= 2) {
    for (int b = 0; b < kBlockCount; ++b) {
      std::vector<double> free(index.team_count() - 1);
      for (auto& v : free) v = sample_normal(rng, 0.0, theta_sd);
      r.set_free_theta(BlockIndex::from_offset(b), free);
    }
  }
  for (auto& g : r.gamma) g = sample_normal(rng, 0.0, priors.rate.effect_sd);
  r.alpha = sample_normal(rng, 0.0, priors.rate.effect_sd);
  r.beta = sample_normal(rng, 0.0, priors.rate.effect_sd);

  std::vector<double> conc;
  for (auto* phi : {&s.players.phi_assist, &s.players.phi_chance}) {
    for (std::size_t t = 0; t < index.team_count(); ++t) {
      if (index.roster_size(t) == 0) continue;
      conc.assign(index.roster_size(t), priors.composition.phi_concentration);
      for (int b = 0; b < kBlockCount; ++b) {
        const auto draw = sample_dirichlet(rng, conc);
        auto slice = phi_slice(index, *phi, t, BlockIndex::from_offset(b));
        std::copy(draw.begin(), draw.end(), slice.begin());
      }
    }
  }
  const auto m = index.components();
  conc.assign(m, priors.composition.kappa_concentration);
  for (auto [mp, space] : {std::pair{&s.assist, Space::assist}, std::pair{&s.delta, Space::delta}}) {
    for (std::size_t cell = 0; cell < index.player_count() * kBlockCount; ++cell) {
      const auto draw = sample_dirichlet(rng, conc);
      std::copy(draw.begin(), draw.end(), mp->kappa.begin() + static_cast<std::ptrdiff_t>(cell * m));
    }
    const Eigen::Matrix2d scale = sigma_prior_scale(config, space);
    for (auto& sigma : mp->sigma) sigma = sample_inverse_wishart(rng, scale, priors.composition.sigma_df);
  }
  return s;
}

SbcSpec::SbcSpec() {
  fit.priors = toy_priors();
  auto& s = fit.sampler;
  s.burn_in = 300;
  s.thin = 5;
  s.iterations = s.burn_in + 199 * s.thin;
  s.adapt_window = s.burn_in;
  s.rate_substeps = 4;
  s.workers = 1;
}

std::size_t SbcSpec::draws_per_replicate() const {
  return null_harness ? fit.sampler.stored_per_chain() : fit.sampler.stored_per_chain() * fit.sampler.chains;
}

const SbcParameterResult& SbcResult::test(const std::string& name) const {
  for (const auto& t : tests) {
    if (t.name == name) return t;
  }
  throw LookupError("no calibration result for " + name);
}

SbcParameterResult rank_uniformity(std::string name, const std::vector<std::size_t>& ranks,
                                   std::size_t max_rank, std::size_t bins) {
  if (bins < 2) throw DomainError("uniformity test needs at least two bins");
  SbcParameterResult r;
  r.name = std::move(name);
  r.histogram.assign(bins, 0);
  const std::size_t values = max_rank + 1;
  for (auto rank : ranks) {
    if (rank > max_rank) throw DomainError("rank exceeds the number of draws");
    ++r.histogram[rank * bins / values];
  }
  if (ranks.empty()) return r;
  const double n = static_cast<double>(ranks.size());
  for (std::size_t b = 0; b < bins; ++b) {
    // expected share of rank values falling in bin b
    const std::size_t lo = (b * values + bins - 1) / bins;
    const std::size_t hi = ((b + 1) * values + bins - 1) / bins;
    const double expected = n * static_cast<double>(hi - lo) / static_cast<double>(values);
    if (expected <= 0.0) continue;
    const double diff = static_cast<double>(r.histogram[b]) - expected;
    r.chi_squared += diff * diff / expected;
  }
  boost::math::chi_squared_distribution<double> dist(static_cast<double>(bins - 1));
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.chi_squared));
  return r;
}

namespace {

std::vector<double> monitored(const ModelIndex& index, const ModelState& s) {
  const BlockIndex t1{1};
  return {s.rate.alpha, s.rate.beta, s.rate.gamma[0], s.rate.theta_at(t1, 0),
          kappa_slice(index, s.assist, 0, t1)[0]};
}

std::size_t rank_of(double truth, const std::vector<double>& draws) {
  std::size_t rank = 0;
  for (double d : draws) rank += d < truth ? 1 : 0;
  return rank;
}

}  // namespace

SbcResult sbc_run(const SbcSpec& spec) {
  if (spec.replicates == 0) throw DomainError("calibration needs at least one replicate");
  const ModelIndex index = synthetic_index(spec.teams, spec.roster, spec.components);
  const auto fixtures = round_robin_fixtures(index.teams(), spec.fixtures);
  const Centroids assist = toy_centroids(Space::assist, spec.components);
  const Centroids delta = toy_centroids(Space::delta, spec.components);
  std::map<std::string, std::vector<std::string>> rosters;
  for (std::size_t p = 0; p < index.player_count(); ++p) {
    rosters[index.player(p).team_id].push_back(index.player(p).player_id);
  }
  FitConfig fit_config = spec.fit;
  fit_config.mixture.components = spec.components;
  fit_config.sampler.workers = 1;
  const std::size_t draws = spec.draws_per_replicate();

  SbcResult result;
  const auto p0 = index.player(0);
  result.parameters = {"alpha", "beta", "gamma[t1]", "theta[" + index.team(0) + ",t1]",
                       "kappa_assist[" + p0.player_id + ",t1,1]"};
  std::vector<std::optional<std::vector<std::size_t>>> ranks(spec.replicates);
  std::vector<std::string> errors(spec.replicates);

  parallel_for(spec.workers, spec.replicates, [&](std::size_t rep) {
    const std::uint64_t rep_seed = derive_seed(spec.seed, rep);
    StreamRng rng(rep_seed);
    try {
      const ModelState truth = sample_prior(index, fit_config, rng);
      const auto true_values = monitored(index, truth);
      std::vector<std::vector<double>> samples(true_values.size());
      if (spec.null_harness) {
        for (std::size_t d = 0; d < draws; ++d) {
          const auto v = monitored(index, sample_prior(index, fit_config, rng));
          for (std::size_t k = 0; k < v.size(); ++k) samples[k].push_back(v[k]);
        }
      } else {
        SimConfig sim;
        sim.index = index;
        sim.fixtures = fixtures;
        sim.seed = derive_seed(rep_seed, 1);
        sim.params = truth;
        sim.assist_centroids = assist;
        sim.delta_centroids = delta;
        sim.dynamics = StateDynamics::goal_coupled;
        sim.conversion = spec.conversion;
        sim.red_card_rate = spec.red_card_rate;
        sim.max_lead = spec.max_lead;
        sim.respect_pitch = false;
        sim.integer_grid = false;
        const auto season = simulate_season(sim);
        const auto panel = build_block_panel(season.events, season.fixtures);
        const auto data = prepare_data(panel, season.chances, rosters, fit_config.mixture, assist, delta);
        FitConfig config = fit_config;
        config.sampler.seed = derive_seed(rep_seed, 2);
        const auto posterior = fit(data, config);
        for (const auto& d : posterior.draws) {
          const ModelState s{d.rate, d.players, d.assist, d.delta};
          const auto v = monitored(data.index, s);
          for (std::size_t k = 0; k < v.size(); ++k) samples[k].push_back(v[k]);
        }
      }
      std::vector<std::size_t> r;
      for (std::size_t k = 0; k < true_values.size(); ++k) r.push_back(rank_of(true_values[k], samples[k]));
      ranks[rep] = std::move(r);
    } catch (const std::exception& e) {
      errors[rep] = e.what();
    }
  });

  for (std::size_t rep = 0; rep < spec.replicates; ++rep) {
    if (ranks[rep]) {
      result.ranks.push_back(*ranks[rep]);
    } else {
      ++result.failures;
      result.failure_messages.push_back("replicate " + std::to_string(rep) + ": " + errors[rep]);
    }
  }
  for (std::size_t k = 0; k < result.parameters.size(); ++k) {
    std::vector<std::size_t> column;
    for (const auto& r : result.ranks) column.push_back(r[k]);
    result.tests.push_back(rank_uniformity(result.parameters[k], column, draws, spec.bins));
  }
  return result;
}

void write_sbc_ranks_csv(std::ostream& out, const SbcResult& result) {
  std::vector<std::string> header{"replicate"};
  header.insert(header.end(), result.parameters.begin(), result.parameters.end());
  csv::write_row(out, header);
  for (std::size_t r = 0; r < result.ranks.size(); ++r) {
    std::vector<std::string> row{std::to_string(r)};
    for (auto v : result.ranks[r]) row.push_back(std::to_string(v));
    csv::write_row(out, row);
  }
}

void write_sbc_summary_csv(std::ostream& out, const SbcResult& result) {
  csv::write_row(out, {"parameter", "chi_squared", "p_value", "histogram"});
  for (const auto& t : result.tests) {
    std::string hist;
    for (std::size_t b = 0; b < t.histogram.size(); ++b) {
      if (b) hist += ' ';
      hist += std::to_string(t.histogram[b]);
    }
    csv::write_row(out, {t.name, csv::format_double(t.chi_squared), csv::format_double(t.p_value), hist});
  }
}

}  // namespace chance
