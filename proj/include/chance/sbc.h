#pragma once

// Simulation-based calibration: draw a truth from the prior, simulate a toy
// season from it, fit, and record the rank of the truth among the posterior
// draws. Under a correct sampler the ranks are uniform.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "chance/inference.h"
#include "chance/simulate.h"

namespace chance {

// Priors narrow enough that prior draws give plausible chance rates.
ModelPriors toy_priors();

// Eight well-separated centroids on a ring around (cx, cy).
Centroids toy_centroids(Space space, std::size_t components = kDefaultComponents);

// One joint draw of every parameter from the prior. The Sigma scale of each
// space comes from `config` (see sigma_prior_scale).
ModelState sample_prior(const ModelIndex& index, const FitConfig& config, StreamRng& rng);

struct SbcSpec {
  std::size_t teams = 6;
  std::size_t fixtures = 60;
  std::size_t roster = 3;
  std::size_t components = kDefaultComponents;
  double conversion = 0.25;
  double red_card_rate = 0.05;
  int max_lead = 3;  // see SimConfig::max_lead
  std::size_t replicates = 200;
  std::size_t bins = 20;
  std::uint64_t seed = 1;
  std::size_t workers = 1;  // replicates in flight
  FitConfig fit;            // sampler settings and priors used for both truth and fit
  // Exact prior sampler in place of the fit, with no data.
  bool null_harness = false;

  SbcSpec();
  // Posterior draws per replicate; ranks take values 0..draws.
  std::size_t draws_per_replicate() const;
};

struct SbcParameterResult {
  std::string name;
  std::vector<std::size_t> histogram;
  double chi_squared = 0.0;
  double p_value = 1.0;
};

struct SbcResult {
  std::vector<std::string> parameters;
  std::vector<std::vector<std::size_t>> ranks;  // [replicate][parameter]; failed replicates omitted
  std::vector<SbcParameterResult> tests;
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;

  // True if more than 5% of replicates failed.
  bool failed(std::size_t replicates) const { return failures * 20 > replicates; }
  const SbcParameterResult& test(const std::string& name) const;
};

// Monitored: alpha, beta, gamma[t1], theta[T01,t1], kappa_assist[T01P01,t1,1].
SbcResult sbc_run(const SbcSpec& spec);

// Pearson chi-squared uniformity test of ranks in 0..max_rank over `bins` bins.
SbcParameterResult rank_uniformity(std::string name, const std::vector<std::size_t>& ranks,
                                   std::size_t max_rank, std::size_t bins);

void write_sbc_ranks_csv(std::ostream& out, const SbcResult& result);
void write_sbc_summary_csv(std::ostream& out, const SbcResult& result);

}  // namespace chance
