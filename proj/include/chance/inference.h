#pragma once

// MCMC for the joint posterior. One iteration is a sequential sweep over five
// groups that factor given the data:
//
//   1. rate parameters: adaptive random-walk Metropolis on the free theta
//      coordinates (one proposal per block), gamma per block, alpha, beta, and
//      a log-scale Metropolis step for tau
//   2. phi^a (conjugate Dirichlet)
//   3. phi^c (conjugate Dirichlet)
//   4. assist space: kappa^a and Sigma^a given the latent assignments, then
//      new assignments given kappa^a and Sigma^a
//   5. delta space: as 4
//
// Inside a group, units (blocks, cells, observations, components) are
// independent and may run on several workers. Each unit draws from its own
// stream keyed by (seed, iteration, group, unit); the Sigma update waits for
// all assignment counts (a barrier between the two phases). Results are
// therefore identical for any worker count.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chance/ingest.h"
#include "chance/model.h"
#include "chance/random.h"
#include "chance/rate_model.h"
#include "chance/spatial.h"

namespace chance {

struct StepSizes {
  double theta = 0.1;
  double gamma = 0.1;
  double alpha = 0.05;
  double beta = 0.05;
  double tau = 0.5;  // on log tau
};

struct SamplerConfig {
  std::size_t iterations = 2000;  // including burn-in
  std::size_t burn_in = 100;
  std::size_t thin = 1;
  std::uint64_t seed = 1;
  StepSizes initial_step;
  double adapt_target = 0.234;
  std::size_t adapt_window = 100;  // adaptation stops at min(adapt_window, burn_in)
  std::size_t chains = 1;
  std::size_t workers = 1;
  std::size_t rate_substeps = 1;  // Metropolis sweeps over the rate group per iteration

  // Switches for testing sub-models; a frozen group keeps its initial value.
  bool update_rate = true;
  bool update_sigma = true;
  // Multiplies every lambda in the likelihood. Only calibration negative
  // controls set this to anything but 1.
  double rate_scale = 1.0;

  // Throws DomainError on invalid settings.
  void validate() const;
  std::size_t stored_per_chain() const { return (iterations - burn_in) / thin; }
};

struct ModelPriors {
  RatePriors rate;
  CompositionPriors composition;
};

struct MixtureOptions {
  std::size_t components = kDefaultComponents;
  std::uint64_t kmeans_seed = 0;
  // Fit k-means on unit-box coordinates and scale the Sigma prior to match.
  bool rescale_coordinates = false;
};

struct FitConfig {
  SamplerConfig sampler;
  ModelPriors priors;
  MixtureOptions mixture;
};

// Half-extent of each location space used for coordinate rescaling.
Eigen::Vector2d space_extent(Space space);
// Inverse-Wishart scale used for `space` after any rescaling.
Eigen::Matrix2d sigma_prior_scale(const FitConfig& config, Space space);

/// Everything a fit conditions on.
struct FitData {
  ModelIndex index;
  std::vector<RateRow> rows;
  std::vector<ChanceObservation> chances;
  Centroids assist_centroids;
  Centroids delta_centroids;
};

// Teams are the union of panel teams and roster keys; each roster is extended
// by any chance participant it lacks. Centroids are computed by k-means on the
// pooled locations unless supplied. Throws DomainError for an empty panel.
FitData prepare_data(const BlockPanel& panel, const std::vector<ChanceObservation>& chances,
                     std::map<std::string, std::vector<std::string>> rosters,
                     const MixtureOptions& mixture,
                     const std::optional<Centroids>& assist_centroids = std::nullopt,
                     const std::optional<Centroids>& delta_centroids = std::nullopt);

enum class RateGroup { theta, gamma, alpha, beta, tau };
inline constexpr std::size_t kRateGroupCount = 5;
const char* to_string(RateGroup group);

struct AcceptanceStats {
  std::array<std::uint64_t, kRateGroupCount> proposed{};
  std::array<std::uint64_t, kRateGroupCount> accepted{};

  double rate(RateGroup g) const;
  void record(RateGroup g, bool ok) {
    ++proposed[static_cast<std::size_t>(g)];
    accepted[static_cast<std::size_t>(g)] += ok ? 1 : 0;
  }
};

struct Draw {
  std::size_t chain = 0;
  std::size_t iteration = 0;
  RateParams rate;
  PlayerDist players;
  MixtureParams assist;
  MixtureParams delta;
};

struct PosteriorDraws {
  FitConfig config;
  ModelIndex index;
  Centroids assist_centroids;
  Centroids delta_centroids;
  std::string data_checksum;
  std::string centroid_checksum;
  std::vector<Draw> draws;  // chain-major, iteration order within a chain
  std::vector<AcceptanceStats> acceptance;  // post-burn-in, per chain

  std::size_t size() const { return draws.size(); }
  bool empty() const { return draws.empty(); }
};

/// Robbins-Monro adaptation of a log step size with gain (n + 1)^-0.6.
class AdaptiveStep {
 public:
  explicit AdaptiveStep(double initial_step, double target = 0.234);
  double step() const { return std::exp(log_step_); }
  void update(bool accepted);
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

 private:
  double log_step_;
  double target_;
  std::uint64_t n_ = 0;
  bool frozen_ = false;
};

struct RwmResult {
  std::vector<double> values;
  double log_target = 0.0;
  bool accepted = false;
};

// Symmetric Gaussian proposal of scale `step` on every coordinate. Throws
// InferenceError when log_target is not finite at `current`.
RwmResult rwm_update(std::span<const double> current, double step,
                     const std::function<double(std::span<const double>)>& log_target,
                     StreamRng& rng);
// As above with the current log target already known.
RwmResult rwm_update(std::span<const double> current, double current_log_target, double step,
                     const std::function<double(std::span<const double>)>& log_target,
                     StreamRng& rng);

// Unnormalised log density of tau given the free theta coordinates.
double tau_conditional_log_density(double tau, std::span<const double> theta_free,
                                   const RatePriors& priors);

struct TauDraw {
  double tau = 1.0;
  bool accepted = false;
};

// One Metropolis step on log tau targeting the exact conditional.
TauDraw update_tau(double current, std::span<const double> theta_free, const RatePriors& priors,
                   double log_step, StreamRng& rng);

// Calls fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t workers, std::size_t n, const std::function<void(std::size_t)>& fn);

// Runs config.sampler.chains chains. Chain c > 0 uses derive_seed(seed, c).
// `initial` overrides the default starting point.
PosteriorDraws fit(const FitData& data, const FitConfig& config,
                   const std::optional<ModelState>& initial = std::nullopt);

}  // namespace chance
