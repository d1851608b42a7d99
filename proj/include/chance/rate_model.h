#pragma once

// Poisson model of chance counts per (fixture, team, block):
//
//   N ~ Pois(lambda),
//   lambda = exp(theta[team] - theta[opponent] + home * gamma[block] + alpha G + beta R)
//
// with theta summing to zero over teams within each block.

#include <span>
#include <vector>

#include "chance/ingest.h"
#include "chance/model.h"

namespace chance {

struct RatePriors {
  double effect_sd = 10.0;  // gamma, alpha, beta ~ N(0, effect_sd^2)
  double tau_shape = 1.0;   // tau ~ Gamma(shape, rate); tau is the variance of theta
  double tau_rate = 0.01;
};

/// One likelihood term with teams resolved to model indices.
struct RateRow {
  std::size_t team = 0;
  std::size_t opponent = 0;
  BlockIndex block{1};
  bool is_home = false;
  int count = 0;
  int game_state = 0;
  int red_state = 0;
};

std::vector<RateRow> to_rate_rows(const BlockPanel& panel, const ModelIndex& index);

double linear_predictor(const RateParams& params, const RateRow& row);
// Throws LookupError for unknown team indices and NumericError if lambda is not finite.
double compute_lambda(const RateParams& params, const RateRow& row);

// rate_scale multiplies every lambda; anything other than 1 is a deliberately
// misspecified likelihood used by calibration negative controls.
double row_log_likelihood(const RateParams& params, const RateRow& row, double rate_scale = 1.0);
double log_likelihood(const RateParams& params, std::span<const RateRow> rows,
                      double rate_scale = 1.0);

struct RatePriorTerms {
  double theta = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double tau = 0.0;
  double total() const { return theta + gamma + alpha + beta + tau; }
};

// Density of the free theta coordinates: each ~ N(0, tau) with tau a variance.
double theta_log_prior(std::span<const double> free_theta, double tau);
double effect_log_prior(std::span<const double> values, double sd);
double tau_log_prior(double tau, const RatePriors& priors);

// Throws DomainError when tau <= 0.
RatePriorTerms log_prior_terms(const RateParams& params, const RatePriors& priors = {});
double log_prior(const RateParams& params, const RatePriors& priors = {});

// Subtracts each block's mean. theta is block-major with `team_count` entries per block.
std::vector<double> project_sum_to_zero(std::span<const double> theta, std::size_t team_count);

}  // namespace chance
