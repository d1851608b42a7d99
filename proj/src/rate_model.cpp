#include "chance/rate_model.h"

#include <cmath>

#include "chance/random.h"

namespace chance {

std::vector<RateRow> to_rate_rows(const BlockPanel& panel, const ModelIndex& index) {
  std::vector<RateRow> rows;
  rows.reserve(panel.size());
  for (const auto& r : panel) {
    rows.push_back({index.team_index(r.team_id), index.team_index(r.opponent_id), r.block,
                    r.is_home, r.count, r.game_state, r.red_state});
  }
  return rows;
}

double linear_predictor(const RateParams& params, const RateRow& row) {
  if (row.team >= params.team_count || row.opponent >= params.team_count) {
    throw LookupError("panel row references a team outside the parameter table");
  }
  const std::size_t base = row.block.offset() * params.team_count;
  double eta = params.theta[base + row.team] - params.theta[base + row.opponent];
  if (row.is_home) eta += params.gamma[row.block.offset()];
  eta += params.alpha * row.game_state + params.beta * row.red_state;
  return eta;
}

double compute_lambda(const RateParams& params, const RateRow& row) {
  const double lambda = std::exp(linear_predictor(params, row));
  if (!std::isfinite(lambda)) throw NumericError("chance rate overflowed");
  return lambda;
}

double row_log_likelihood(const RateParams& params, const RateRow& row, double rate_scale) {
  const double eta = linear_predictor(params, row) + std::log(rate_scale);
  const double lambda = std::exp(eta);
  if (!std::isfinite(lambda)) throw NumericError("chance rate overflowed");
  return row.count * eta - lambda - std::lgamma(row.count + 1.0);
}

double log_likelihood(const RateParams& params, std::span<const RateRow> rows, double rate_scale) {
  double total = 0.0;
  for (const auto& row : rows) total += row_log_likelihood(params, row, rate_scale);
  return total;
}

double theta_log_prior(std::span<const double> free_theta, double tau) {
  if (!(tau > 0.0)) throw DomainError("tau must be positive");
  const double sd = std::sqrt(tau);
  double total = 0.0;
  for (double v : free_theta) total += normal_log_density(v, 0.0, sd);
  return total;
}

double effect_log_prior(std::span<const double> values, double sd) {
  double total = 0.0;
  for (double v : values) total += normal_log_density(v, 0.0, sd);
  return total;
}

double tau_log_prior(double tau, const RatePriors& priors) {
  if (!(tau > 0.0)) throw DomainError("tau must be positive");
  return gamma_log_density(tau, priors.tau_shape, priors.tau_rate);
}

RatePriorTerms log_prior_terms(const RateParams& params, const RatePriors& priors) {
  RatePriorTerms t;
  t.tau = tau_log_prior(params.tau, priors);
  t.theta = theta_log_prior(params.all_free_theta(), params.tau);
  t.gamma = effect_log_prior(params.gamma, priors.effect_sd);
  t.alpha = normal_log_density(params.alpha, 0.0, priors.effect_sd);
  t.beta = normal_log_density(params.beta, 0.0, priors.effect_sd);
  return t;
}

double log_prior(const RateParams& params, const RatePriors& priors) {
  return log_prior_terms(params, priors).total();
}

std::vector<double> project_sum_to_zero(std::span<const double> theta, std::size_t team_count) {
  if (team_count < 2) throw DomainError("sum-to-zero projection needs at least two teams");
  if (theta.size() % team_count != 0) throw DomainError("theta size is not a multiple of the team count");
  std::vector<double> out(theta.begin(), theta.end());
  for (std::size_t start = 0; start < out.size(); start += team_count) {
    double mean = 0.0;
    for (std::size_t j = 0; j < team_count; ++j) mean += out[start + j];
    mean /= static_cast<double>(team_count);
    for (std::size_t j = 0; j < team_count; ++j) out[start + j] -= mean;
  }
  return out;
}

}  // namespace chance
