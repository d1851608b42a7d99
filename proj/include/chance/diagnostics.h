#pragma once

// Chain summaries: moments, quantiles, effective sample size, Monte Carlo
// standard error and, with several chains, the potential scale reduction.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chance/inference.h"

namespace chance {

// Linear interpolation between order statistics (R type 7). Throws
// DomainError for empty input or p outside [0, 1].
double quantile(std::span<const double> values, double p);

// Geyer's initial positive sequence estimator with the monotone adjustment,
// capped at the chain length.
// A constant chain returns its length.
double effective_sample_size(std::span<const double> chain);

// Gelman-Rubin R-hat over equal-length chains; nullopt for fewer than two chains.
std::optional<double> potential_scale_reduction(const std::vector<std::vector<double>>& chains);

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  double ess = 0.0;
  double mcse = 0.0;
  std::optional<double> rhat;
  bool degenerate = false;  // zero variance
};

ParameterSummary summarise(std::string name, const std::vector<std::vector<double>>& chains);

struct GroupSummary {
  std::string group;
  double acceptance = 0.0;  // Metropolis groups only; pooled over chains
  double max_mcse = 0.0;
  double min_ess = 0.0;
};

struct ChainDiagnostics {
  std::vector<ParameterSummary> parameters;
  std::vector<GroupSummary> groups;
  std::vector<std::string> warnings;
};

// Summaries of every scalar rate parameter. Throws DomainError when fewer
// than 10 draws are stored.
ChainDiagnostics diagnostics(const PosteriorDraws& draws);

void write_diagnostics_csv(std::ostream& out, const ChainDiagnostics& diag);

}  // namespace chance
