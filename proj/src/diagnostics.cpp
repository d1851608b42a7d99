#include "chance/diagnostics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "chance/csv.h"
#include "chance/draws_io.h"
#include "chance/errors.h"
#include "chance/log.h"

namespace chance {

double quantile(std::span<const double> values, double p) {
  if (values.empty()) throw DomainError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile probability must be in [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance_of(std::span<const double> x, double mean) {
  if (x.size() < 2) return 0.0;
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace

double effective_sample_size(std::span<const double> chain) {
  const std::size_t n = chain.size();
  if (n < 2) return static_cast<double>(n);
  const double mean = mean_of(chain);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = chain[i] - mean;
  const double c0 = std::inner_product(d.begin(), d.end(), d.begin(), 0.0) / static_cast<double>(n);
  if (!(c0 > 0.0)) return static_cast<double>(n);

  auto rho = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += d[i] * d[i + lag];
    return s / static_cast<double>(n) / c0;
  };
  // Sum consecutive autocorrelation pairs while the pair sum stays positive,
  // forcing the pair sums to be non-increasing (Geyer's monotone sequence).
  double tau = -1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = rho(2 * k) + rho(2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, previous);
    previous = pair;
    tau += 2.0 * pair;
  }
  if (!(tau > 0.0)) return static_cast<double>(n);
  return std::min(static_cast<double>(n), static_cast<double>(n) / tau);
}

std::optional<double> potential_scale_reduction(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) return std::nullopt;
  const std::size_t n = chains.front().size();
  if (n < 2) return std::nullopt;
  for (const auto& c : chains) {
    if (c.size() != n) throw DomainError("chains must have equal length for R-hat");
  }
  const double m = static_cast<double>(chains.size());
  std::vector<double> means;
  double w = 0.0;
  for (const auto& c : chains) {
    means.push_back(mean_of(c));
    w += variance_of(c, means.back());
  }
  w /= m;
  const double grand = mean_of(means);
  const double b = static_cast<double>(n) * variance_of(means, grand);
  if (!(w > 0.0)) return 1.0;
  const double var_plus = (static_cast<double>(n) - 1.0) / static_cast<double>(n) * w +
                          b / static_cast<double>(n);
  return std::sqrt(var_plus / w);
}

ParameterSummary summarise(std::string name, const std::vector<std::vector<double>>& chains) {
  ParameterSummary s;
  s.name = std::move(name);
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  if (pooled.empty()) throw DomainError("no draws to summarise");
  s.mean = mean_of(pooled);
  s.sd = std::sqrt(variance_of(pooled, s.mean));
  s.q025 = quantile(pooled, 0.025);
  s.q975 = quantile(pooled, 0.975);
  s.degenerate = !(s.sd > 0.0);
  for (const auto& c : chains) s.ess += effective_sample_size(c);
  s.ess = std::min(s.ess, static_cast<double>(pooled.size()));
  s.mcse = s.ess > 0.0 ? s.sd / std::sqrt(s.ess) : 0.0;
  s.rhat = potential_scale_reduction(chains);
  return s;
}

ChainDiagnostics diagnostics(const PosteriorDraws& draws) {
  if (draws.size() < 10) {
    throw DomainError("diagnostics need at least 10 stored draws, have " +
                      std::to_string(draws.size()));
  }
  ChainDiagnostics out;
  const auto names = rate_parameter_names(draws.index);
  const std::size_t chains = draws.config.sampler.chains;
  // values[param][chain][draw]
  std::vector<std::vector<std::vector<double>>> values(names.size(),
                                                       std::vector<std::vector<double>>(chains));
  for (const auto& d : draws.draws) {
    const auto v = rate_parameter_values(d.rate);
    for (std::size_t k = 0; k < names.size(); ++k) values[k][d.chain].push_back(v[k]);
  }
  for (std::size_t k = 0; k < names.size(); ++k) {
    std::erase_if(values[k], [](const auto& c) { return c.empty(); });
    out.parameters.push_back(summarise(names[k], values[k]));
    if (out.parameters.back().degenerate) {
      out.warnings.push_back("parameter " + names[k] + " is constant across draws");
    }
  }

  const std::size_t teams = draws.index.team_count();
  auto group_of = [&](std::size_t k) -> RateGroup {
    if (k < teams * kBlockCount) return RateGroup::theta;
    if (k < teams * kBlockCount + kBlockCount) return RateGroup::gamma;
    return static_cast<RateGroup>(static_cast<std::size_t>(RateGroup::alpha) + (k - teams * kBlockCount - kBlockCount));
  };
  for (std::size_t g = 0; g < kRateGroupCount; ++g) {
    GroupSummary gs;
    gs.group = to_string(static_cast<RateGroup>(g));
    std::uint64_t proposed = 0, accepted = 0;
    for (const auto& a : draws.acceptance) {
      proposed += a.proposed[g];
      accepted += a.accepted[g];
    }
    gs.acceptance = proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
    gs.min_ess = static_cast<double>(draws.size());
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (static_cast<std::size_t>(group_of(k)) != g) continue;
      gs.max_mcse = std::max(gs.max_mcse, out.parameters[k].mcse);
      gs.min_ess = std::min(gs.min_ess, out.parameters[k].ess);
    }
    out.groups.push_back(gs);
  }
  for (const auto& w : out.warnings) warn(w);
  return out;
}

void write_diagnostics_csv(std::ostream& out, const ChainDiagnostics& diag) {
  csv::write_row(out, {"parameter", "mean", "sd", "q2.5", "q97.5", "ess", "mcse", "rhat"});
  for (const auto& p : diag.parameters) {
    csv::write_row(out, {p.name, csv::format_double(p.mean), csv::format_double(p.sd),
                         csv::format_double(p.q025), csv::format_double(p.q975),
                         csv::format_double(p.ess), csv::format_double(p.mcse),
                         p.rhat ? csv::format_double(*p.rhat) : ""});
  }
}

}  // namespace chance
