#include "chance/analytics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "json.hpp"

#include "chance/csv.h"
#include "chance/diagnostics.h"
#include "chance/errors.h"
#include "chance/log.h"

namespace chance {

void ReportTable::validate() const {
  auto check_shape = [&](const std::vector<std::vector<double>>& v) {
    if (v.size() != rows.size()) throw DomainError("table has the wrong number of rows");
    for (const auto& r : v) {
      if (r.size() != columns.size()) throw DomainError("table is not rectangular");
    }
  };
  check_shape(values);
  if (lower) check_shape(*lower);
  if (upper) check_shape(*upper);
  if (std::set<std::string>(rows.begin(), rows.end()).size() != rows.size()) {
    throw DomainError("table row labels are not unique");
  }
  if (std::set<std::string>(columns.begin(), columns.end()).size() != columns.size()) {
    throw DomainError("table column labels are not unique");
  }
}

void write_table_csv(std::ostream& out, const ReportTable& table) {
  table.validate();
  std::vector<std::string> header{table.row_header};
  for (const auto& c : table.columns) {
    header.push_back(c);
    if (table.lower) header.push_back(c + "_q2.5");
    if (table.upper) header.push_back(c + "_q97.5");
  }
  csv::write_row(out, header);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::vector<std::string> row{table.rows[r]};
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      row.push_back(csv::format_double(table.values[r][c]));
      if (table.lower) row.push_back(csv::format_double((*table.lower)[r][c]));
      if (table.upper) row.push_back(csv::format_double((*table.upper)[r][c]));
    }
    csv::write_row(out, row);
  }
}

void write_table_jsonl(std::ostream& out, const ReportTable& table) {
  table.validate();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    nlohmann::ordered_json j;
    j[table.row_header] = table.rows[r];
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const auto& name = table.columns[c];
      j[name] = table.values[r][c];
      if (table.lower) j[name + "_q2.5"] = (*table.lower)[r][c];
      if (table.upper) j[name + "_q97.5"] = (*table.upper)[r][c];
    }
    out << j.dump() << '\n';
  }
}

namespace {

void require_draws(const PosteriorDraws& draws) {
  if (draws.empty()) throw DomainError("no posterior draws");
}

std::vector<std::string> block_labels() {
  std::vector<std::string> out;
  for (int b = 1; b <= kBlockCount; ++b) out.push_back("t" + std::to_string(b));
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

ReportTable team_ability_table(const PosteriorDraws& draws) {
  require_draws(draws);
  const auto& index = draws.index;
  ReportTable t;
  t.title = "team ability (theta)";
  t.row_header = "team";
  t.rows = index.teams();
  t.columns = block_labels();
  t.values.assign(index.team_count(), std::vector<double>(kBlockCount));
  t.lower = t.values;
  t.upper = t.values;
  std::vector<double> samples(draws.size());
  for (std::size_t team = 0; team < index.team_count(); ++team) {
    for (int b = 0; b < kBlockCount; ++b) {
      for (std::size_t d = 0; d < draws.size(); ++d) {
        samples[d] = draws.draws[d].rate.theta_at(BlockIndex::from_offset(b), team);
      }
      t.values[team][b] = mean_of(samples);
      (*t.lower)[team][b] = quantile(samples, 0.025);
      (*t.upper)[team][b] = quantile(samples, 0.975);
    }
  }
  return t;
}

ReportTable home_effect_summary(const PosteriorDraws& draws) {
  require_draws(draws);
  ReportTable t;
  t.title = "home effect (gamma)";
  t.row_header = "block";
  t.rows = block_labels();
  t.columns = {"mean", "q2.5", "q97.5"};
  std::vector<double> samples(draws.size());
  for (int b = 0; b < kBlockCount; ++b) {
    for (std::size_t d = 0; d < draws.size(); ++d) samples[d] = draws.draws[d].rate.gamma[b];
    t.values.push_back({mean_of(samples), quantile(samples, 0.025), quantile(samples, 0.975)});
  }
  return t;
}

ReportTable radar_weights(const PosteriorDraws& draws, const PlayerKey& player, Space space) {
  require_draws(draws);
  const auto& index = draws.index;
  const auto p = index.player_index(player);
  const auto m = index.components();
  ReportTable t;
  t.title = std::string("mixture weights (") + to_string(space) + ") for " + player.player_id;
  t.row_header = "block";
  t.rows = block_labels();
  for (std::size_t c = 1; c <= m; ++c) t.columns.push_back("c" + std::to_string(c));
  t.values.assign(kBlockCount, std::vector<double>(m, 0.0));
  for (const auto& d : draws.draws) {
    const MixtureParams& mp = space == Space::assist ? d.assist : d.delta;
    for (int b = 0; b < kBlockCount; ++b) {
      const auto k = kappa_slice(index, mp, p, BlockIndex::from_offset(b));
      for (std::size_t c = 0; c < m; ++c) t.values[b][c] += k[c];
    }
  }
  for (auto& row : t.values) {
    for (auto& v : row) v /= static_cast<double>(draws.size());
  }
  return t;
}

Eigen::Vector2d SurfaceGrid::cell_centre(std::size_t i, std::size_t j) const {
  return {bounds.x_min + (static_cast<double>(i) + 0.5) * cell_width(),
          bounds.y_min + (static_cast<double>(j) + 0.5) * cell_height()};
}

double SurfaceGrid::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * cell_width() * cell_height();
}

namespace {

struct ComponentForm {
  Eigen::Vector2d mu;
  double p00, p01, p11;  // precision entries
  double log_norm;
};

ComponentForm component_form(const Eigen::Vector2d& mu, const Eigen::Matrix2d& sigma, std::size_t m) {
  const double det = sigma.determinant();
  if (!(det > 0.0) || !std::isfinite(det)) {
    throw NumericError("covariance of component " + std::to_string(m + 1) +
                       " is singular or not positive-definite");
  }
  const Eigen::Matrix2d prec = sigma.inverse();
  return {mu, prec(0, 0), prec(0, 1), prec(1, 1), -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det)};
}

const MixtureParams& space_params(const Draw& d, Space space) {
  return space == Space::assist ? d.assist : d.delta;
}

const Centroids& space_centroids(const PosteriorDraws& draws, Space space) {
  return space == Space::assist ? draws.assist_centroids : draws.delta_centroids;
}

}  // namespace

SurfaceGrid density_surface(const PosteriorDraws& draws, const PlayerKey& player, BlockIndex block,
                            Space space, const GridSpec& grid) {
  require_draws(draws);
  if (grid.nx < 2 || grid.ny < 2) throw DomainError("surface grid must be at least 2x2");
  if (!(grid.bounds.width() > 0.0 && grid.bounds.height() > 0.0)) {
    throw DomainError("surface grid has no area");
  }
  const auto& index = draws.index;
  const auto p = index.player_index(player);
  const auto& centroids = space_centroids(draws, space);

  SurfaceGrid s{grid.bounds, grid.nx, grid.ny, {}};
  const std::size_t cells = grid.nx * grid.ny;
  Eigen::ArrayXd x(cells), y(cells);
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const auto c = s.cell_centre(i, j);
      x[j * grid.nx + i] = c.x();
      y[j * grid.nx + i] = c.y();
    }
  }
  Eigen::ArrayXd total = Eigen::ArrayXd::Zero(cells);
  Eigen::ArrayXd dx(cells), dy(cells);
  for (const auto& d : draws.draws) {
    const MixtureParams& mp = space_params(d, space);
    const auto kappa = kappa_slice(index, mp, p, block);
    for (std::size_t m = 0; m < centroids.size(); ++m) {
      if (!(kappa[m] > 0.0)) continue;
      const auto f = component_form(centroids.mu[m], mp.sigma[m], m);
      dx = x - f.mu.x();
      dy = y - f.mu.y();
      total += kappa[m] *
               (f.log_norm - 0.5 * (f.p00 * dx.square() + 2.0 * f.p01 * dx * dy + f.p11 * dy.square())).exp();
    }
  }
  total /= static_cast<double>(draws.size());
  s.values.assign(total.data(), total.data() + cells);
  return s;
}

GridSpec standard_grid(const PosteriorDraws& draws, Space space, std::size_t max_cells) {
  require_draws(draws);
  const auto& centroids = space_centroids(draws, space);
  const auto m = centroids.size();
  double min_sd = std::numeric_limits<double>::infinity();
  Rect r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
         std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t c = 0; c < m; ++c) {
    Eigen::Matrix2d mean = Eigen::Matrix2d::Zero();
    for (const auto& d : draws.draws) mean += space_params(d, space).sigma[c];
    mean /= static_cast<double>(draws.size());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(mean);
    const double lo = std::sqrt(std::max(eig.eigenvalues()[0], 0.0));
    const double hi = std::sqrt(std::max(eig.eigenvalues()[1], 0.0));
    min_sd = std::min(min_sd, lo);
    const auto& mu = centroids.mu[c];
    r.x_min = std::min(r.x_min, mu.x() - 8.0 * hi);
    r.x_max = std::max(r.x_max, mu.x() + 8.0 * hi);
    r.y_min = std::min(r.y_min, mu.y() - 8.0 * hi);
    r.y_max = std::max(r.y_max, mu.y() + 8.0 * hi);
  }
  if (!(min_sd > 0.0)) throw NumericError("degenerate posterior covariance");
  auto cells = [&](double extent) {
    const auto n = static_cast<std::size_t>(std::ceil(extent / min_sd));
    return std::clamp<std::size_t>(n, 2, max_cells);
  };
  return {r, cells(r.width()), cells(r.height())};
}

namespace {

void check_region(const Region& region, Space space) {
  const Rect bounds = space_bounds(space);
  if (const auto* p = std::get_if<PointQuery>(&region)) {
    if (!bounds.contains(p->at)) {
      throw DomainError(std::string("query point lies outside the ") + to_string(space) + " space");
    }
    return;
  }
  const auto& q = std::get<RectQuery>(region);
  if (!(q.region.width() > 0.0 && q.region.height() > 0.0)) throw DomainError("query region has no area");
  if (q.resolution == 0) throw DomainError("query resolution must be positive");
  if (!bounds.contains(q.region)) {
    throw DomainError(std::string("query region lies outside the ") + to_string(space) + " space");
  }
}

}  // namespace

ReportTable involvement_probability(const PosteriorDraws& draws, const std::string& team,
                                    BlockIndex block, const Region& region, Role role) {
  require_draws(draws);
  const auto& index = draws.index;
  const auto t = index.team_index(team);
  const auto roster = index.roster_size(t);
  if (roster == 0) throw DomainError("team " + team + " has an empty roster");
  const Space space = role == Role::assist ? Space::assist : Space::delta;
  check_region(region, space);
  const auto& centroids = space_centroids(draws, space);

  // Evaluation points and the log of the area each one stands for.
  std::vector<Eigen::Vector2d> points;
  double log_weight = 0.0;
  if (const auto* p = std::get_if<PointQuery>(&region)) {
    points.push_back(p->at);
  } else {
    const auto& q = std::get<RectQuery>(region);
    const double w = q.region.width() / static_cast<double>(q.resolution);
    const double h = q.region.height() / static_cast<double>(q.resolution);
    for (std::size_t j = 0; j < q.resolution; ++j) {
      for (std::size_t i = 0; i < q.resolution; ++i) {
        points.emplace_back(q.region.x_min + (static_cast<double>(i) + 0.5) * w,
                            q.region.y_min + (static_cast<double>(j) + 0.5) * h);
      }
    }
    log_weight = std::log(w * h);
  }

  ReportTable out;
  out.title = std::string("involvement probability (") + (role == Role::assist ? "assist" : "chance") +
              ") for " + team;
  out.row_header = "player";
  out.columns = {"probability"};
  for (std::size_t i = 0; i < roster; ++i) out.rows.push_back(index.player(index.roster_begin(t) + i).player_id);
  std::vector<double> mean(roster, 0.0);
  std::vector<double> log_p(roster), terms(points.size());
  bool warned = false;

  for (const auto& d : draws.draws) {
    const MixtureParams& mp = space_params(d, space);
    const GaussianMixture mixture(centroids, mp.sigma);
    const auto& phi = role == Role::assist ? d.players.phi_assist : d.players.phi_chance;
    for (std::size_t i = 0; i < roster; ++i) {
      const auto flat = index.roster_begin(t) + i;
      const auto kappa = kappa_slice(index, mp, flat, block);
      for (std::size_t k = 0; k < points.size(); ++k) terms[k] = mixture.log_density(points[k], kappa);
      const double phi_i = phi[cell_index(index, block, flat)];
      log_p[i] = (phi_i > 0.0 ? std::log(phi_i) : -std::numeric_limits<double>::infinity()) +
                 log_sum_exp(terms) + log_weight;
    }
    const double norm = log_sum_exp(log_p);
    if (!std::isfinite(norm)) {
      if (!warned) warn("no player has positive density in the query region; using uniform probabilities");
      warned = true;
      for (auto& v : mean) v += 1.0 / static_cast<double>(roster);
      continue;
    }
    for (std::size_t i = 0; i < roster; ++i) mean[i] += std::exp(log_p[i] - norm);
  }
  for (std::size_t i = 0; i < roster; ++i) {
    out.values.push_back({mean[i] / static_cast<double>(draws.size())});
  }
  return out;
}

}  // namespace chance
