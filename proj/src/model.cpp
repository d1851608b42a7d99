#include "chance/model.h"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>

#include "chance/csv.h"
#include "chance/errors.h"

namespace chance {

ModelIndex::ModelIndex(std::map<std::string, std::vector<std::string>> rosters,
                       std::size_t components)
    : components_(components) {
  if (components == 0) throw DomainError("mixture needs at least one component");
  for (auto& [team, players] : rosters) {
    std::sort(players.begin(), players.end());
    players.erase(std::unique(players.begin(), players.end()), players.end());
    team_lookup_.emplace(team, teams_.size());
    for (const auto& p : players) {
      PlayerKey key{p, team};
      player_lookup_.emplace(key, players_.size());
      players_.push_back(std::move(key));
      player_team_.push_back(teams_.size());
    }
    teams_.push_back(team);
    offsets_.push_back(players_.size());
  }
}

std::size_t ModelIndex::team_index(const std::string& team_id) const {
  auto it = team_lookup_.find(team_id);
  if (it == team_lookup_.end()) throw LookupError("unknown team '" + team_id + "'");
  return it->second;
}

std::size_t ModelIndex::player_index(const PlayerKey& key) const {
  auto it = player_lookup_.find(key);
  if (it == player_lookup_.end()) {
    throw LookupError("unknown player '" + key.player_id + "' of team '" + key.team_id + "'");
  }
  return it->second;
}

RateParams RateParams::zeros(std::size_t teams) {
  RateParams p;
  p.team_count = teams;
  p.theta.assign(teams * kBlockCount, 0.0);
  return p;
}

double RateParams::theta_at(BlockIndex block, std::size_t team) const {
  if (team >= team_count) throw LookupError("team index out of range");
  return theta[block.offset() * team_count + team];
}

std::span<const double> RateParams::theta_block(BlockIndex block) const {
  return std::span<const double>(theta).subspan(block.offset() * team_count, team_count);
}

void RateParams::set_free_theta(BlockIndex block, std::span<const double> free) {
  if (free.size() + 1 != team_count) throw DomainError("expected J-1 free theta coordinates");
  double* row = theta.data() + block.offset() * team_count;
  double sum = 0.0;
  for (std::size_t j = 0; j < free.size(); ++j) {
    row[j] = free[j];
    sum += free[j];
  }
  row[team_count - 1] = -sum;
}

std::vector<double> RateParams::free_theta(BlockIndex block) const {
  auto row = theta_block(block);
  return {row.begin(), row.end() - 1};
}

std::vector<double> RateParams::all_free_theta() const {
  std::vector<double> out;
  out.reserve(kBlockCount * (team_count - 1));
  for (int b = 0; b < kBlockCount; ++b) {
    auto row = theta_block(BlockIndex::from_offset(b));
    out.insert(out.end(), row.begin(), row.end() - 1);
  }
  return out;
}

std::span<const double> phi_slice(const ModelIndex& index, const std::vector<double>& phi,
                                  std::size_t team, BlockIndex block) {
  return std::span<const double>(phi).subspan(cell_index(index, block, index.roster_begin(team)),
                                              index.roster_size(team));
}

std::span<double> phi_slice(const ModelIndex& index, std::vector<double>& phi, std::size_t team,
                            BlockIndex block) {
  return std::span<double>(phi).subspan(cell_index(index, block, index.roster_begin(team)),
                                        index.roster_size(team));
}

std::span<const double> kappa_slice(const ModelIndex& index, const MixtureParams& params,
                                    std::size_t player, BlockIndex block) {
  const auto m = index.components();
  return std::span<const double>(params.kappa).subspan(cell_index(index, block, player) * m, m);
}

std::span<double> kappa_slice(const ModelIndex& index, MixtureParams& params, std::size_t player,
                              BlockIndex block) {
  const auto m = index.components();
  return std::span<double>(params.kappa).subspan(cell_index(index, block, player) * m, m);
}

ModelState initial_state(const ModelIndex& index) {
  ModelState s;
  s.rate = RateParams::zeros(index.team_count());
  const auto players = index.player_count();
  s.players.phi_assist.assign(players * kBlockCount, 0.0);
  for (std::size_t p = 0; p < players; ++p) {
    const double uniform = 1.0 / static_cast<double>(index.roster_size(index.team_of_player(p)));
    for (int b = 0; b < kBlockCount; ++b) {
      s.players.phi_assist[cell_index(index, BlockIndex::from_offset(b), p)] = uniform;
    }
  }
  s.players.phi_chance = s.players.phi_assist;
  const auto m = index.components();
  for (Space space : {Space::assist, Space::delta}) {
    MixtureParams& mp = space == Space::assist ? s.assist : s.delta;
    mp.space = space;
    mp.kappa.assign(players * kBlockCount * m, 1.0 / static_cast<double>(m));
    mp.sigma.assign(m, Eigen::Matrix2d::Identity());
  }
  return s;
}

void write_centroids_csv(std::ostream& out, const Centroids& centroids) {
  csv::write_row(out, {"component", "x", "y", "space_tag"});
  for (std::size_t m = 0; m < centroids.size(); ++m) {
    csv::write_row(out, {std::to_string(m + 1), csv::format_double(centroids.mu[m].x()),
                         csv::format_double(centroids.mu[m].y()), to_string(centroids.space)});
  }
}

Centroids read_centroids_csv(std::istream& in, Space space) {
  std::size_t line_number = 0;
  auto header = csv::next_line(in, line_number);
  if (!header) throw SchemaError("centroid file is empty");
  std::vector<std::pair<long long, Eigen::Vector2d>> rows;
  while (auto line = csv::next_line(in, line_number)) {
    auto cells = csv::split_line(*line);
    if (cells.size() < 4) throw SchemaError("centroid line " + std::to_string(line_number) + " is short");
    if (csv::trim(cells[3]) != to_string(space)) continue;
    auto component = csv::parse_integer(cells[0]);
    auto x = csv::parse_double(cells[1]);
    auto y = csv::parse_double(cells[2]);
    if (!component || !x || !y) {
      throw SchemaError("malformed centroid line " + std::to_string(line_number));
    }
    rows.push_back({*component, Eigen::Vector2d(*x, *y)});
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  Centroids c;
  c.space = space;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != static_cast<long long>(i + 1)) {
      throw SchemaError("centroid components must be numbered 1..M");
    }
    c.mu.push_back(rows[i].second);
  }
  if (c.mu.empty()) throw SchemaError(std::string("no ") + to_string(space) + " centroids in file");
  return c;
}

}  // namespace chance
