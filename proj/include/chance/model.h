#pragma once

// Parameter containers shared by the rate model, the composition model, the
// samplers and the simulator.

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chance/types.h"

namespace chance {

/// Teams, their rosters and the flat player numbering used by every
/// per-player array. Players of one team occupy a contiguous range.
class ModelIndex {
 public:
  ModelIndex() = default;
  // Teams and each roster are sorted; duplicate players are dropped.
  ModelIndex(std::map<std::string, std::vector<std::string>> rosters, std::size_t components);

  std::size_t team_count() const { return teams_.size(); }
  std::size_t player_count() const { return players_.size(); }
  std::size_t components() const { return components_; }

  const std::vector<std::string>& teams() const { return teams_; }
  const std::string& team(std::size_t index) const { return teams_.at(index); }
  std::size_t team_index(const std::string& team_id) const;

  std::size_t roster_begin(std::size_t team) const { return offsets_.at(team); }
  std::size_t roster_size(std::size_t team) const { return offsets_.at(team + 1) - offsets_[team]; }
  std::size_t player_index(const PlayerKey& key) const;
  const PlayerKey& player(std::size_t flat) const { return players_.at(flat); }
  std::size_t team_of_player(std::size_t flat) const { return player_team_.at(flat); }

 private:
  std::vector<std::string> teams_;
  std::map<std::string, std::size_t> team_lookup_;
  std::vector<std::size_t> offsets_{0};
  std::vector<PlayerKey> players_;
  std::vector<std::size_t> player_team_;
  std::map<PlayerKey, std::size_t> player_lookup_;
  std::size_t components_ = 8;
};

struct RateParams {
  std::size_t team_count = 0;
  std::vector<double> theta;  // block-major, theta[b * J + j]
  std::array<double, kBlockCount> gamma{};
  double alpha = 0.0;
  double beta = 0.0;
  double tau = 1.0;

  static RateParams zeros(std::size_t teams);

  double theta_at(BlockIndex block, std::size_t team) const;
  std::span<const double> theta_block(BlockIndex block) const;
  // Writes J-1 free coordinates; the last team receives minus their sum.
  void set_free_theta(BlockIndex block, std::span<const double> free);
  std::vector<double> free_theta(BlockIndex block) const;
  // All 6(J-1) free coordinates.
  std::vector<double> all_free_theta() const;
};

/// Multinoulli player probabilities, phi[b * P + p]. For a (team, block) the
/// slice [b * P + roster_begin, + roster_size) sums to one.
struct PlayerDist {
  std::vector<double> phi_assist;
  std::vector<double> phi_chance;
};

/// Mixture weights per (player, block) and the per-component covariances
/// shared by everyone. kappa[((b * P) + p) * M + m].
struct MixtureParams {
  Space space = Space::assist;
  std::vector<double> kappa;
  std::vector<Eigen::Matrix2d> sigma;
};

struct Centroids {
  Space space = Space::assist;
  std::vector<Eigen::Vector2d> mu;

  std::size_t size() const { return mu.size(); }
};

struct ModelState {
  RateParams rate;
  PlayerDist players;
  MixtureParams assist;
  MixtureParams delta;
};

inline std::size_t cell_index(const ModelIndex& index, BlockIndex block, std::size_t player) {
  return block.offset() * index.player_count() + player;
}

std::span<const double> phi_slice(const ModelIndex& index, const std::vector<double>& phi,
                                  std::size_t team, BlockIndex block);
std::span<double> phi_slice(const ModelIndex& index, std::vector<double>& phi, std::size_t team,
                            BlockIndex block);
std::span<const double> kappa_slice(const ModelIndex& index, const MixtureParams& params,
                                    std::size_t player, BlockIndex block);
std::span<double> kappa_slice(const ModelIndex& index, MixtureParams& params, std::size_t player,
                              BlockIndex block);

// phi and kappa at their prior means, sigma = identity, rate params zero, tau = 1.
ModelState initial_state(const ModelIndex& index);

void write_centroids_csv(std::ostream& out, const Centroids& centroids);
// Reads rows whose space_tag matches `space`.
Centroids read_centroids_csv(std::istream& in, Space space);

}  // namespace chance
