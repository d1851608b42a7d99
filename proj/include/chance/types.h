#pragma once

#include <compare>
#include <cstddef>
#include <string>

#include "chance/errors.h"

namespace chance {

inline constexpr int kBlockCount = 6;
inline constexpr double kBlockMinutes = 15.0;

// Pitch coordinates seen from the attacking team: x across the pitch,
// y from the defended goal line (origin = centre of the defended goal).
inline constexpr double kPitchHalfWidth = 136.0;
inline constexpr double kPitchLength = 420.0;

/// One of the six 15-minute blocks t_1..t_6.
class BlockIndex {
 public:
  constexpr explicit BlockIndex(int number) : number_(number) {
    if (number < 1 || number > kBlockCount) {
      throw DomainError("block number must be in 1..6, got " + std::to_string(number));
    }
  }
  static constexpr BlockIndex from_offset(std::size_t offset) {
    return BlockIndex(static_cast<int>(offset) + 1);
  }

  constexpr int number() const { return number_; }
  constexpr std::size_t offset() const { return static_cast<std::size_t>(number_ - 1); }
  // Nominal start minute of the block, 15(r - 1).
  constexpr double start_minute() const { return kBlockMinutes * (number_ - 1); }

  friend constexpr auto operator<=>(BlockIndex, BlockIndex) = default;

 private:
  int number_;
};

struct PitchLocation {
  double x = 0.0;
  double y = 0.0;

  bool on_pitch() const {
    return x >= -kPitchHalfWidth && x <= kPitchHalfWidth && y >= 0.0 && y <= kPitchLength;
  }
  friend bool operator==(const PitchLocation&, const PitchLocation&) = default;
};

// chance location minus assist location
struct DeltaLocation {
  double dx = 0.0;
  double dy = 0.0;
  friend bool operator==(const DeltaLocation&, const DeltaLocation&) = default;
};

// A player is identified together with the team they played for, so a
// transferred player starts afresh under the new team.
struct PlayerKey {
  std::string player_id;
  std::string team_id;

  friend auto operator<=>(const PlayerKey&, const PlayerKey&) = default;
  friend bool operator==(const PlayerKey&, const PlayerKey&) = default;
};

enum class Space { assist, delta };

inline const char* to_string(Space space) { return space == Space::assist ? "assist" : "delta"; }

}  // namespace chance
