#pragma once

// Event-level match data: parsing, block assignment, game / red-card state
// and the two derived tables the models consume (block count panel and chance
// observations).

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "chance/types.h"

namespace chance {

enum class EventType { Goal, Chance, YellowCard, RedCard, Other };

enum class Half { first, second, unknown };

const char* to_string(EventType type);
// Case- and space-insensitive; "Yellow card" and "YellowCard" both map to
// YellowCard. Anything unrecognised maps to Other.
EventType parse_event_type(std::string_view text);

inline bool is_chance(EventType t) { return t == EventType::Goal || t == EventType::Chance; }

struct EventRecord {
  std::string fixture_id;
  std::string date;  // ISO-8601 calendar date, YYYY-MM-DD
  std::string team_id;
  double minute = 0.0;
  Half half = Half::unknown;
  EventType type = EventType::Other;
  std::string event_player;
  std::optional<std::string> assist_player;
  std::optional<PitchLocation> assist_loc;
  std::optional<PitchLocation> chance_loc;

  bool has_full_chance_data() const {
    return is_chance(type) && assist_player && assist_loc && chance_loc;
  }
  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

struct FixtureInfo {
  std::string fixture_id;
  std::string date;
  std::string home_team;
  std::string away_team;
};

struct ChanceObservation {
  std::string fixture_id;
  std::string team_id;
  BlockIndex block{1};
  PlayerKey assist_player;
  PlayerKey chance_player;
  PitchLocation assist_loc;
  DeltaLocation delta;

  PitchLocation chance_loc() const { return {assist_loc.x + delta.dx, assist_loc.y + delta.dy}; }
};

struct PanelRow {
  std::string fixture_id;
  std::string team_id;
  std::string opponent_id;
  BlockIndex block{1};
  bool is_home = false;
  int count = 0;       // N: chances created in the block
  int game_state = 0;  // G at block start
  int red_state = 0;   // R at block start
};

using BlockPanel = std::vector<PanelRow>;

struct RowError {
  std::size_t line = 0;
  std::string message;
};

// Canonical field name -> source column name. Canonical names:
// fixture, date, team, time, half, type, event_player, assist_player,
// assist_x, assist_y, chance_x, chance_y. Unmapped names use themselves.
struct EventSchema {
  std::map<std::string, std::string> columns;
  char delimiter = ',';

  std::string source_name(const std::string& canonical) const;
};

struct ParseResult {
  std::vector<EventRecord> records;
  std::vector<RowError> errors;
};

// Malformed cells become RowErrors (the row is skipped); a missing mandatory
// column throws SchemaError. The half column is optional.
ParseResult parse_events(std::istream& source, const EventSchema& schema = {});

// Header: fixture,date,home_team,away_team
std::vector<FixtureInfo> parse_fixtures(std::istream& source, char delimiter = ',');

void write_events_csv(std::ostream& out, const std::vector<EventRecord>& events);
void write_fixtures_csv(std::ostream& out, const std::vector<FixtureInfo>& fixtures);

// Block intervals are (15(r-1), 15r]; minute 0 is in t_1. Stoppage time of a
// known half folds into t_3 / t_6. Throws DomainError on negative minutes.
BlockIndex assign_block(double minute, Half half);

// Goal difference from team_id's perspective at the start of `block`.
int derive_game_state(const std::vector<EventRecord>& events, const FixtureInfo& fixture,
                      const std::string& team_id, BlockIndex block);

// Player difference from team_id's perspective at the start of `block`: an
// own red card counts -1, an opponent red card +1.
int derive_red_card_state(const std::vector<EventRecord>& events, const FixtureInfo& fixture,
                          const std::string& team_id, BlockIndex block);

// Twelve rows per fixture in fixture order: for each block, home row then away row.
// N counts Goal/Chance events with both locations present.
BlockPanel build_block_panel(const std::vector<EventRecord>& events,
                             const std::vector<FixtureInfo>& fixtures);

struct ExtractResult {
  std::vector<ChanceObservation> chances;
  std::size_t missing_location = 0;  // chance rows without full location data
  std::size_t cross_team = 0;        // assist credited to an opposition player
};

ExtractResult extract_chances(const std::vector<EventRecord>& events,
                              const std::vector<FixtureInfo>& fixtures);

// Events dated on or before `last_date` (ISO strings compare lexicographically).
std::vector<EventRecord> events_until(const std::vector<EventRecord>& events,
                                      const std::string& last_date);
std::vector<FixtureInfo> fixtures_until(const std::vector<FixtureInfo>& fixtures,
                                        const std::string& last_date);

// Team -> every player appearing in its events as event or assist player.
std::map<std::string, std::vector<std::string>> team_rosters(const std::vector<EventRecord>& events);

void write_panel_csv(std::ostream& out, const BlockPanel& panel);
void write_panel_jsonl(std::ostream& out, const BlockPanel& panel);
void write_chances_csv(std::ostream& out, const std::vector<ChanceObservation>& chances);
void write_chances_jsonl(std::ostream& out, const std::vector<ChanceObservation>& chances);

}  // namespace chance
