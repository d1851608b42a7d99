#include "chance/ingest.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_map>

#include "json.hpp"

#include "chance/csv.h"

namespace chance {

namespace {

const std::vector<std::string> kMandatoryColumns = {
    "fixture", "date", "team", "time", "type", "event_player", "assist_player",
    "assist_x", "assist_y", "chance_x", "chance_y"};

bool is_missing(std::string_view cell) {
  cell = csv::trim(cell);
  return cell.empty() || cell == "---";
}

bool valid_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

struct RowFailure {
  std::string message;
};

std::optional<double> numeric_cell(const std::string& cell, const char* name) {
  if (is_missing(cell)) return std::nullopt;
  auto v = csv::parse_double(cell);
  if (!v) throw RowFailure{std::string("malformed numeric value '") + cell + "' in column " + name};
  return v;
}

std::optional<PitchLocation> location_cells(const std::string& xs, const std::string& ys,
                                            const char* what) {
  auto x = numeric_cell(xs, what);
  auto y = numeric_cell(ys, what);
  if (!x && !y) return std::nullopt;
  if (!x || !y) throw RowFailure{std::string(what) + " location has only one coordinate"};
  PitchLocation loc{*x, *y};
  if (!loc.on_pitch()) {
    throw RowFailure{std::string(what) + " location (" + xs + "," + ys + ") is off the pitch"};
  }
  return loc;
}

std::string optional_text(const std::optional<std::string>& s) { return s ? *s : "---"; }

std::string coordinate_text(const std::optional<PitchLocation>& loc, bool x) {
  if (!loc) return "---";
  return csv::format_double(x ? loc->x : loc->y);
}

using EventsByFixture = std::unordered_map<std::string, std::vector<const EventRecord*>>;

EventsByFixture group_by_fixture(const std::vector<EventRecord>& events) {
  EventsByFixture out;
  for (const auto& e : events) out[e.fixture_id].push_back(&e);
  return out;
}

// Union of the teams named by the metadata and by the fixture's own events
// must be exactly the two metadata teams.
void check_fixture_teams(const std::vector<const EventRecord*>& events,
                         const FixtureInfo& fixture) {
  if (fixture.home_team == fixture.away_team) {
    throw DataIntegrityError("fixture " + fixture.fixture_id + " has identical home and away team");
  }
  std::set<std::string> teams{fixture.home_team, fixture.away_team};
  for (const auto* e : events) {
    if (e->fixture_id != fixture.fixture_id) continue;
    teams.insert(e->team_id);
  }
  if (teams.size() != 2) {
    throw DataIntegrityError("fixture " + fixture.fixture_id + " involves " +
                             std::to_string(teams.size()) + " distinct teams");
  }
}

bool counts_before_block(const EventRecord& e, BlockIndex block) {
  return assign_block(e.minute, e.half) < block || e.minute < block.start_minute();
}

int state_at_block_start(const std::vector<const EventRecord*>& events, const FixtureInfo& fixture,
                         const std::string& team_id, BlockIndex block, EventType counted,
                         int own_sign) {
  if (team_id != fixture.home_team && team_id != fixture.away_team) {
    throw DataIntegrityError("team " + team_id + " does not play in fixture " + fixture.fixture_id);
  }
  check_fixture_teams(events, fixture);
  int state = 0;
  for (const auto* e : events) {
    if (e->fixture_id != fixture.fixture_id || e->type != counted) continue;
    if (!counts_before_block(*e, block)) continue;
    state += e->team_id == team_id ? own_sign : -own_sign;
  }
  return state;
}

std::vector<const EventRecord*> pointers(const std::vector<EventRecord>& events) {
  std::vector<const EventRecord*> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(&e);
  return out;
}

std::map<std::string, const FixtureInfo*> fixture_lookup(const std::vector<FixtureInfo>& fixtures) {
  std::map<std::string, const FixtureInfo*> out;
  for (const auto& f : fixtures) {
    if (!out.emplace(f.fixture_id, &f).second) {
      throw DataIntegrityError("duplicate fixture " + f.fixture_id + " in fixture metadata");
    }
  }
  return out;
}

void check_events_known(const std::vector<EventRecord>& events,
                        const std::map<std::string, const FixtureInfo*>& lookup) {
  for (const auto& e : events) {
    auto it = lookup.find(e.fixture_id);
    if (it == lookup.end()) {
      throw DataIntegrityError("event references fixture " + e.fixture_id +
                               " absent from fixture metadata");
    }
    const auto& f = *it->second;
    if (e.team_id != f.home_team && e.team_id != f.away_team) {
      throw DataIntegrityError("event team " + e.team_id + " is not part of fixture " +
                               e.fixture_id);
    }
  }
}

}  // namespace

const char* to_string(EventType type) {
  switch (type) {
    case EventType::Goal: return "Goal";
    case EventType::Chance: return "Chance";
    case EventType::YellowCard: return "YellowCard";
    case EventType::RedCard: return "RedCard";
    case EventType::Other: return "Other";
  }
  return "Other";
}

EventType parse_event_type(std::string_view text) {
  std::string key;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '_' && c != '-') {
      key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (key == "goal") return EventType::Goal;
  if (key == "chance") return EventType::Chance;
  if (key == "yellowcard") return EventType::YellowCard;
  if (key == "redcard") return EventType::RedCard;
  return EventType::Other;
}

std::string EventSchema::source_name(const std::string& canonical) const {
  auto it = columns.find(canonical);
  return it == columns.end() ? canonical : it->second;
}

ParseResult parse_events(std::istream& source, const EventSchema& schema) {
  ParseResult result;
  std::size_t line_number = 0;
  auto header_line = csv::next_line(source, line_number);
  if (!header_line) throw SchemaError("event source has no header row");

  std::unordered_map<std::string, std::size_t> header;
  {
    auto names = csv::split_line(*header_line, schema.delimiter);
    for (std::size_t i = 0; i < names.size(); ++i) {
      header.emplace(std::string(csv::trim(names[i])), i);
    }
  }
  std::unordered_map<std::string, std::size_t> col;
  for (const auto& name : kMandatoryColumns) {
    auto it = header.find(schema.source_name(name));
    if (it == header.end()) {
      throw SchemaError("missing mandatory column '" + schema.source_name(name) + "'");
    }
    col[name] = it->second;
  }
  std::optional<std::size_t> half_col;
  if (auto it = header.find(schema.source_name("half")); it != header.end()) half_col = it->second;

  while (auto line = csv::next_line(source, line_number)) {
    auto cells = csv::split_line(*line, schema.delimiter);
    auto cell = [&](const std::string& name) -> const std::string& {
      static const std::string empty;
      const auto idx = col.at(name);
      return idx < cells.size() ? cells[idx] : empty;
    };
    try {
      EventRecord r;
      r.fixture_id = std::string(csv::trim(cell("fixture")));
      r.team_id = std::string(csv::trim(cell("team")));
      if (r.fixture_id.empty() || r.team_id.empty()) throw RowFailure{"empty fixture or team"};
      r.date = std::string(csv::trim(cell("date")));
      if (!r.date.empty() && !valid_iso_date(r.date)) {
        throw RowFailure{"malformed date '" + r.date + "'"};
      }
      auto minute = numeric_cell(cell("time"), "time");
      if (!minute) throw RowFailure{"missing time"};
      if (*minute < 0.0) throw RowFailure{"negative time"};
      r.minute = *minute;
      if (half_col && *half_col < cells.size() && !is_missing(cells[*half_col])) {
        auto h = csv::parse_integer(cells[*half_col]);
        if (!h || (*h != 1 && *h != 2)) {
          throw RowFailure{"malformed half '" + cells[*half_col] + "'"};
        }
        r.half = *h == 1 ? Half::first : Half::second;
      }
      r.type = parse_event_type(cell("type"));
      r.event_player = std::string(csv::trim(cell("event_player")));
      if (!is_missing(cell("assist_player"))) {
        r.assist_player = std::string(csv::trim(cell("assist_player")));
      }
      r.assist_loc = location_cells(cell("assist_x"), cell("assist_y"), "assist");
      r.chance_loc = location_cells(cell("chance_x"), cell("chance_y"), "chance");
      result.records.push_back(std::move(r));
    } catch (const RowFailure& f) {
      result.errors.push_back({line_number, f.message});
    }
  }
  return result;
}

std::vector<FixtureInfo> parse_fixtures(std::istream& source, char delimiter) {
  std::size_t line_number = 0;
  auto header_line = csv::next_line(source, line_number);
  if (!header_line) throw SchemaError("fixture source has no header row");
  auto names = csv::split_line(*header_line, delimiter);
  auto find = [&](const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (csv::trim(names[i]) == name) return i;
    }
    throw SchemaError("fixture metadata is missing column '" + name + "'");
  };
  const auto fixture = find("fixture");
  const auto date = find("date");
  const auto home = find("home_team");
  const auto away = find("away_team");
  const auto width = std::max({fixture, date, home, away}) + 1;

  std::vector<FixtureInfo> out;
  while (auto line = csv::next_line(source, line_number)) {
    auto cells = csv::split_line(*line, delimiter);
    if (cells.size() < width) {
      throw SchemaError("fixture metadata line " + std::to_string(line_number) + " is short");
    }
    out.push_back({std::string(csv::trim(cells[fixture])), std::string(csv::trim(cells[date])),
                   std::string(csv::trim(cells[home])), std::string(csv::trim(cells[away]))});
  }
  return out;
}

void write_events_csv(std::ostream& out, const std::vector<EventRecord>& events) {
  csv::write_row(out, {"fixture", "date", "team", "time", "half", "type", "event_player",
                       "assist_player", "assist_x", "assist_y", "chance_x", "chance_y"});
  for (const auto& e : events) {
    const char* half = e.half == Half::first ? "1" : e.half == Half::second ? "2" : "";
    csv::write_row(out, {e.fixture_id, e.date, e.team_id, csv::format_double(e.minute), half,
                         to_string(e.type), e.event_player, optional_text(e.assist_player),
                         coordinate_text(e.assist_loc, true), coordinate_text(e.assist_loc, false),
                         coordinate_text(e.chance_loc, true), coordinate_text(e.chance_loc, false)});
  }
}

void write_fixtures_csv(std::ostream& out, const std::vector<FixtureInfo>& fixtures) {
  csv::write_row(out, {"fixture", "date", "home_team", "away_team"});
  for (const auto& f : fixtures) csv::write_row(out, {f.fixture_id, f.date, f.home_team, f.away_team});
}

BlockIndex assign_block(double minute, Half half) {
  if (!(minute >= 0.0)) throw DomainError("minute must be non-negative");
  if (half == Half::first && minute > 45.0) return BlockIndex(3);
  if (half == Half::second && minute > 90.0) return BlockIndex(6);
  const int r = static_cast<int>(std::ceil(minute / kBlockMinutes));
  return BlockIndex(std::clamp(r, 1, kBlockCount));
}

int derive_game_state(const std::vector<EventRecord>& events, const FixtureInfo& fixture,
                      const std::string& team_id, BlockIndex block) {
  return state_at_block_start(pointers(events), fixture, team_id, block, EventType::Goal, +1);
}

int derive_red_card_state(const std::vector<EventRecord>& events, const FixtureInfo& fixture,
                          const std::string& team_id, BlockIndex block) {
  return state_at_block_start(pointers(events), fixture, team_id, block, EventType::RedCard, -1);
}

BlockPanel build_block_panel(const std::vector<EventRecord>& events,
                             const std::vector<FixtureInfo>& fixtures) {
  const auto lookup = fixture_lookup(fixtures);
  check_events_known(events, lookup);
  const auto grouped = group_by_fixture(events);
  static const std::vector<const EventRecord*> kNone;

  BlockPanel panel;
  panel.reserve(fixtures.size() * 2 * kBlockCount);
  for (const auto& f : fixtures) {
    auto it = grouped.find(f.fixture_id);
    const auto& fx_events = it == grouped.end() ? kNone : it->second;
    check_fixture_teams(fx_events, f);

    int counts[2][kBlockCount] = {};
    for (const auto* e : fx_events) {
      if (!is_chance(e->type) || !e->assist_loc || !e->chance_loc) continue;
      const int side = e->team_id == f.home_team ? 0 : 1;
      counts[side][assign_block(e->minute, e->half).offset()] += 1;
    }
    for (int b = 0; b < kBlockCount; ++b) {
      const BlockIndex block = BlockIndex::from_offset(b);
      for (int side = 0; side < 2; ++side) {
        PanelRow row;
        row.fixture_id = f.fixture_id;
        row.team_id = side == 0 ? f.home_team : f.away_team;
        row.opponent_id = side == 0 ? f.away_team : f.home_team;
        row.block = block;
        row.is_home = side == 0;
        row.count = counts[side][b];
        row.game_state =
            state_at_block_start(fx_events, f, row.team_id, block, EventType::Goal, +1);
        row.red_state =
            state_at_block_start(fx_events, f, row.team_id, block, EventType::RedCard, -1);
        panel.push_back(std::move(row));
      }
    }
  }
  return panel;
}

ExtractResult extract_chances(const std::vector<EventRecord>& events,
                              const std::vector<FixtureInfo>& fixtures) {
  const auto lookup = fixture_lookup(fixtures);
  check_events_known(events, lookup);

  // Team of each player within a fixture, from rows where they are the event player.
  std::map<std::pair<std::string, std::string>, std::set<std::string>> player_teams;
  for (const auto& e : events) {
    if (!e.event_player.empty()) player_teams[{e.fixture_id, e.event_player}].insert(e.team_id);
  }

  ExtractResult result;
  for (const auto& e : events) {
    if (!is_chance(e.type)) continue;
    if (!e.has_full_chance_data()) {
      ++result.missing_location;
      continue;
    }
    if (auto it = player_teams.find({e.fixture_id, *e.assist_player}); it != player_teams.end()) {
      const bool other_team = std::any_of(it->second.begin(), it->second.end(),
                                          [&](const std::string& t) { return t != e.team_id; });
      if (other_team) {
        ++result.cross_team;
        continue;
      }
    }
    ChanceObservation obs;
    obs.fixture_id = e.fixture_id;
    obs.team_id = e.team_id;
    obs.block = assign_block(e.minute, e.half);
    obs.assist_player = {*e.assist_player, e.team_id};
    obs.chance_player = {e.event_player, e.team_id};
    obs.assist_loc = *e.assist_loc;
    obs.delta = {e.chance_loc->x - e.assist_loc->x, e.chance_loc->y - e.assist_loc->y};
    result.chances.push_back(std::move(obs));
  }
  return result;
}

std::vector<EventRecord> events_until(const std::vector<EventRecord>& events,
                                      const std::string& last_date) {
  std::vector<EventRecord> out;
  std::copy_if(events.begin(), events.end(), std::back_inserter(out),
               [&](const EventRecord& e) { return e.date <= last_date; });
  return out;
}

std::vector<FixtureInfo> fixtures_until(const std::vector<FixtureInfo>& fixtures,
                                        const std::string& last_date) {
  std::vector<FixtureInfo> out;
  std::copy_if(fixtures.begin(), fixtures.end(), std::back_inserter(out),
               [&](const FixtureInfo& f) { return f.date <= last_date; });
  return out;
}

void write_panel_csv(std::ostream& out, const BlockPanel& panel) {
  csv::write_row(out, {"fixture", "team", "opponent", "block", "is_home", "N", "G", "R"});
  for (const auto& r : panel) {
    csv::write_row(out, {r.fixture_id, r.team_id, r.opponent_id, std::to_string(r.block.number()),
                         r.is_home ? "1" : "0", std::to_string(r.count),
                         std::to_string(r.game_state), std::to_string(r.red_state)});
  }
}

void write_panel_jsonl(std::ostream& out, const BlockPanel& panel) {
  for (const auto& r : panel) {
    nlohmann::ordered_json j;
    j["fixture"] = r.fixture_id;
    j["team"] = r.team_id;
    j["opponent"] = r.opponent_id;
    j["block"] = r.block.number();
    j["is_home"] = r.is_home;
    j["N"] = r.count;
    j["G"] = r.game_state;
    j["R"] = r.red_state;
    out << j.dump() << '\n';
  }
}

void write_chances_csv(std::ostream& out, const std::vector<ChanceObservation>& chances) {
  csv::write_row(out, {"fixture", "team", "block", "assist_player", "chance_player", "assist_x",
                       "assist_y", "delta_x", "delta_y"});
  for (const auto& c : chances) {
    csv::write_row(out, {c.fixture_id, c.team_id, std::to_string(c.block.number()),
                         c.assist_player.player_id, c.chance_player.player_id,
                         csv::format_double(c.assist_loc.x), csv::format_double(c.assist_loc.y),
                         csv::format_double(c.delta.dx), csv::format_double(c.delta.dy)});
  }
}

void write_chances_jsonl(std::ostream& out, const std::vector<ChanceObservation>& chances) {
  for (const auto& c : chances) {
    nlohmann::ordered_json j;
    j["fixture"] = c.fixture_id;
    j["team"] = c.team_id;
    j["block"] = c.block.number();
    j["assist_player"] = c.assist_player.player_id;
    j["chance_player"] = c.chance_player.player_id;
    j["assist_x"] = c.assist_loc.x;
    j["assist_y"] = c.assist_loc.y;
    j["delta_x"] = c.delta.dx;
    j["delta_y"] = c.delta.dy;
    out << j.dump() << '\n';
  }
}

std::map<std::string, std::vector<std::string>> team_rosters(const std::vector<EventRecord>& events) {
  // (fixture, player) -> team the player acted for, to skip cross-team assists
  std::map<std::pair<std::string, std::string>, std::set<std::string>> acted_for;
  for (const auto& e : events) {
    if (!e.event_player.empty()) acted_for[{e.fixture_id, e.event_player}].insert(e.team_id);
  }
  std::map<std::string, std::vector<std::string>> rosters;
  for (const auto& e : events) {
    auto& roster = rosters[e.team_id];
    if (!e.event_player.empty()) roster.push_back(e.event_player);
    if (!e.assist_player || e.assist_player->empty()) continue;
    auto it = acted_for.find({e.fixture_id, *e.assist_player});
    const bool other_team =
        it != acted_for.end() && !it->second.contains(e.team_id) && !it->second.empty();
    if (!other_team) roster.push_back(*e.assist_player);
  }
  for (auto& [team, roster] : rosters) {
    std::sort(roster.begin(), roster.end());
    roster.erase(std::unique(roster.begin(), roster.end()), roster.end());
  }
  return rosters;
}

}  // namespace chance
