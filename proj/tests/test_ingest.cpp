#include <sstream>

#include "doctest.h"

#include "chance/ingest.h"

using namespace chance;

namespace {

const char* kTable1 =
    "fixture,date,team,time,type,event_player,assist_player,assist_x,assist_y,chance_x,chance_y\n"
    "2241765,2016-08-13,725,82.35,Yellow card,94174,---,---,---,---,---\n"
    "2241765,2016-08-13,725,81.38,Chance,38569,38569,-108,21,-98,34\n"
    "2241765,2016-08-13,682,75.65,Chance,5724,11180,136,41,26,45\n"
    "2241765,2016-08-13,682,72.48,Chance,156662,159732,47,76,48,39\n";

std::vector<FixtureInfo> table1_fixture() { return {{"2241765", "2016-08-13", "682", "725"}}; }

std::vector<EventRecord> parse(const std::string& text, const EventSchema& schema = {}) {
  std::istringstream in(text);
  auto r = parse_events(in, schema);
  REQUIRE(r.errors.empty());
  return r.records;
}

EventRecord event(const std::string& team, double minute, EventType type, Half half = Half::unknown) {
  EventRecord e;
  e.fixture_id = "F1";
  e.date = "2020-01-01";
  e.team_id = team;
  e.minute = minute;
  e.half = half;
  e.type = type;
  e.event_player = team + "p";
  return e;
}

const FixtureInfo kHomeAway{"F1", "2020-01-01", "H", "A"};

}  // namespace

TEST_CASE("sample event rows parse") {
  const auto rows = parse(kTable1);
  REQUIRE(rows.size() == 4);

  CHECK(rows[0].type == EventType::YellowCard);
  CHECK_FALSE(rows[0].assist_player);
  CHECK_FALSE(rows[0].assist_loc);
  CHECK_FALSE(rows[0].chance_loc);

  const auto& self = rows[1];
  CHECK(self.team_id == "725");
  CHECK(self.minute == doctest::Approx(81.38));
  CHECK(self.type == EventType::Chance);
  CHECK(self.event_player == "38569");
  CHECK(*self.assist_player == "38569");
  CHECK(*self.assist_loc == PitchLocation{-108, 21});
  CHECK(*self.chance_loc == PitchLocation{-98, 34});
  CHECK(self.half == Half::unknown);
}

TEST_CASE("empty input after header") {
  CHECK(parse("fixture,date,team,time,type,event_player,assist_player,assist_x,assist_y,chance_x,chance_y\n")
            .empty());
}

TEST_CASE("malformed numbers are row errors, missing columns are fatal") {
  std::istringstream bad(
      "fixture,date,team,time,type,event_player,assist_player,assist_x,assist_y,chance_x,chance_y\n"
      "F,2020-01-01,A,abc,Chance,p,q,1,2,3,4\n"
      "F,2020-01-01,A,10,Chance,p,q,1,2,3,4\n"
      "F,2020-01-01,A,11,Chance,p,q,1,x,3,4\n");
  const auto r = parse_events(bad);
  CHECK(r.records.size() == 1);
  REQUIRE(r.errors.size() == 2);
  CHECK(r.errors[0].line == 2);
  CHECK(r.errors[1].line == 4);

  std::istringstream missing("fixture,date,team,type\nF,2020-01-01,A,Chance\n");
  CHECK_THROWS_AS(parse_events(missing), SchemaError);
}

TEST_CASE("unknown event types become Other; schema renames columns") {
  EventSchema schema;
  schema.columns["type"] = "event";
  schema.columns["time"] = "minute";
  schema.delimiter = ';';
  const auto rows = parse(
      "fixture;date;team;minute;event;event_player;assist_player;assist_x;assist_y;chance_x;chance_y\n"
      "F;2020-01-01;A;3;Corner;p;;;;;\n",
      schema);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].type == EventType::Other);
  CHECK(rows[0].minute == 3.0);
}

TEST_CASE("assign_block") {
  CHECK(assign_block(81.38, Half::second).number() == 6);
  CHECK(assign_block(46.5, Half::first).number() == 3);
  CHECK(assign_block(15.0, Half::first).number() == 1);
  CHECK(assign_block(15.0, Half::unknown).number() == 1);
  CHECK(assign_block(0.0, Half::unknown).number() == 1);
  CHECK(assign_block(15.0001, Half::unknown).number() == 2);
  CHECK(assign_block(93.0, Half::second).number() == 6);
  CHECK(assign_block(93.0, Half::unknown).number() == 6);
  CHECK(assign_block(45.0, Half::first).number() == 3);
  CHECK_THROWS_AS(assign_block(-0.5, Half::unknown), DomainError);
}

TEST_CASE("assign_block is monotone within a half") {
  for (Half h : {Half::first, Half::second, Half::unknown}) {
    int last = 1;
    for (double m = 0.0; m <= 100.0; m += 0.25) {
      const int b = assign_block(m, h).number();
      CHECK(b >= last);
      last = b;
    }
  }
}

TEST_CASE("game state") {
  SUBCASE("home scored once in t2, query t3") {
    const std::vector<EventRecord> ev{event("H", 20, EventType::Goal)};
    CHECK(derive_game_state(ev, kHomeAway, "H", BlockIndex(3)) == 1);
    CHECK(derive_game_state(ev, kHomeAway, "A", BlockIndex(3)) == -1);
    CHECK(derive_game_state(ev, kHomeAway, "H", BlockIndex(2)) == 0);
  }
  SUBCASE("no goals") {
    for (int b = 1; b <= 6; ++b) CHECK(derive_game_state({}, kHomeAway, "H", BlockIndex(b)) == 0);
  }
  SUBCASE("home in t1, away twice in t2, query t4") {
    const std::vector<EventRecord> ev{event("H", 5, EventType::Goal), event("A", 17, EventType::Goal),
                                      event("A", 29, EventType::Goal)};
    CHECK(derive_game_state(ev, kHomeAway, "H", BlockIndex(4)) == -1);
  }
  SUBCASE("stoppage goals in t3 count only for later blocks") {
    const std::vector<EventRecord> ev{event("H", 47, EventType::Goal, Half::first)};
    CHECK(derive_game_state(ev, kHomeAway, "H", BlockIndex(3)) == 0);
    CHECK(derive_game_state(ev, kHomeAway, "H", BlockIndex(4)) == 1);
  }
  SUBCASE("a third team is a data integrity error") {
    const std::vector<EventRecord> ev{event("X", 5, EventType::Goal)};
    CHECK_THROWS_AS(derive_game_state(ev, kHomeAway, "H", BlockIndex(2)), DataIntegrityError);
  }
}

TEST_CASE("red card state") {
  const std::vector<EventRecord> one{event("A", 20, EventType::RedCard)};
  CHECK(derive_red_card_state(one, kHomeAway, "H", BlockIndex(4)) == 1);
  CHECK(derive_red_card_state(one, kHomeAway, "A", BlockIndex(4)) == -1);
  CHECK(derive_red_card_state({}, kHomeAway, "H", BlockIndex(4)) == 0);
  const std::vector<EventRecord> each{event("A", 20, EventType::RedCard), event("H", 50, EventType::RedCard)};
  CHECK(derive_red_card_state(each, kHomeAway, "H", BlockIndex(5)) == 0);
}

TEST_CASE("block panel from the sample events") {
  const auto ev = parse(kTable1);
  const auto panel = build_block_panel(ev, table1_fixture());
  REQUIRE(panel.size() == 12);
  int total = 0;
  for (const auto& row : panel) {
    int expected = 0;
    if (row.team_id == "682" && (row.block.number() == 5 || row.block.number() == 6)) expected = 1;
    if (row.team_id == "725" && row.block.number() == 6) expected = 1;
    CHECK(row.count == expected);
    CHECK(row.is_home == (row.team_id == "682"));
    total += row.count;
  }
  CHECK(total == 3);
}

TEST_CASE("panel shape and invariants") {
  SUBCASE("a fixture with no chances") {
    const auto panel = build_block_panel({}, {kHomeAway});
    REQUIRE(panel.size() == 12);
    for (const auto& r : panel) CHECK(r.count == 0);
  }
  SUBCASE("G and R are antisymmetric, N matches located chances") {
    std::vector<EventRecord> ev{event("H", 5, EventType::Goal), event("A", 33, EventType::RedCard),
                                event("A", 61, EventType::Goal), event("A", 62, EventType::Chance)};
    for (auto& e : ev) {
      if (is_chance(e.type)) {
        e.assist_player = e.event_player;
        e.assist_loc = PitchLocation{1, 2};
        e.chance_loc = PitchLocation{3, 4};
      }
    }
    auto unlocated = event("H", 70, EventType::Chance);
    ev.push_back(unlocated);
    const auto panel = build_block_panel(ev, {kHomeAway});
    int total = 0;
    for (std::size_t i = 0; i < panel.size(); i += 2) {
      CHECK(panel[i].block == panel[i + 1].block);
      CHECK(panel[i].game_state + panel[i + 1].game_state == 0);
      CHECK(panel[i].red_state + panel[i + 1].red_state == 0);
      total += panel[i].count + panel[i + 1].count;
    }
    CHECK(total == 3);
  }
  SUBCASE("an event for a team outside the fixture") {
    CHECK_THROWS_AS(build_block_panel({event("X", 5, EventType::Chance)}, {kHomeAway}), DataIntegrityError);
  }
}

TEST_CASE("extract chances") {
  const auto ev = parse(kTable1);
  const auto r = extract_chances(ev, table1_fixture());
  REQUIRE(r.chances.size() == 3);
  CHECK(r.missing_location == 0);
  for (const auto& c : r.chances) {
    if (c.assist_loc == PitchLocation{136, 41}) {
      CHECK(c.delta == DeltaLocation{-110, 4});
    } else if (c.assist_loc == PitchLocation{47, 76}) {
      CHECK(c.delta == DeltaLocation{1, -37});
    } else {
      CHECK(c.assist_player == c.chance_player);
    }
    CHECK(c.assist_player.team_id == c.team_id);
  }
  for (std::size_t i = 0; i < r.chances.size(); ++i) {
    CHECK(r.chances[i].chance_loc() == *ev[i + 1].chance_loc);
  }

  auto same = ev;
  same[2].chance_loc = same[2].assist_loc;
  const auto r2 = extract_chances(same, table1_fixture());
  CHECK(r2.chances[1].delta == DeltaLocation{0, 0});
}

TEST_CASE("chances missing a location are counted and skipped") {
  auto ev = parse(kTable1);
  ev[3].chance_loc.reset();
  const auto r = extract_chances(ev, table1_fixture());
  CHECK(r.chances.size() == 2);
  CHECK(r.missing_location == 1);
}

TEST_CASE("events round-trip through the canonical CSV") {
  auto ev = parse(kTable1);
  ev[1].half = Half::second;
  ev[2].minute = 0.1 + 0.2;
  std::ostringstream out;
  write_events_csv(out, ev);
  CHECK(parse(out.str()) == ev);
}

TEST_CASE("cut-off date") {
  auto ev = parse(kTable1);
  ev[3].date = "2016-09-01";
  CHECK(events_until(ev, "2016-08-31").size() == 3);
  CHECK(events_until(ev, "2016-09-01").size() == 4);
}
