// chance: fit, simulate, calibrate and report on the chance-creation model.
//
// Exit codes: 0 success, 2 input or schema error, 3 numeric or inference error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "chance/analytics.h"
#include "chance/csv.h"
#include "chance/diagnostics.h"
#include "chance/draws_io.h"
#include "chance/errors.h"
#include "chance/geometry.h"
#include "chance/ingest.h"
#include "chance/inference.h"
#include "chance/log.h"
#include "chance/sbc.h"
#include "chance/simulate.h"
#include "chance/svg.h"

namespace {

using namespace chance;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string draws;
  std::string out;
  std::string format = "csv";
  std::optional<std::size_t> workers;
};

// Writes to --out, or stdout when it is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw SchemaError("cannot open " + path + " for writing");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::ifstream open_input(const std::string& path, const char* what) {
  if (path.empty()) throw SchemaError(std::string("missing ") + what + " path");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(std::string("cannot open ") + what + " file " + path);
  return in;
}

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty()) return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

FitConfig load_config(const Globals& g) {
  FitConfig c;
  if (!g.config.empty()) {
    auto in = open_input(g.config, "config");
    c = read_config(in);
  }
  if (g.seed) c.sampler.seed = *g.seed;
  if (g.workers) c.sampler.workers = *g.workers;
  return c;
}

PosteriorDraws load_draws(const Globals& g) {
  auto in = open_input(g.draws, "draws");
  return read_draws_jsonl(in);
}

EventSchema load_schema(const std::string& path) {
  EventSchema schema;
  if (path.empty()) return schema;
  auto in = open_input(path, "schema");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    if (j.contains("columns")) schema.columns = j.at("columns").get<std::map<std::string, std::string>>();
    if (j.contains("delimiter")) {
      const auto d = j.at("delimiter").get<std::string>();
      if (d.size() != 1) throw SchemaError("delimiter must be a single character");
      schema.delimiter = d[0];
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("invalid schema file: ") + e.what());
  }
  return schema;
}

struct InputData {
  std::vector<EventRecord> events;
  std::vector<FixtureInfo> fixtures;
  BlockPanel panel;
  std::vector<ChanceObservation> chances;
};

struct InputOptions {
  std::string events;
  std::string fixtures;
  std::string schema;
  std::string until;
};

void add_input_options(CLI::App* cmd, InputOptions& o) {
  cmd->add_option("--events", o.events, "event CSV")->required();
  cmd->add_option("--fixtures", o.fixtures, "fixture CSV: fixture,date,home_team,away_team")->required();
  cmd->add_option("--schema", o.schema, "JSON column mapping {\"columns\":{...},\"delimiter\":\",\"}");
  cmd->add_option("--until", o.until, "only use data dated on or before YYYY-MM-DD");
}

InputData load_input(const InputOptions& o) {
  InputData d;
  const auto schema = load_schema(o.schema);
  {
    auto in = open_input(o.events, "events");
    auto parsed = parse_events(in, schema);
    if (!parsed.errors.empty()) {
      warn(std::to_string(parsed.errors.size()) + " event rows skipped; first: line " +
           std::to_string(parsed.errors.front().line) + ": " + parsed.errors.front().message);
    }
    d.events = std::move(parsed.records);
  }
  {
    auto in = open_input(o.fixtures, "fixtures");
    d.fixtures = parse_fixtures(in, schema.delimiter);
  }
  if (!o.until.empty()) {
    d.events = events_until(d.events, o.until);
    d.fixtures = fixtures_until(d.fixtures, o.until);
  }
  d.panel = build_block_panel(d.events, d.fixtures);
  auto extracted = extract_chances(d.events, d.fixtures);
  if (extracted.missing_location) {
    warn(std::to_string(extracted.missing_location) + " chance events lack location data and were skipped");
  }
  if (extracted.cross_team) {
    warn(std::to_string(extracted.cross_team) + " chances credited to an opposition assister were skipped");
  }
  d.chances = std::move(extracted.chances);
  return d;
}

void check_format(const std::string& format, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (format == a) return;
  }
  throw SchemaError("format '" + format + "' is not supported here");
}

void emit_table(const Globals& g, const ReportTable& table) {
  check_format(g.format, {"csv", "jsonl"});
  Output out(g.out);
  if (g.format == "csv") {
    write_table_csv(out.stream(), table);
  } else {
    write_table_jsonl(out.stream(), table);
  }
}

Space parse_space(const std::string& s) {
  if (s == "assist") return Space::assist;
  if (s == "delta") return Space::delta;
  throw SchemaError("space must be 'assist' or 'delta'");
}

std::vector<double> parse_numbers(const std::string& text, std::size_t expected, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    auto v = csv::parse_double(cell);
    if (!v) throw SchemaError(std::string("malformed ") + what + ": " + text);
    out.push_back(*v);
  }
  if (out.size() != expected) throw SchemaError(std::string(what) + " needs " + std::to_string(expected) + " numbers");
  return out;
}

Rect parse_rect(const std::string& text) {
  const auto v = parse_numbers(text, 4, "rectangle x_min,x_max,y_min,y_max");
  return {v[0], v[1], v[2], v[3]};
}

void write_surface(const Globals& g, const SurfaceGrid& s, const std::string& title) {
  check_format(g.format, {"csv", "jsonl", "svg"});
  Output out(g.out);
  auto& os = out.stream();
  if (g.format == "svg") {
    SvgStyle style;
    style.title = title;
    style.pitch = s.bounds.y_min >= 0.0;
    os << surface_svg(s, style);
    return;
  }
  if (g.format == "csv") csv::write_row(os, {"x", "y", "density"});
  for (std::size_t j = 0; j < s.ny; ++j) {
    for (std::size_t i = 0; i < s.nx; ++i) {
      const auto c = s.cell_centre(i, j);
      if (g.format == "csv") {
        csv::write_row(os, {csv::format_double(c.x()), csv::format_double(c.y()), csv::format_double(s.at(i, j))});
      } else {
        nlohmann::ordered_json rec{{"x", c.x()}, {"y", c.y()}, {"density", s.at(i, j)}};
        os << rec.dump() << '\n';
      }
    }
  }
}

struct PlayerQuery {
  std::string team;
  std::string player;
  int block = 1;
  std::string space = "assist";
};

int run(int argc, char** argv) {
  CLI::App app{"Bayesian model of chance creation: fit, simulate, calibrate and report"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON configuration file");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--draws", g.draws, "posterior draws file (JSONL)");
  app.add_option("--out", g.out, "output path (stdout if omitted)");
  app.add_option("--format", g.format, "csv, jsonl or svg")->check(CLI::IsMember({"csv", "jsonl", "svg"}));
  app.add_option("--workers", g.workers, "worker threads");
  bool quiet = false;
  app.add_flag("--quiet", quiet, "suppress warnings");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "derive the block panel and chance table");
  InputOptions ingest_in;
  add_input_options(ingest, ingest_in);
  ingest->callback([&] {
    check_format(g.format, {"csv", "jsonl"});
    const auto data = load_input(ingest_in);
    const std::string ext = g.format == "csv" ? ".csv" : ".jsonl";
    {
      Output out(join_path(g.out, "panel" + ext));
      if (g.format == "csv") write_panel_csv(out.stream(), data.panel);
      else write_panel_jsonl(out.stream(), data.panel);
    }
    Output out(join_path(g.out, "chances" + ext));
    if (g.format == "csv") write_chances_csv(out.stream(), data.chances);
    else write_chances_jsonl(out.stream(), data.chances);
  });

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "run the MCMC sampler");
  InputOptions fit_in;
  add_input_options(fit_cmd, fit_in);
  std::string centroids_in, centroids_out, trace_out, diagnostics_out;
  fit_cmd->add_option("--centroids", centroids_in, "reuse centroids from a CSV file");
  fit_cmd->add_option("--centroids-out", centroids_out, "write the centroids used");
  fit_cmd->add_option("--trace", trace_out, "write a trace CSV");
  fit_cmd->add_option("--diagnostics", diagnostics_out, "write a diagnostics CSV");
  fit_cmd->callback([&] {
    const auto config = load_config(g);
    const auto input = load_input(fit_in);
    std::optional<Centroids> assist, delta;
    if (!centroids_in.empty()) {
      auto in = open_input(centroids_in, "centroids");
      assist = read_centroids_csv(in, Space::assist);
      in.clear();
      in.seekg(0);
      delta = read_centroids_csv(in, Space::delta);
    }
    const auto data =
        prepare_data(input.panel, input.chances, team_rosters(input.events), config.mixture, assist, delta);
    const auto draws = fit(data, config);
    {
      if (g.out.empty()) throw SchemaError("fit needs --out for the draws file");
      Output out(g.out);
      write_draws_jsonl(out.stream(), draws);
    }
    if (!centroids_out.empty()) {
      Output out(centroids_out);
      write_centroids_csv(out.stream(), data.assist_centroids);
      std::ostringstream rest;
      write_centroids_csv(rest, data.delta_centroids);
      const auto text = rest.str();
      out.stream() << text.substr(text.find('\n') + 1);
    }
    if (!trace_out.empty()) {
      Output out(trace_out);
      write_trace_csv(out.stream(), draws);
    }
    const auto diag = diagnostics(draws);
    if (!diagnostics_out.empty()) {
      Output out(diagnostics_out);
      write_diagnostics_csv(out.stream(), diag);
    }
    for (const auto& grp : diag.groups) {
      std::fprintf(stderr, "%-6s acceptance %.3f  min ESS %.1f  max MCSE %.4g\n", grp.group.c_str(),
                   grp.acceptance, grp.min_ess, grp.max_mcse);
    }
  });

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic season");
  std::size_t sim_teams = 20, sim_fixtures = 380, sim_roster = 11;
  std::string dynamics = "fixed";
  double conversion = 0.1, red_rate = 0.0;
  std::size_t draw_index = 0;
  int max_lead = 0;
  sim_cmd->add_option("--teams", sim_teams, "number of teams");
  sim_cmd->add_option("--fixtures", sim_fixtures, "number of fixtures");
  sim_cmd->add_option("--roster", sim_roster, "players per team");
  sim_cmd->add_option("--dynamics", dynamics, "fixed or goal-coupled")
      ->check(CLI::IsMember({"fixed", "goal-coupled"}));
  sim_cmd->add_option("--conversion", conversion, "probability a chance is scored (goal-coupled)");
  sim_cmd->add_option("--red-card-rate", red_rate, "per team-block red card probability (goal-coupled)");
  sim_cmd->add_option("--max-lead", max_lead, "stop converting chances for a side this many goals ahead (0: off)");
  sim_cmd->add_option("--draw-index", draw_index, "with --draws: simulate from this stored draw");
  sim_cmd->callback([&] {
    const std::uint64_t seed = g.seed.value_or(1);
    SimConfig sim;
    sim.seed = seed;
    sim.dynamics = dynamics == "fixed" ? StateDynamics::fixed : StateDynamics::goal_coupled;
    sim.conversion = conversion;
    sim.red_card_rate = red_rate;
    sim.max_lead = max_lead;
    if (!g.draws.empty()) {
      const auto draws = load_draws(g);
      if (draw_index >= draws.size()) throw LookupError("draw index out of range");
      const auto& d = draws.draws[draw_index];
      sim.index = draws.index;
      sim.params = {d.rate, d.players, d.assist, d.delta};
      sim.assist_centroids = draws.assist_centroids;
      sim.delta_centroids = draws.delta_centroids;
    } else {
      sim.index = synthetic_index(sim_teams, sim_roster, kDefaultComponents);
      StreamRng rng(derive_seed(seed, 99));
      sim.params = planted_state(sim.index, PlantedSpec{}, rng);
      sim.assist_centroids = pitch_centroids(Space::assist);
      sim.delta_centroids = pitch_centroids(Space::delta);
    }
    sim.fixtures = round_robin_fixtures(sim.index.teams(), sim_fixtures);
    const auto season = simulate_season(sim);
    {
      Output out(join_path(g.out, "events.csv"));
      write_events_csv(out.stream(), season.events);
    }
    {
      Output out(join_path(g.out, "fixtures.csv"));
      write_fixtures_csv(out.stream(), season.fixtures);
    }
    {
      Output out(join_path(g.out, "truth.json"));
      write_truth_json(out.stream(), sim.index, season.truth);
    }
    Output out(join_path(g.out, "centroids.csv"));
    write_centroids_csv(out.stream(), sim.assist_centroids);
    std::ostringstream rest;
    write_centroids_csv(rest, sim.delta_centroids);
    const auto text = rest.str();
    out.stream() << text.substr(text.find('\n') + 1);
  });

  // sbc
  auto* sbc_cmd = app.add_subcommand("sbc", "simulation-based calibration at toy scale");
  SbcSpec spec;
  bool negative_control = false;
  sbc_cmd->add_option("--replicates", spec.replicates, "number of replicates");
  sbc_cmd->add_option("--teams", spec.teams, "teams per replicate");
  sbc_cmd->add_option("--fixtures", spec.fixtures, "fixtures per replicate");
  sbc_cmd->add_option("--roster", spec.roster, "players per team");
  sbc_cmd->add_option("--bins", spec.bins, "histogram bins");
  sbc_cmd->add_flag("--null", spec.null_harness, "exact prior sampler without data");
  sbc_cmd->add_flag("--negative-control", negative_control, "fit with every rate doubled");
  sbc_cmd->callback([&] {
    if (!g.config.empty()) {
      auto in = open_input(g.config, "config");
      spec.fit = read_config(in);
    }
    spec.seed = g.seed.value_or(1);
    spec.workers = g.workers.value_or(1);
    if (negative_control) spec.fit.sampler.rate_scale = 2.0;
    const auto result = sbc_run(spec);
    {
      Output out(join_path(g.out, "sbc_ranks.csv"));
      write_sbc_ranks_csv(out.stream(), result);
    }
    Output out(join_path(g.out, "sbc_summary.csv"));
    write_sbc_summary_csv(out.stream(), result);
    for (const auto& t : result.tests) {
      std::fprintf(stderr, "%-28s chi2 %8.2f  p %.4f  %s\n", t.name.c_str(), t.chi_squared, t.p_value,
                   t.p_value < 0.01 ? "REJECTED" : "ok");
    }
    if (result.failed(spec.replicates)) {
      throw InferenceError(std::to_string(result.failures) + " of " + std::to_string(spec.replicates) +
                           " replicates failed");
    }
  });

  // report
  auto* report = app.add_subcommand("report", "posterior summaries");
  report->require_subcommand(1);
  auto* abilities = report->add_subcommand("team-abilities", "posterior mean theta by team and block");
  abilities->callback([&] { emit_table(g, team_ability_table(load_draws(g))); });
  auto* home = report->add_subcommand("home-effect", "home effect by block with 95% intervals");
  home->callback([&] { emit_table(g, home_effect_summary(load_draws(g))); });

  PlayerQuery pq;
  auto add_player = [&](CLI::App* cmd, bool need_block) {
    cmd->add_option("--team", pq.team, "team id")->required();
    cmd->add_option("--player", pq.player, "player id")->required();
    cmd->add_option("--space", pq.space, "assist or delta")->check(CLI::IsMember({"assist", "delta"}));
    if (need_block) cmd->add_option("--block", pq.block, "block 1..6")->check(CLI::Range(1, 6));
  };
  auto* radar = report->add_subcommand("radar", "mean mixture weights per block for one player");
  add_player(radar, false);
  radar->callback([&] {
    const auto table = radar_weights(load_draws(g), {pq.player, pq.team}, parse_space(pq.space));
    if (g.format == "svg") {
      Output out(g.out);
      SvgStyle style;
      style.title = table.title;
      out.stream() << radar_svg(table, style);
      return;
    }
    emit_table(g, table);
  });

  auto* surface = report->add_subcommand("surface", "posterior mean location density on a grid");
  add_player(surface, true);
  std::string bounds_text;
  std::size_t nx = 0, ny = 0;
  surface->add_option("--bounds", bounds_text, "x_min,x_max,y_min,y_max (default: standard grid)");
  surface->add_option("--nx", nx, "cells across");
  surface->add_option("--ny", ny, "cells along");
  surface->callback([&] {
    const auto draws = load_draws(g);
    const Space space = parse_space(pq.space);
    GridSpec grid = standard_grid(draws, space);
    if (!bounds_text.empty()) grid.bounds = parse_rect(bounds_text);
    if (nx) grid.nx = nx;
    if (ny) grid.ny = ny;
    const auto s = density_surface(draws, {pq.player, pq.team}, BlockIndex(pq.block), space, grid);
    write_surface(g, s, pq.player + " " + pq.space + " t" + std::to_string(pq.block));
  });

  auto* involvement = report->add_subcommand("involvement", "probability each player is involved");
  std::string inv_team, role = "assist", point_text, rect_text;
  int inv_block = 1;
  std::size_t resolution = 50;
  involvement->add_option("--team", inv_team, "team id")->required();
  involvement->add_option("--block", inv_block, "block 1..6")->check(CLI::Range(1, 6));
  involvement->add_option("--role", role, "assist or chance")->check(CLI::IsMember({"assist", "chance"}));
  involvement->add_option("--point", point_text, "x,y");
  involvement->add_option("--rect", rect_text, "x_min,x_max,y_min,y_max");
  involvement->add_option("--resolution", resolution, "grid cells per side for --rect");
  involvement->callback([&] {
    Region region;
    if (!point_text.empty() == !rect_text.empty()) throw SchemaError("give exactly one of --point or --rect");
    if (!point_text.empty()) {
      const auto v = parse_numbers(point_text, 2, "point x,y");
      region = PointQuery{{v[0], v[1]}};
    } else {
      region = RectQuery{parse_rect(rect_text), resolution};
    }
    emit_table(g, involvement_probability(load_draws(g), inv_team, BlockIndex(inv_block), region,
                                          role == "assist" ? Role::assist : Role::chance));
  });

  auto* predictive = report->add_subcommand("predictive", "posterior predictive chance count");
  FixtureScenario scenario;
  int pred_block = 1;
  predictive->add_option("--team", scenario.team, "team id")->required();
  predictive->add_option("--opponent", scenario.opponent, "opponent id")->required();
  predictive->add_option("--block", pred_block, "block 1..6")->check(CLI::Range(1, 6));
  predictive->add_flag("--home", scenario.is_home, "team plays at home");
  predictive->add_option("--game-state", scenario.game_state, "goal difference at block start");
  predictive->add_option("--red-state", scenario.red_state, "player difference at block start");
  predictive->callback([&] {
    const auto s = posterior_predictive_counts(load_draws(g), scenario, BlockIndex(pred_block));
    ReportTable t;
    t.title = "posterior predictive chances";
    t.row_header = "count";
    t.columns = {"probability"};
    for (std::size_t k = 0; k < s.pmf.size(); ++k) {
      t.rows.push_back(std::to_string(k));
      t.values.push_back({s.pmf[k]});
    }
    std::fprintf(stderr, "mean %.4f  sd %.4f  mode %zu  95%% [%g, %g]\n", s.mean, s.sd, s.mode, s.q025, s.q975);
    emit_table(g, t);
  });

  auto* diag_cmd = report->add_subcommand("diagnostics", "chain summaries of the rate parameters");
  diag_cmd->callback([&] {
    Output out(g.out);
    write_diagnostics_csv(out.stream(), diagnostics(load_draws(g)));
  });
  auto* trace_cmd = report->add_subcommand("trace", "trace of the rate parameters");
  trace_cmd->callback([&] {
    Output out(g.out);
    write_trace_csv(out.stream(), load_draws(g));
  });

  // render
  auto* render = app.add_subcommand("render", "drawings");
  render->require_subcommand(1);
  auto* svg = render->add_subcommand("svg", "standalone SVG");
  std::string kind = "pitch", title;
  svg->add_option("--kind", kind, "pitch, voronoi, surface or radar")
      ->check(CLI::IsMember({"pitch", "voronoi", "surface", "radar"}));
  svg->add_option("--title", title, "title text");
  svg->add_option("--team", pq.team, "team id (surface, radar, weighted voronoi)");
  svg->add_option("--player", pq.player, "player id (surface, radar, weighted voronoi)");
  svg->add_option("--space", pq.space, "assist or delta")->check(CLI::IsMember({"assist", "delta"}));
  svg->add_option("--block", pq.block, "block 1..6")->check(CLI::Range(1, 6));
  svg->callback([&] {
    SvgStyle style;
    style.title = title;
    Output out(g.out);
    if (kind == "pitch") {
      out.stream() << pitch_svg(style);
      return;
    }
    const auto draws = load_draws(g);
    const Space space = parse_space(pq.space);
    style.pitch = space == Space::assist;
    if (kind == "voronoi") {
      const auto& c = space == Space::assist ? draws.assist_centroids : draws.delta_centroids;
      const Rect bounds = space_bounds(space);
      std::vector<double> weights;
      if (!pq.player.empty()) {
        const auto table = radar_weights(draws, {pq.player, pq.team}, space);
        weights = table.values.at(pq.block - 1);
      }
      out.stream() << voronoi_svg(voronoi_cells(c, bounds), c, bounds, weights, style);
    } else if (kind == "surface") {
      GridSpec grid{space_bounds(space), 100, 100};
      if (space == Space::assist) grid = {pitch_bounds(), 136, 210};
      const auto s = density_surface(draws, {pq.player, pq.team}, BlockIndex(pq.block), space, grid);
      out.stream() << surface_svg(s, style);
    } else {
      out.stream() << radar_svg(radar_weights(draws, {pq.player, pq.team}, space), style);
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  (void)quiet;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--quiet") chance::set_warnings_enabled(false);
  }
  try {
    return run(argc, argv);
  } catch (const chance::SchemaError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const chance::DataIntegrityError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const chance::LookupError& e) {
    std::fprintf(stderr, "lookup error: %s\n", e.what());
    return 2;
  } catch (const chance::DomainError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 2;
  } catch (const chance::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const chance::InferenceError& e) {
    std::fprintf(stderr, "inference error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
