#pragma once

// Posterior summaries: team abilities, home effects, player mixture weights,
// location density surfaces and involvement probabilities. Every function is
// a pure function of (draws, query).

#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "chance/geometry.h"
#include "chance/inference.h"

namespace chance {

struct ReportTable {
  std::string title;
  std::string row_header = "row";
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;  // [row][column]
  // Optional 2.5% / 97.5% quantiles with the same shape as values.
  std::optional<std::vector<std::vector<double>>> lower;
  std::optional<std::vector<std::vector<double>>> upper;

  // Throws DomainError if not rectangular or labels repeat.
  void validate() const;
};

void write_table_csv(std::ostream& out, const ReportTable& table);
// One record per row: {"<row_header>": label, "<column>": value, ...}.
void write_table_jsonl(std::ostream& out, const ReportTable& table);

// Posterior mean theta: teams by blocks, with 95% intervals.
ReportTable team_ability_table(const PosteriorDraws& draws);
// Per block: mean, 2.5% and 97.5% quantiles of gamma.
ReportTable home_effect_summary(const PosteriorDraws& draws);
// Blocks by components, posterior mean kappa of one player.
ReportTable radar_weights(const PosteriorDraws& draws, const PlayerKey& player, Space space);

struct GridSpec {
  Rect bounds;
  std::size_t nx = 100;
  std::size_t ny = 100;
};

/// Densities at cell centres; values[j * nx + i] is column i, row j (y increasing).
struct SurfaceGrid {
  Rect bounds;
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<double> values;

  double cell_width() const { return bounds.width() / static_cast<double>(nx); }
  double cell_height() const { return bounds.height() / static_cast<double>(ny); }
  Eigen::Vector2d cell_centre(std::size_t i, std::size_t j) const;
  double at(std::size_t i, std::size_t j) const { return values[j * nx + i]; }
  // Riemann sum: sum of values times cell area.
  double integral() const;
};

// Mean over draws of the player's mixture density for the block. Throws
// DomainError for a grid below 2x2 or without area.
SurfaceGrid density_surface(const PosteriorDraws& draws, const PlayerKey& player, BlockIndex block,
                            Space space, const GridSpec& grid);

// Grid covering every component mean +- 8 standard deviations (largest
// posterior-mean eigenvalue) with cells no larger than the smallest standard
// deviation, capped at `max_cells` per side.
GridSpec standard_grid(const PosteriorDraws& draws, Space space, std::size_t max_cells = 400);

struct PointQuery {
  Eigen::Vector2d at;
};
struct RectQuery {
  Rect region;
  std::size_t resolution = 50;  // cells per side for the grid sum
};
using Region = std::variant<PointQuery, RectQuery>;

enum class Role { assist, chance };

// For each draw, p_i proportional to phi_i f_i(region), normalised over the
// roster; reported as the mean over draws. Assist role uses the assist space,
// chance role the offset space. Throws DomainError for an empty roster or a
// region outside the space bounds.
ReportTable involvement_probability(const PosteriorDraws& draws, const std::string& team,
                                    BlockIndex block, const Region& region, Role role);

}  // namespace chance
