#pragma once

// Draw storage. A run is one line-delimited JSON file:
//
//   {"kind":"manifest", config, seed, data/centroid checksums, teams, rosters, centroids}
//   {"kind":"draw", "chain":c, "iteration":t, theta, gamma, alpha, beta, tau, phi_a, phi_c, ...}
//   ...
//   {"kind":"acceptance", per-chain Metropolis statistics}
//
// Doubles are written in shortest round-trip form so a re-read run is bit-identical.

#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "json.hpp"

#include "chance/inference.h"

namespace chance {

std::string sha256_hex(std::string_view bytes);
// Checksums over canonical serialisations of the fit inputs.
std::string data_checksum(const FitData& data);
std::string centroid_checksum(const Centroids& assist, const Centroids& delta);

nlohmann::json config_to_json(const FitConfig& config);
// Missing keys keep their defaults; unknown keys and wrong types raise SchemaError.
FitConfig config_from_json(const nlohmann::json& j);
FitConfig read_config(std::istream& in);

void write_draws_jsonl(std::ostream& out, const PosteriorDraws& draws);
PosteriorDraws read_draws_jsonl(std::istream& in);

// Columns: iteration, parameter, value, chain; rate parameters only.
void write_trace_csv(std::ostream& out, const PosteriorDraws& draws);

// Scalar rate parameter names in a fixed order: theta[team,t1].., gamma[t1].., alpha, beta, tau.
std::vector<std::string> rate_parameter_names(const ModelIndex& index);
std::vector<double> rate_parameter_values(const RateParams& rate);

}  // namespace chance
