#include "chance/draws_io.h"

#include <openssl/evp.h>

#include <set>
#include <sstream>

#include "chance/csv.h"
#include "chance/errors.h"

namespace chance {

using nlohmann::json;
using nlohmann::ordered_json;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw NumericError("SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string data_checksum(const FitData& data) {
  std::ostringstream s;
  const auto& index = data.index;
  for (std::size_t t = 0; t < index.team_count(); ++t) {
    s << "team," << index.team(t);
    for (std::size_t p = 0; p < index.roster_size(t); ++p) {
      s << ',' << index.player(index.roster_begin(t) + p).player_id;
    }
    s << '\n';
  }
  for (const auto& r : data.rows) {
    s << "row," << r.team << ',' << r.opponent << ',' << r.block.number() << ',' << r.is_home << ','
      << r.count << ',' << r.game_state << ',' << r.red_state << '\n';
  }
  for (const auto& c : data.chances) {
    s << "chance," << c.fixture_id << ',' << c.team_id << ',' << c.block.number() << ','
      << c.assist_player.player_id << ',' << c.chance_player.player_id << ','
      << csv::format_double(c.assist_loc.x) << ',' << csv::format_double(c.assist_loc.y) << ','
      << csv::format_double(c.delta.dx) << ',' << csv::format_double(c.delta.dy) << '\n';
  }
  return sha256_hex(s.str());
}

std::string centroid_checksum(const Centroids& assist, const Centroids& delta) {
  std::ostringstream s;
  write_centroids_csv(s, assist);
  write_centroids_csv(s, delta);
  return sha256_hex(s.str());
}

namespace {

ordered_json matrix_json(const Eigen::Matrix2d& m) {
  return ordered_json::array({ordered_json::array({m(0, 0), m(0, 1)}),
                              ordered_json::array({m(1, 0), m(1, 1)})});
}

Eigen::Matrix2d matrix_from(const json& j) {
  if (j.is_number()) return j.get<double>() * Eigen::Matrix2d::Identity();
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || !j[1].is_array() || j[0].size() != 2 ||
      j[1].size() != 2) {
    throw SchemaError("expected a 2x2 matrix or a scalar");
  }
  Eigen::Matrix2d m;
  m << j[0][0].get<double>(), j[0][1].get<double>(), j[1][0].get<double>(), j[1][1].get<double>();
  return m;
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + " must be an object");
  std::set<std::string> names(known.begin(), known.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!names.contains(it.key())) throw SchemaError("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void read_if(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

ordered_json config_json(const FitConfig& c, bool include_execution) {
  const auto& s = c.sampler;
  ordered_json sampler = {{"iterations", s.iterations},
                          {"burn_in", s.burn_in},
                          {"thin", s.thin},
                          {"seed", s.seed},
                          {"chains", s.chains}};
  if (include_execution) sampler["workers"] = s.workers;
  sampler["adapt_target"] = s.adapt_target;
  sampler["adapt_window"] = s.adapt_window;
  sampler["rate_substeps"] = s.rate_substeps;
  sampler["initial_step"] = {{"theta", s.initial_step.theta},
                             {"gamma", s.initial_step.gamma},
                             {"alpha", s.initial_step.alpha},
                             {"beta", s.initial_step.beta},
                             {"tau", s.initial_step.tau}};
  sampler["update_rate"] = s.update_rate;
  sampler["update_sigma"] = s.update_sigma;
  sampler["rate_scale"] = s.rate_scale;
  const auto& p = c.priors;
  ordered_json priors = {{"effect_sd", p.rate.effect_sd},
                         {"tau_shape", p.rate.tau_shape},
                         {"tau_rate", p.rate.tau_rate},
                         {"phi_concentration", p.composition.phi_concentration},
                         {"kappa_concentration", p.composition.kappa_concentration},
                         {"sigma_scale", matrix_json(p.composition.sigma_scale)},
                         {"sigma_df", p.composition.sigma_df}};
  ordered_json mixture = {{"components", c.mixture.components},
                          {"kmeans_seed", c.mixture.kmeans_seed},
                          {"rescale_coordinates", c.mixture.rescale_coordinates}};
  return {{"sampler", sampler}, {"priors", priors}, {"mixture", mixture}};
}

}  // namespace

nlohmann::json config_to_json(const FitConfig& config) {
  return json::parse(config_json(config, true).dump());
}

FitConfig config_from_json(const nlohmann::json& j) {
  FitConfig c;
  try {
    reject_unknown(j, {"sampler", "priors", "mixture"}, "config");
    if (j.contains("sampler")) {
      const auto& s = j.at("sampler");
      reject_unknown(s,
                     {"iterations", "burn_in", "thin", "seed", "chains", "workers", "adapt_target",
                      "adapt_window", "rate_substeps", "initial_step", "update_rate", "update_sigma",
                      "rate_scale"},
                     "sampler");
      auto& sc = c.sampler;
      read_if(s, "iterations", sc.iterations);
      read_if(s, "burn_in", sc.burn_in);
      read_if(s, "thin", sc.thin);
      read_if(s, "seed", sc.seed);
      read_if(s, "chains", sc.chains);
      read_if(s, "workers", sc.workers);
      read_if(s, "adapt_target", sc.adapt_target);
      read_if(s, "adapt_window", sc.adapt_window);
      read_if(s, "rate_substeps", sc.rate_substeps);
      read_if(s, "update_rate", sc.update_rate);
      read_if(s, "update_sigma", sc.update_sigma);
      read_if(s, "rate_scale", sc.rate_scale);
      if (s.contains("initial_step")) {
        const auto& st = s.at("initial_step");
        reject_unknown(st, {"theta", "gamma", "alpha", "beta", "tau"}, "initial_step");
        read_if(st, "theta", sc.initial_step.theta);
        read_if(st, "gamma", sc.initial_step.gamma);
        read_if(st, "alpha", sc.initial_step.alpha);
        read_if(st, "beta", sc.initial_step.beta);
        read_if(st, "tau", sc.initial_step.tau);
      }
    }
    if (j.contains("priors")) {
      const auto& p = j.at("priors");
      reject_unknown(p,
                     {"effect_sd", "tau_shape", "tau_rate", "phi_concentration",
                      "kappa_concentration", "sigma_scale", "sigma_df"},
                     "priors");
      read_if(p, "effect_sd", c.priors.rate.effect_sd);
      read_if(p, "tau_shape", c.priors.rate.tau_shape);
      read_if(p, "tau_rate", c.priors.rate.tau_rate);
      read_if(p, "phi_concentration", c.priors.composition.phi_concentration);
      read_if(p, "kappa_concentration", c.priors.composition.kappa_concentration);
      read_if(p, "sigma_df", c.priors.composition.sigma_df);
      if (p.contains("sigma_scale")) c.priors.composition.sigma_scale = matrix_from(p.at("sigma_scale"));
    }
    if (j.contains("mixture")) {
      const auto& m = j.at("mixture");
      reject_unknown(m, {"components", "kmeans_seed", "rescale_coordinates"}, "mixture");
      read_if(m, "components", c.mixture.components);
      read_if(m, "kmeans_seed", c.mixture.kmeans_seed);
      read_if(m, "rescale_coordinates", c.mixture.rescale_coordinates);
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("invalid config: ") + e.what());
  }
  const auto& p = c.priors;
  if (!(p.rate.effect_sd > 0.0) || !(p.rate.tau_shape > 0.0) || !(p.rate.tau_rate > 0.0) ||
      !(p.composition.phi_concentration > 0.0) || !(p.composition.kappa_concentration > 0.0) ||
      !(p.composition.sigma_df > 1.0) || !is_spd(p.composition.sigma_scale)) {
    throw SchemaError("invalid prior settings");
  }
  if (c.mixture.components == 0) throw SchemaError("mixture needs at least one component");
  try {
    c.sampler.validate();
  } catch (const DomainError& e) {
    throw SchemaError(std::string("invalid sampler settings: ") + e.what());
  }
  return c;
}

FitConfig read_config(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

namespace {

ordered_json centroid_json(const Centroids& c) {
  ordered_json a = ordered_json::array();
  for (const auto& mu : c.mu) a.push_back(ordered_json::array({mu.x(), mu.y()}));
  return a;
}

Centroids centroids_from(const json& j, Space space) {
  Centroids c;
  c.space = space;
  for (const auto& p : j) c.mu.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  return c;
}

ordered_json sigma_json(const std::vector<Eigen::Matrix2d>& sigma) {
  ordered_json a = ordered_json::array();
  for (const auto& s : sigma) a.push_back(ordered_json::array({s(0, 0), s(0, 1), s(1, 0), s(1, 1)}));
  return a;
}

std::vector<Eigen::Matrix2d> sigma_from(const json& j) {
  std::vector<Eigen::Matrix2d> out;
  for (const auto& s : j) {
    Eigen::Matrix2d m;
    m << s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>(), s.at(3).get<double>();
    out.push_back(m);
  }
  return out;
}

}  // namespace

void write_draws_jsonl(std::ostream& out, const PosteriorDraws& draws) {
  const auto& index = draws.index;
  ordered_json manifest;
  manifest["kind"] = "manifest";
  manifest["format"] = 1;
  manifest["config"] = config_json(draws.config, false);
  manifest["seed"] = draws.config.sampler.seed;
  manifest["data_checksum"] = draws.data_checksum;
  manifest["centroid_checksum"] = draws.centroid_checksum;
  manifest["components"] = index.components();
  ordered_json rosters = ordered_json::array();
  for (std::size_t t = 0; t < index.team_count(); ++t) {
    ordered_json players = ordered_json::array();
    for (std::size_t p = 0; p < index.roster_size(t); ++p) {
      players.push_back(index.player(index.roster_begin(t) + p).player_id);
    }
    rosters.push_back({{"team", index.team(t)}, {"players", players}});
  }
  manifest["rosters"] = rosters;
  manifest["centroids"] = {{"assist", centroid_json(draws.assist_centroids)},
                           {"delta", centroid_json(draws.delta_centroids)}};
  manifest["draw_count"] = draws.size();
  out << manifest.dump() << '\n';

  for (const auto& d : draws.draws) {
    ordered_json j;
    j["kind"] = "draw";
    j["chain"] = d.chain;
    j["iteration"] = d.iteration;
    j["theta"] = d.rate.theta;
    j["gamma"] = d.rate.gamma;
    j["alpha"] = d.rate.alpha;
    j["beta"] = d.rate.beta;
    j["tau"] = d.rate.tau;
    j["phi_assist"] = d.players.phi_assist;
    j["phi_chance"] = d.players.phi_chance;
    j["kappa_assist"] = d.assist.kappa;
    j["kappa_delta"] = d.delta.kappa;
    j["sigma_assist"] = sigma_json(d.assist.sigma);
    j["sigma_delta"] = sigma_json(d.delta.sigma);
    out << j.dump() << '\n';
  }

  ordered_json acc;
  acc["kind"] = "acceptance";
  ordered_json chains = ordered_json::array();
  for (const auto& a : draws.acceptance) {
    ordered_json c;
    for (std::size_t g = 0; g < kRateGroupCount; ++g) {
      c[to_string(static_cast<RateGroup>(g))] = {{"proposed", a.proposed[g]},
                                                 {"accepted", a.accepted[g]}};
    }
    chains.push_back(c);
  }
  acc["chains"] = chains;
  out << acc.dump() << '\n';
}

PosteriorDraws read_draws_jsonl(std::istream& in) {
  PosteriorDraws out;
  std::string line;
  std::size_t line_number = 0;
  bool have_manifest = false;
  try {
    while (std::getline(in, line)) {
      ++line_number;
      if (line.empty()) continue;
      const json j = json::parse(line);
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "manifest") {
        out.config = config_from_json(j.at("config"));
        out.data_checksum = j.at("data_checksum").get<std::string>();
        out.centroid_checksum = j.at("centroid_checksum").get<std::string>();
        std::map<std::string, std::vector<std::string>> rosters;
        for (const auto& r : j.at("rosters")) {
          rosters[r.at("team").get<std::string>()] = r.at("players").get<std::vector<std::string>>();
        }
        out.index = ModelIndex(std::move(rosters), j.at("components").get<std::size_t>());
        out.assist_centroids = centroids_from(j.at("centroids").at("assist"), Space::assist);
        out.delta_centroids = centroids_from(j.at("centroids").at("delta"), Space::delta);
        have_manifest = true;
      } else if (kind == "draw") {
        if (!have_manifest) throw SchemaError("draw record before the manifest");
        Draw d;
        d.chain = j.at("chain").get<std::size_t>();
        d.iteration = j.at("iteration").get<std::size_t>();
        d.rate.team_count = out.index.team_count();
        d.rate.theta = j.at("theta").get<std::vector<double>>();
        const auto gamma = j.at("gamma").get<std::vector<double>>();
        if (gamma.size() != kBlockCount || d.rate.theta.size() != kBlockCount * d.rate.team_count) {
          throw SchemaError("draw on line " + std::to_string(line_number) + " has wrong rate dimensions");
        }
        std::copy(gamma.begin(), gamma.end(), d.rate.gamma.begin());
        d.rate.alpha = j.at("alpha").get<double>();
        d.rate.beta = j.at("beta").get<double>();
        d.rate.tau = j.at("tau").get<double>();
        d.players.phi_assist = j.at("phi_assist").get<std::vector<double>>();
        d.players.phi_chance = j.at("phi_chance").get<std::vector<double>>();
        d.assist.space = Space::assist;
        d.assist.kappa = j.at("kappa_assist").get<std::vector<double>>();
        d.assist.sigma = sigma_from(j.at("sigma_assist"));
        d.delta.space = Space::delta;
        d.delta.kappa = j.at("kappa_delta").get<std::vector<double>>();
        d.delta.sigma = sigma_from(j.at("sigma_delta"));
        const auto cells = out.index.player_count() * kBlockCount;
        const auto m = out.index.components();
        if (d.players.phi_assist.size() != cells || d.players.phi_chance.size() != cells ||
            d.assist.kappa.size() != cells * m || d.delta.kappa.size() != cells * m ||
            d.assist.sigma.size() != m || d.delta.sigma.size() != m) {
          throw SchemaError("draw on line " + std::to_string(line_number) +
                            " does not match the manifest dimensions");
        }
        out.draws.push_back(std::move(d));
      } else if (kind == "acceptance") {
        for (const auto& c : j.at("chains")) {
          AcceptanceStats a;
          for (std::size_t g = 0; g < kRateGroupCount; ++g) {
            const auto& e = c.at(to_string(static_cast<RateGroup>(g)));
            a.proposed[g] = e.at("proposed").get<std::uint64_t>();
            a.accepted[g] = e.at("accepted").get<std::uint64_t>();
          }
          out.acceptance.push_back(a);
        }
      } else {
        throw SchemaError("unknown record kind '" + kind + "' on line " + std::to_string(line_number));
      }
    }
  } catch (const json::exception& e) {
    throw SchemaError("malformed draws file at line " + std::to_string(line_number) + ": " + e.what());
  }
  if (!have_manifest) throw SchemaError("draws file has no manifest");
  return out;
}

std::vector<std::string> rate_parameter_names(const ModelIndex& index) {
  std::vector<std::string> names;
  for (std::size_t t = 0; t < index.team_count(); ++t) {
    for (int b = 1; b <= kBlockCount; ++b) {
      names.push_back("theta[" + index.team(t) + ",t" + std::to_string(b) + "]");
    }
  }
  for (int b = 1; b <= kBlockCount; ++b) names.push_back("gamma[t" + std::to_string(b) + "]");
  names.insert(names.end(), {"alpha", "beta", "tau"});
  return names;
}

std::vector<double> rate_parameter_values(const RateParams& rate) {
  std::vector<double> v;
  v.reserve(rate.team_count * kBlockCount + kBlockCount + 3);
  for (std::size_t t = 0; t < rate.team_count; ++t) {
    for (int b = 0; b < kBlockCount; ++b) v.push_back(rate.theta[b * rate.team_count + t]);
  }
  v.insert(v.end(), rate.gamma.begin(), rate.gamma.end());
  v.insert(v.end(), {rate.alpha, rate.beta, rate.tau});
  return v;
}

void write_trace_csv(std::ostream& out, const PosteriorDraws& draws) {
  const auto names = rate_parameter_names(draws.index);
  csv::write_row(out, {"iteration", "parameter", "value", "chain"});
  for (const auto& d : draws.draws) {
    const auto v = rate_parameter_values(d.rate);
    for (std::size_t k = 0; k < names.size(); ++k) {
      csv::write_row(out, {std::to_string(d.iteration), names[k], csv::format_double(v[k]),
                           std::to_string(d.chain)});
    }
  }
}

}  // namespace chance
