#include <sstream>

#include "doctest.h"

#include "chance/draws_io.h"
#include "support.h"

using namespace chance;

TEST_CASE("sha256 of known strings") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config json round trip and validation") {
  FitConfig c;
  c.sampler.iterations = 321;
  c.sampler.seed = 99;
  c.sampler.initial_step.tau = 0.75;
  c.priors.rate.tau_rate = 0.02;
  c.priors.composition.sigma_scale << 2, 0.5, 0.5, 3;
  c.mixture.components = 5;
  const auto back = config_from_json(config_to_json(c));
  CHECK(back.sampler.iterations == 321);
  CHECK(back.sampler.seed == 99);
  CHECK(back.sampler.initial_step.tau == 0.75);
  CHECK(back.priors.rate.tau_rate == 0.02);
  CHECK(back.priors.composition.sigma_scale == c.priors.composition.sigma_scale);
  CHECK(back.mixture.components == 5);

  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"sampler":{"iterashuns":3}})")), SchemaError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"sampler":{"iterations":"many"}})")), SchemaError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"sampler":{"thin":0}})")), SchemaError);
  std::istringstream broken("{not json");
  CHECK_THROWS_AS(read_config(broken), SchemaError);
  const auto partial = config_from_json(nlohmann::json::parse(R"({"priors":{"sigma_scale":4}})"));
  CHECK(partial.priors.composition.sigma_scale == Eigen::Matrix2d::Identity() * 4);
  CHECK(partial.sampler.iterations == 2000);
}

TEST_CASE("draws file round trip is exact") {
  const auto s = testing::synthetic({.teams = 3, .fixtures = 6, .roster = 2, .seed = 12});
  const auto draws = fit(s.data, testing::short_run(40, 10, 5));
  std::ostringstream out;
  write_draws_jsonl(out, draws);
  std::istringstream in(out.str());
  const auto back = read_draws_jsonl(in);
  REQUIRE(back.size() == draws.size());
  CHECK(back.data_checksum == draws.data_checksum);
  CHECK(back.data_checksum == data_checksum(s.data));
  CHECK(back.centroid_checksum == centroid_checksum(s.data.assist_centroids, s.data.delta_centroids));
  CHECK(back.index.teams() == draws.index.teams());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back.draws[i].rate.theta == draws.draws[i].rate.theta);
    CHECK(back.draws[i].rate.tau == draws.draws[i].rate.tau);
    CHECK(back.draws[i].players.phi_chance == draws.draws[i].players.phi_chance);
    CHECK(back.draws[i].delta.kappa == draws.draws[i].delta.kappa);
    for (std::size_t m = 0; m < back.draws[i].assist.sigma.size(); ++m) {
      CHECK(back.draws[i].assist.sigma[m] == draws.draws[i].assist.sigma[m]);
    }
  }
  std::ostringstream again;
  write_draws_jsonl(again, back);
  CHECK(again.str() == out.str());

  std::istringstream truncated(out.str().substr(0, out.str().find('\n')));
  const auto header_only = read_draws_jsonl(truncated);
  CHECK(header_only.empty());
  std::istringstream garbage("{\"kind\":\"draw\"}\n");
  CHECK_THROWS_AS(read_draws_jsonl(garbage), SchemaError);
}

TEST_CASE("trace csv") {
  const auto s = testing::synthetic({.teams = 2, .fixtures = 2, .roster = 2, .seed = 1});
  const auto draws = fit(s.data, testing::short_run(13, 10));
  std::ostringstream out;
  write_trace_csv(out, draws);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "iteration,parameter,value,chain");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  const auto names = rate_parameter_names(draws.index);
  CHECK(names.size() == 12 + 6 + 3);
  CHECK(names.front() == "theta[T01,t1]");
  CHECK(names.back() == "tau");
  CHECK(rows == names.size() * 3);
}
