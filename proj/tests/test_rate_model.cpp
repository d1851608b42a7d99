#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"

#include "chance/rate_model.h"

using namespace chance;

namespace {

RateRow row(std::size_t team, std::size_t opp, int block = 1, bool home = false, int n = 0, int g = 0,
            int r = 0) {
  return {team, opp, BlockIndex(block), home, n, g, r};
}

}  // namespace

TEST_CASE("compute_lambda") {
  auto p = RateParams::zeros(3);
  CHECK(compute_lambda(p, row(0, 1)) == 1.0);

  std::vector<double> free{0.201, -0.296};
  p.set_free_theta(BlockIndex(1), free);
  CHECK(compute_lambda(p, row(0, 1)) == doctest::Approx(std::exp(0.497)).epsilon(1e-12));
  CHECK(compute_lambda(p, row(0, 1)) == doctest::Approx(1.6438).epsilon(1e-4));

  auto q = RateParams::zeros(2);
  q.gamma[2] = 0.1;
  q.alpha = 0.05;
  q.beta = 0.2;
  CHECK(compute_lambda(q, row(0, 1, 3, true, 0, -2, -1)) == doctest::Approx(std::exp(-0.2)).epsilon(1e-12));
  CHECK(compute_lambda(q, row(0, 1, 3, true, 0, -2, -1)) == doctest::Approx(0.8187).epsilon(1e-4));
  // no home effect away from home
  CHECK(compute_lambda(q, row(0, 1, 3, false, 0, -2, -1)) == doctest::Approx(std::exp(-0.3)).epsilon(1e-12));

  CHECK_THROWS_AS(compute_lambda(q, row(0, 5)), LookupError);
  q.alpha = 1e4;
  CHECK_THROWS_AS(compute_lambda(q, row(0, 1, 1, false, 0, 1)), NumericError);
}

TEST_CASE("log_likelihood") {
  auto p = RateParams::zeros(3);
  const std::vector<RateRow> one{row(0, 1, 1, false, 0)};
  CHECK(log_likelihood(p, one) == doctest::Approx(-1.0).epsilon(1e-15));

  p.set_free_theta(BlockIndex(1), std::vector<double>{0.201, -0.296});
  const std::vector<RateRow> two{row(0, 1, 1, false, 2)};
  const double lambda = std::exp(0.497);
  const double expected = 2 * std::log(lambda) - lambda - std::log(2.0);
  CHECK(log_likelihood(p, two) == doctest::Approx(expected).epsilon(1e-12));
  // 2(0.497) - 1.6438 - 0.6931 = -1.3429 to four places
  CHECK(log_likelihood(p, two) == doctest::Approx(-1.3429).epsilon(1e-4));

  const std::vector<RateRow> doubled{two[0], two[0]};
  CHECK(log_likelihood(p, doubled) == 2 * log_likelihood(p, two));
}

TEST_CASE("log_likelihood is unimodal in log lambda at N") {
  auto p = RateParams::zeros(2);
  auto ll = [&](double a) {
    p.alpha = a;
    return log_likelihood(p, std::vector<RateRow>{row(0, 1, 1, false, 3, 1)});
  };
  // lambda = exp(alpha), maximised at alpha = log 3
  const double peak = std::log(3.0);
  double last = ll(peak);
  for (double d = 0.1; d < 3; d += 0.1) {
    const double up = ll(peak + d);
    CHECK(up < last);
    last = up;
  }
  last = ll(peak);
  for (double d = 0.1; d < 3; d += 0.1) {
    const double down = ll(peak - d);
    CHECK(down < last);
    last = down;
  }
}

TEST_CASE("log_prior terms") {
  auto p = RateParams::zeros(4);
  const auto t = log_prior_terms(p);
  CHECK(t.alpha == doctest::Approx(-std::log(10 * std::sqrt(2 * M_PI))).epsilon(1e-14));
  CHECK(t.alpha == doctest::Approx(-3.2215).epsilon(1e-4));
  CHECK(t.tau == doctest::Approx(std::log(0.01) - 0.01).epsilon(1e-14));
  CHECK(t.tau == doctest::Approx(-4.6152).epsilon(1e-4));
  CHECK(t.gamma == doctest::Approx(6 * t.alpha).epsilon(1e-14));
  // 18 free theta coordinates, each N(0, 1) at 0
  CHECK(t.theta == doctest::Approx(-9 * std::log(2 * M_PI)).epsilon(1e-14));

  p.tau = 4.0;
  p.set_free_theta(BlockIndex(2), std::vector<double>{1.0, -2.0, 0.5});
  const double var = 4.0;
  double expected = 0.0;
  for (double x : p.all_free_theta()) expected += -0.5 * std::log(2 * M_PI * var) - x * x / (2 * var);
  CHECK(log_prior_terms(p).theta == doctest::Approx(expected).epsilon(1e-13));

  p.tau = 0.0;
  CHECK_THROWS_AS(log_prior(p), DomainError);
  p.tau = -1.0;
  CHECK_THROWS_AS(log_prior(p), DomainError);
}

TEST_CASE("doubling the blocks doubles the gamma prior") {
  const std::vector<double> three(3, 0.0), six(6, 0.0);
  CHECK(effect_log_prior(six, 10.0) == doctest::Approx(2 * effect_log_prior(three, 10.0)).epsilon(1e-15));
}

TEST_CASE("project_sum_to_zero") {
  const std::vector<double> v{1, 2, 3};
  CHECK(project_sum_to_zero(v, 3) == std::vector<double>{-1, 0, 1});
  const std::vector<double> centred{-1, 0, 1};
  CHECK(project_sum_to_zero(centred, 3) == centred);
  const std::vector<double> flat(4, 2.5);
  for (double x : project_sum_to_zero(flat, 4)) CHECK(x == 0.0);
}

TEST_CASE("lambda is invariant to a common shift before projection") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-2, 2);
  const std::size_t J = 5;
  std::vector<double> raw(J * kBlockCount);
  for (auto& x : raw) x = u(gen);
  auto shifted = raw;
  for (std::size_t b = 0; b < kBlockCount; ++b) {
    for (std::size_t j = 0; j < J; ++j) shifted[b * J + j] += 0.7 * static_cast<double>(b) - 3.0;
  }
  RateParams a = RateParams::zeros(J), b = RateParams::zeros(J);
  a.theta = project_sum_to_zero(raw, J);
  b.theta = project_sum_to_zero(shifted, J);
  for (int blk = 1; blk <= 6; ++blk) {
    const auto block = a.theta_block(BlockIndex(blk));
    CHECK(std::abs(std::accumulate(block.begin(), block.end(), 0.0)) < 1e-12);
    for (std::size_t t = 0; t < J; ++t) {
      for (std::size_t o = 0; o < J; ++o) {
        if (t == o) continue;
        CHECK(compute_lambda(a, row(t, o, blk)) == doctest::Approx(compute_lambda(b, row(t, o, blk))).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("free coordinates keep the sum at zero") {
  auto p = RateParams::zeros(4);
  p.set_free_theta(BlockIndex(4), std::vector<double>{0.3, -1.1, 2.0});
  CHECK(p.theta_at(BlockIndex(4), 3) == doctest::Approx(-1.2).epsilon(1e-15));
  const auto free = p.free_theta(BlockIndex(4));
  CHECK(free == std::vector<double>{0.3, -1.1, 2.0});
  CHECK(p.all_free_theta().size() == 18);
}

TEST_CASE("lambda stays positive over a random sweep") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-10, 10);
  std::uniform_int_distribution<int> gi(-1, 1);
  auto p = RateParams::zeros(2);
  std::size_t positive = 0;
  const std::size_t n = 100000;
  for (std::size_t i = 0; i < n; ++i) {
    // each linear predictor term within +-10: theta difference, gamma, alpha G, beta R
    p.set_free_theta(BlockIndex(1), std::vector<double>{u(gen) / 2});
    p.gamma[0] = u(gen);
    p.alpha = u(gen);
    p.beta = u(gen);
    const double l = compute_lambda(p, row(0, 1, 1, true, 0, gi(gen), gi(gen)));
    positive += std::isfinite(l) && l > 0.0 ? 1 : 0;
  }
  CHECK(positive == n);
}
