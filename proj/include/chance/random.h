#pragma once

// Random streams and the handful of distributions the samplers need.
//
// Every random draw in the sampler comes from a stream keyed by
// (seed, iteration, group, unit). Streams are cheap to construct, so each unit
// of parallel work gets its own and results do not depend on how units are
// distributed over workers.

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace chance {

// xoshiro256** seeded through splitmix64.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  explicit StreamRng(std::uint64_t seed);
  static StreamRng keyed(std::uint64_t seed, std::uint64_t iteration, std::uint64_t group,
                         std::uint64_t unit);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // uniform on [0, 1) with 53 random bits
  double uniform();

 private:
  std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t& state);

// Stable derivation of sub-seeds (per chain, per replicate).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

double sample_normal(StreamRng& rng, double mean = 0.0, double sd = 1.0);
double sample_gamma(StreamRng& rng, double shape, double rate = 1.0);
double sample_chi_squared(StreamRng& rng, double dof);
int sample_poisson(StreamRng& rng, double mean);

// Index drawn with probability proportional to weights (need not be normalised).
std::size_t sample_categorical(StreamRng& rng, std::span<const double> weights);

std::vector<double> sample_dirichlet(StreamRng& rng, std::span<const double> concentration);

// Inverse-Wishart(scale, df) in two dimensions (Bartlett decomposition of the
// Wishart precision). Requires df > 1 and an SPD scale.
Eigen::Matrix2d sample_inverse_wishart(StreamRng& rng, const Eigen::Matrix2d& scale, double df);

double inverse_wishart_log_density(const Eigen::Matrix2d& sigma, const Eigen::Matrix2d& scale,
                                   double df);
double dirichlet_log_density(std::span<const double> x, std::span<const double> concentration);

double normal_log_density(double x, double mean, double sd);
// Gamma with shape/rate parameterisation.
double gamma_log_density(double x, double shape, double rate);

double log_sum_exp(std::span<const double> values);

bool is_spd(const Eigen::Matrix2d& m);

}  // namespace chance
