#include "chance/random.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "chance/errors.h"

namespace chance {

namespace {

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t mix(std::uint64_t value) {
  std::uint64_t state = value;
  return splitmix64(state);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return mix(mix(seed) ^ (salt * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

StreamRng::StreamRng(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64(state);
}

StreamRng StreamRng::keyed(std::uint64_t seed, std::uint64_t iteration, std::uint64_t group,
                           std::uint64_t unit) {
  std::uint64_t key = mix(seed);
  key = mix(key ^ (iteration + 0x632be59bd9b4e019ULL));
  key = mix(key ^ (group + 0x85157af5ULL));
  key = mix(key ^ (unit + 0x9e3779b97f4a7c15ULL));
  return StreamRng(key);
}

StreamRng::result_type StreamRng::operator()() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double StreamRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double sample_normal(StreamRng& rng, double mean, double sd) {
  std::normal_distribution<double> dist(mean, sd);
  return dist(rng);
}

double sample_gamma(StreamRng& rng, double shape, double rate) {
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(rng);
}

double sample_chi_squared(StreamRng& rng, double dof) { return sample_gamma(rng, 0.5 * dof, 0.5); }

int sample_poisson(StreamRng& rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw NumericError("Poisson mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  std::poisson_distribution<int> dist(mean);
  return dist(rng);
}

std::size_t sample_categorical(StreamRng& rng, std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericError("categorical weights must have a positive finite sum");
  }
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    u -= weights[i];
    if (u < 0.0) return i;
  }
  // rounding: fall back to the last positive weight
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return weights.size() - 1;
}

std::vector<double> sample_dirichlet(StreamRng& rng, std::span<const double> concentration) {
  std::vector<double> out(concentration.size());
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = sample_gamma(rng, concentration[i]);
    total += out[i];
  }
  if (!(total > 0.0)) {
    // every gamma underflowed (tiny concentrations); put the mass on the largest one
    const auto k = std::distance(concentration.begin(),
                                 std::max_element(concentration.begin(), concentration.end()));
    std::fill(out.begin(), out.end(), 0.0);
    out[k] = 1.0;
    return out;
  }
  for (auto& v : out) v /= total;
  return out;
}

Eigen::Matrix2d sample_inverse_wishart(StreamRng& rng, const Eigen::Matrix2d& scale, double df) {
  if (!(df > 1.0)) throw DomainError("inverse-Wishart degrees of freedom must exceed 1");
  if (!is_spd(scale)) throw DomainError("inverse-Wishart scale must be symmetric positive-definite");
  const Eigen::Matrix2d precision_scale = scale.inverse();
  const Eigen::Matrix2d chol = precision_scale.llt().matrixL();
  Eigen::Matrix2d bartlett = Eigen::Matrix2d::Zero();
  bartlett(0, 0) = std::sqrt(sample_chi_squared(rng, df));
  bartlett(1, 1) = std::sqrt(sample_chi_squared(rng, df - 1.0));
  bartlett(1, 0) = sample_normal(rng);
  const Eigen::Matrix2d factor = chol * bartlett;
  const Eigen::Matrix2d wishart = factor * factor.transpose();
  Eigen::Matrix2d sigma = wishart.inverse();
  sigma(0, 1) = sigma(1, 0) = 0.5 * (sigma(0, 1) + sigma(1, 0));
  return sigma;
}

double inverse_wishart_log_density(const Eigen::Matrix2d& sigma, const Eigen::Matrix2d& scale,
                                   double df) {
  constexpr double p = 2.0;
  // log multivariate gamma, p = 2: log(pi)/2 + lgamma(a) + lgamma(a - 1/2)
  const double a = 0.5 * df;
  const double log_mv_gamma = 0.5 * std::log(std::numbers::pi) + std::lgamma(a) + std::lgamma(a - 0.5);
  const double trace = (scale * sigma.inverse()).trace();
  return 0.5 * df * std::log(scale.determinant()) - 0.5 * df * p * std::numbers::ln2 -
         log_mv_gamma - 0.5 * (df + p + 1.0) * std::log(sigma.determinant()) - 0.5 * trace;
}

double dirichlet_log_density(std::span<const double> x, std::span<const double> concentration) {
  double total = 0.0;
  double out = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    total += concentration[i];
    out += -std::lgamma(concentration[i]);
    if (concentration[i] != 1.0) out += (concentration[i] - 1.0) * std::log(x[i]);
  }
  return out + std::lgamma(total);
}

double normal_log_density(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double gamma_log_density(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_sum_exp(std::span<const double> values) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : values) peak = std::max(peak, v);
  if (!std::isfinite(peak)) return peak;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

bool is_spd(const Eigen::Matrix2d& m) {
  if (!m.allFinite()) return false;
  if (std::abs(m(0, 1) - m(1, 0)) > 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff())) return false;
  return m(0, 0) > 0.0 && m.determinant() > 0.0;
}

}  // namespace chance
