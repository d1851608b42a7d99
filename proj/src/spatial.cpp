#include "chance/spatial.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "chance/log.h"

namespace chance {

namespace {

std::size_t nearest(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& centers) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const double d = (p - centers[k]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

std::vector<Eigen::Vector2d> plus_plus_seeds(std::span<const Eigen::Vector2d> points,
                                             std::size_t clusters, std::mt19937_64& gen) {
  std::vector<Eigen::Vector2d> centers;
  std::vector<bool> chosen(points.size(), false);
  std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
  const std::size_t i0 = first(gen);
  centers.push_back(points[i0]);
  chosen[i0] = true;

  std::vector<double> d2(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) d2[i] = (points[i] - centers[0]).squaredNorm();
  while (centers.size() < clusters) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = points.size();
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(gen);
      for (std::size_t i = 0; i < points.size(); ++i) {
        r -= d2[i];
        if (r < 0.0 && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick == points.size()) {
        for (std::size_t i = points.size(); i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // all remaining points coincide with a centre: take the first unused one
      pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
    }
    chosen[pick] = true;
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = std::min(d2[i], (points[i] - centers.back()).squaredNorm());
    }
  }
  return centers;
}

}  // namespace

Centroids kmeans(std::span<const Eigen::Vector2d> points, std::size_t clusters, std::uint64_t seed,
                 Space space) {
  if (clusters == 0) throw DomainError("k-means needs at least one cluster");
  if (points.size() < clusters) {
    throw DomainError("k-means needs at least as many points (" + std::to_string(points.size()) +
                      ") as clusters (" + std::to_string(clusters) + ")");
  }
  std::mt19937_64 gen(seed);
  auto centers = plus_plus_seeds(points, clusters, gen);

  std::vector<std::size_t> assignment(points.size(), clusters);
  for (std::size_t iter = 0; iter < kKMeansMaxIterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto k = nearest(points[i], centers);
      if (k != assignment[i]) {
        assignment[i] = k;
        changed = true;
      }
    }
    if (!changed) break;

    std::vector<Eigen::Vector2d> sums(clusters, Eigen::Vector2d::Zero());
    std::vector<std::size_t> sizes(clusters, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      sums[assignment[i]] += points[i];
      ++sizes[assignment[i]];
    }
    for (std::size_t k = 0; k < clusters; ++k) {
      if (sizes[k] > 0) {
        centers[k] = sums[k] / static_cast<double>(sizes[k]);
        continue;
      }
      // empty cluster: move it to the point worst served by its current centre
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = (points[i] - centers[assignment[i]]).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centers[k] = points[far];
      assignment[far] = k;
    }
  }

  std::sort(centers.begin(), centers.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.y() != b.y() ? a.y() < b.y() : a.x() < b.x();
  });
  Centroids out;
  out.space = space;
  out.mu = std::move(centers);
  return out;
}

GaussianMixture::GaussianMixture(const Centroids& centroids, std::span<const Eigen::Matrix2d> sigma)
    : mu_(centroids.mu) {
  if (sigma.size() != mu_.size()) {
    throw DomainError("mixture has " + std::to_string(mu_.size()) + " centroids but " +
                      std::to_string(sigma.size()) + " covariances");
  }
  precision_.reserve(sigma.size());
  log_norm_.reserve(sigma.size());
  for (std::size_t m = 0; m < sigma.size(); ++m) {
    const double det = sigma[m].determinant();
    if (!(det > 0.0) || !std::isfinite(det) || !sigma[m].allFinite()) {
      throw NumericError("covariance of component " + std::to_string(m + 1) +
                         " is singular or not positive-definite");
    }
    precision_.push_back(sigma[m].inverse());
    log_norm_.push_back(-std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det));
  }
}

double GaussianMixture::component_log_density(std::size_t m, const Eigen::Vector2d& x) const {
  const Eigen::Vector2d d = x - mu_[m];
  return log_norm_[m] - 0.5 * d.dot(precision_[m] * d);
}

double GaussianMixture::log_density(const Eigen::Vector2d& x, std::span<const double> kappa) const {
  if (kappa.size() != mu_.size()) throw DomainError("kappa length does not match the mixture size");
  double terms[64];
  std::vector<double> heap;
  double* buf = terms;
  if (mu_.size() > 64) {
    heap.resize(mu_.size());
    buf = heap.data();
  }
  for (std::size_t m = 0; m < mu_.size(); ++m) {
    buf[m] = kappa[m] > 0.0 ? std::log(kappa[m]) + component_log_density(m, x)
                            : -std::numeric_limits<double>::infinity();
  }
  return log_sum_exp(std::span<const double>(buf, mu_.size()));
}

bool GaussianMixture::responsibilities(const Eigen::Vector2d& x, std::span<const double> kappa,
                                       std::span<double> out) const {
  if (kappa.size() != mu_.size() || out.size() != mu_.size()) {
    throw DomainError("kappa length does not match the mixture size");
  }
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < mu_.size(); ++m) {
    out[m] = kappa[m] > 0.0 ? std::log(kappa[m]) + component_log_density(m, x)
                            : -std::numeric_limits<double>::infinity();
    peak = std::max(peak, out[m]);
  }
  if (!std::isfinite(peak)) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
    return false;
  }
  double total = 0.0;
  for (auto& v : out) {
    v = std::exp(v - peak);
    total += v;
  }
  for (auto& v : out) v /= total;
  return true;
}

double gmm_log_density(const Eigen::Vector2d& point, std::span<const double> kappa,
                       const Centroids& centroids, std::span<const Eigen::Matrix2d> sigma) {
  return GaussianMixture(centroids, sigma).log_density(point, kappa);
}

std::vector<double> assignment_probabilities(const Eigen::Vector2d& point,
                                             std::span<const double> kappa,
                                             const Centroids& centroids,
                                             std::span<const Eigen::Matrix2d> sigma) {
  std::vector<double> out(centroids.size());
  if (!GaussianMixture(centroids, sigma).responsibilities(point, kappa, out)) {
    warn("every mixture component underflowed; using uniform assignment probabilities");
  }
  return out;
}

std::vector<double> DirichletPosterior::mean() const {
  double total = 0.0;
  for (double c : concentration) total += c;
  std::vector<double> out(concentration.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = concentration[i] / total;
  return out;
}

DirichletPosterior update_phi(std::span<const double> counts, double prior_concentration) {
  if (!(prior_concentration > 0.0)) throw DomainError("Dirichlet prior concentration must be positive");
  DirichletPosterior post;
  post.concentration.reserve(counts.size());
  for (double c : counts) {
    if (c < 0.0) throw DomainError("negative count in Dirichlet update");
    post.concentration.push_back(prior_concentration + c);
  }
  return post;
}

DirichletPosterior update_kappa(std::span<const double> assignment_counts,
                                double prior_concentration) {
  return update_phi(assignment_counts, prior_concentration);
}

InverseWishartParams sigma_posterior(const Eigen::Vector2d& centroid,
                                     std::span<const Eigen::Vector2d> assigned_points,
                                     const Eigen::Matrix2d& prior_scale, double prior_df) {
  if (!(prior_df > 1.0)) throw DomainError("inverse-Wishart prior df must exceed 1");
  if (!is_spd(prior_scale)) throw DomainError("inverse-Wishart prior scale must be SPD");
  Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
  for (const auto& x : assigned_points) {
    const Eigen::Vector2d d = x - centroid;
    scatter += d * d.transpose();
  }
  return {prior_scale + scatter, prior_df + static_cast<double>(assigned_points.size())};
}

Eigen::Matrix2d update_sigma(std::size_t component, std::span<const Eigen::Vector2d> assigned_points,
                             const Centroids& centroids, const Eigen::Matrix2d& prior_scale,
                             double prior_df, StreamRng& rng) {
  if (component >= centroids.size()) throw LookupError("component index out of range");
  const auto post = sigma_posterior(centroids.mu[component], assigned_points, prior_scale, prior_df);
  return sample_inverse_wishart(rng, post.scale, post.df);
}

CompositionTerms composition_log_posterior_terms(
    const ModelIndex& index, const PlayerDist& phi, const MixtureParams& assist,
    const MixtureParams& delta, const Centroids& assist_centroids, const Centroids& delta_centroids,
    std::span<const ChanceObservation> observations, const CompositionPriors& priors) {
  CompositionTerms t;
  const GaussianMixture assist_mix(assist_centroids, assist.sigma);
  const GaussianMixture delta_mix(delta_centroids, delta.sigma);
  const auto players = index.player_count();

  for (const auto& obs : observations) {
    std::size_t a = 0, c = 0;
    try {
      a = index.player_index(obs.assist_player);
      c = index.player_index(obs.chance_player);
    } catch (const LookupError& e) {
      throw DataIntegrityError(std::string("observation outside the player support: ") + e.what());
    }
    t.assist_player += std::log(phi.phi_assist[cell_index(index, obs.block, a)]);
    t.chance_player += std::log(phi.phi_chance[cell_index(index, obs.block, c)]);
    t.assist_location +=
        assist_mix.log_density(as_vector(obs.assist_loc), kappa_slice(index, assist, a, obs.block));
    t.delta_location +=
        delta_mix.log_density(as_vector(obs.delta), kappa_slice(index, delta, c, obs.block));
  }

  std::vector<double> conc;
  for (std::size_t team = 0; team < index.team_count(); ++team) {
    const auto size = index.roster_size(team);
    if (size == 0) continue;
    conc.assign(size, priors.phi_concentration);
    for (int b = 0; b < kBlockCount; ++b) {
      const BlockIndex block = BlockIndex::from_offset(b);
      t.priors += dirichlet_log_density(phi_slice(index, phi.phi_assist, team, block), conc);
      t.priors += dirichlet_log_density(phi_slice(index, phi.phi_chance, team, block), conc);
    }
  }
  conc.assign(index.components(), priors.kappa_concentration);
  for (std::size_t p = 0; p < players; ++p) {
    for (int b = 0; b < kBlockCount; ++b) {
      const BlockIndex block = BlockIndex::from_offset(b);
      t.priors += dirichlet_log_density(kappa_slice(index, assist, p, block), conc);
      t.priors += dirichlet_log_density(kappa_slice(index, delta, p, block), conc);
    }
  }
  for (const auto& s : assist.sigma) {
    t.priors += inverse_wishart_log_density(s, priors.sigma_scale, priors.sigma_df);
  }
  for (const auto& s : delta.sigma) {
    t.priors += inverse_wishart_log_density(s, priors.sigma_scale, priors.sigma_df);
  }
  return t;
}

double composition_log_posterior(const ModelIndex& index, const PlayerDist& phi,
                                 const MixtureParams& assist, const MixtureParams& delta,
                                 const Centroids& assist_centroids,
                                 const Centroids& delta_centroids,
                                 std::span<const ChanceObservation> observations,
                                 const CompositionPriors& priors) {
  return composition_log_posterior_terms(index, phi, assist, delta, assist_centroids,
                                         delta_centroids, observations, priors)
      .total();
}

}  // namespace chance
