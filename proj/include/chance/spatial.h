#pragma once

// Chance composition: who assisted, who took the chance, and where.
//
// Assist and chance players are Multinoulli draws from per-(team, block)
// probabilities phi. Assist locations and assist-to-chance offsets each follow
// an M-component Gaussian mixture whose means are fixed k-means centroids,
// whose weights kappa belong to a (player, block) and whose covariances are
// shared by all players.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "chance/ingest.h"
#include "chance/model.h"
#include "chance/random.h"

namespace chance {

inline constexpr std::size_t kDefaultComponents = 8;
inline constexpr std::size_t kKMeansMaxIterations = 200;

// Lloyd's algorithm with k-means++ seeding. Centroids come back sorted by
// (y, x). Throws DomainError when there are fewer points than clusters.
Centroids kmeans(std::span<const Eigen::Vector2d> points, std::size_t clusters,
                 std::uint64_t seed, Space space = Space::assist);

/// Mixture components with inverses and normalising constants precomputed.
class GaussianMixture {
 public:
  // Throws NumericError naming the first singular covariance.
  GaussianMixture(const Centroids& centroids, std::span<const Eigen::Matrix2d> sigma);

  std::size_t size() const { return mu_.size(); }
  double component_log_density(std::size_t m, const Eigen::Vector2d& x) const;
  double component_density(std::size_t m, const Eigen::Vector2d& x) const {
    return std::exp(component_log_density(m, x));
  }
  double log_density(const Eigen::Vector2d& x, std::span<const double> kappa) const;
  // Writes normalised assignment probabilities into `out`; returns false when
  // every component underflowed and the uniform fallback was used.
  bool responsibilities(const Eigen::Vector2d& x, std::span<const double> kappa,
                        std::span<double> out) const;

 private:
  std::vector<Eigen::Vector2d> mu_;
  std::vector<Eigen::Matrix2d> precision_;
  std::vector<double> log_norm_;
};

double gmm_log_density(const Eigen::Vector2d& point, std::span<const double> kappa,
                       const Centroids& centroids, std::span<const Eigen::Matrix2d> sigma);

std::vector<double> assignment_probabilities(const Eigen::Vector2d& point,
                                             std::span<const double> kappa,
                                             const Centroids& centroids,
                                             std::span<const Eigen::Matrix2d> sigma);

struct DirichletPosterior {
  std::vector<double> concentration;
  std::vector<double> mean() const;
};

// Conjugate update of Dirichlet(prior * 1) with Multinoulli counts.
DirichletPosterior update_phi(std::span<const double> counts, double prior_concentration = 1.0);
DirichletPosterior update_kappa(std::span<const double> assignment_counts,
                                double prior_concentration = 1.0);

struct InverseWishartParams {
  Eigen::Matrix2d scale;
  double df = 0.0;
};

// Posterior of one component covariance: scatter is taken about the fixed
// centroid, not the sample mean.
InverseWishartParams sigma_posterior(const Eigen::Vector2d& centroid,
                                     std::span<const Eigen::Vector2d> assigned_points,
                                     const Eigen::Matrix2d& prior_scale, double prior_df);

Eigen::Matrix2d update_sigma(std::size_t component, std::span<const Eigen::Vector2d> assigned_points,
                             const Centroids& centroids, const Eigen::Matrix2d& prior_scale,
                             double prior_df, StreamRng& rng);

struct CompositionPriors {
  double phi_concentration = 1.0;
  double kappa_concentration = 1.0;
  Eigen::Matrix2d sigma_scale = Eigen::Matrix2d::Identity();
  double sigma_df = 2.0;
};

struct CompositionTerms {
  double assist_player = 0.0;
  double chance_player = 0.0;
  double assist_location = 0.0;
  double delta_location = 0.0;
  double priors = 0.0;
  double total() const {
    return assist_player + chance_player + assist_location + delta_location + priors;
  }
};

// Observations must reference players in the index (DataIntegrityError otherwise).
CompositionTerms composition_log_posterior_terms(
    const ModelIndex& index, const PlayerDist& phi, const MixtureParams& assist,
    const MixtureParams& delta, const Centroids& assist_centroids, const Centroids& delta_centroids,
    std::span<const ChanceObservation> observations, const CompositionPriors& priors = {});

double composition_log_posterior(const ModelIndex& index, const PlayerDist& phi,
                                 const MixtureParams& assist, const MixtureParams& delta,
                                 const Centroids& assist_centroids,
                                 const Centroids& delta_centroids,
                                 std::span<const ChanceObservation> observations,
                                 const CompositionPriors& priors = {});

inline Eigen::Vector2d as_vector(const PitchLocation& p) { return {p.x, p.y}; }
inline Eigen::Vector2d as_vector(const DeltaLocation& d) { return {d.dx, d.dy}; }

}  // namespace chance
