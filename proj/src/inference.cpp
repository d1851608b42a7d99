#include "chance/inference.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <thread>

#include "chance/draws_io.h"
#include "chance/errors.h"
#include "chance/log.h"

namespace chance {

void SamplerConfig::validate() const {
  if (iterations == 0) throw DomainError("iterations must be positive");
  if (burn_in >= iterations) throw DomainError("burn_in must be smaller than iterations");
  if (thin == 0) throw DomainError("thin must be at least 1");
  if (chains == 0) throw DomainError("chains must be at least 1");
  if (rate_substeps == 0) throw DomainError("rate_substeps must be at least 1");
  if (!(adapt_target > 0.0 && adapt_target < 1.0)) throw DomainError("adapt_target must be in (0, 1)");
  for (double s : {initial_step.theta, initial_step.gamma, initial_step.alpha, initial_step.beta,
                   initial_step.tau}) {
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("initial step sizes must be positive");
  }
  if (!(rate_scale > 0.0)) throw DomainError("rate_scale must be positive");
}

Eigen::Vector2d space_extent(Space space) {
  return space == Space::assist ? Eigen::Vector2d(2.0 * kPitchHalfWidth, kPitchLength)
                                : Eigen::Vector2d(4.0 * kPitchHalfWidth, 2.0 * kPitchLength);
}

Eigen::Matrix2d sigma_prior_scale(const FitConfig& config, Space space) {
  const Eigen::Matrix2d& s = config.priors.composition.sigma_scale;
  if (!config.mixture.rescale_coordinates) return s;
  const Eigen::Matrix2d d = space_extent(space).asDiagonal();
  return d * s * d;
}

namespace {

Centroids centroids_for(std::span<const Eigen::Vector2d> points, const MixtureOptions& mixture,
                        Space space) {
  if (!mixture.rescale_coordinates) {
    return kmeans(points, mixture.components, mixture.kmeans_seed, space);
  }
  const Eigen::Vector2d ext = space_extent(space);
  std::vector<Eigen::Vector2d> scaled;
  scaled.reserve(points.size());
  for (const auto& p : points) scaled.push_back(p.cwiseQuotient(ext));
  Centroids c = kmeans(scaled, mixture.components, mixture.kmeans_seed, space);
  for (auto& mu : c.mu) mu = mu.cwiseProduct(ext);
  return c;
}

}  // namespace

FitData prepare_data(const BlockPanel& panel, const std::vector<ChanceObservation>& chances,
                     std::map<std::string, std::vector<std::string>> rosters,
                     const MixtureOptions& mixture, const std::optional<Centroids>& assist_centroids,
                     const std::optional<Centroids>& delta_centroids) {
  if (panel.empty()) throw DomainError("cannot fit an empty panel");
  for (const auto& row : panel) {
    rosters[row.team_id];
    rosters[row.opponent_id];
  }
  for (const auto& c : chances) {
    if (c.assist_player.team_id != c.team_id || c.chance_player.team_id != c.team_id) {
      throw DataIntegrityError("chance in fixture " + c.fixture_id +
                               " pairs players from different teams");
    }
    auto& roster = rosters[c.team_id];
    roster.push_back(c.assist_player.player_id);
    roster.push_back(c.chance_player.player_id);
  }

  FitData data;
  data.index = ModelIndex(std::move(rosters), mixture.components);
  data.rows = to_rate_rows(panel, data.index);
  data.chances = chances;

  std::vector<Eigen::Vector2d> assist_points, delta_points;
  for (const auto& c : chances) {
    assist_points.push_back(as_vector(c.assist_loc));
    delta_points.push_back(as_vector(c.delta));
  }
  data.assist_centroids =
      assist_centroids ? *assist_centroids : centroids_for(assist_points, mixture, Space::assist);
  data.delta_centroids =
      delta_centroids ? *delta_centroids : centroids_for(delta_points, mixture, Space::delta);
  if (data.assist_centroids.size() != mixture.components ||
      data.delta_centroids.size() != mixture.components) {
    throw DomainError("centroid count does not match the configured number of components");
  }
  data.assist_centroids.space = Space::assist;
  data.delta_centroids.space = Space::delta;
  return data;
}

const char* to_string(RateGroup group) {
  switch (group) {
    case RateGroup::theta: return "theta";
    case RateGroup::gamma: return "gamma";
    case RateGroup::alpha: return "alpha";
    case RateGroup::beta: return "beta";
    case RateGroup::tau: return "tau";
  }
  return "?";
}

double AcceptanceStats::rate(RateGroup g) const {
  const auto i = static_cast<std::size_t>(g);
  return proposed[i] == 0 ? 0.0 : static_cast<double>(accepted[i]) / static_cast<double>(proposed[i]);
}

AdaptiveStep::AdaptiveStep(double initial_step, double target)
    : log_step_(std::log(initial_step)), target_(target) {
  if (!(initial_step > 0.0)) throw DomainError("step size must be positive");
}

void AdaptiveStep::update(bool accepted) {
  if (frozen_) return;
  const double gain = std::pow(static_cast<double>(n_ + 1), -0.6);
  log_step_ += gain * ((accepted ? 1.0 : 0.0) - target_);
  log_step_ = std::clamp(log_step_, -20.0, 5.0);
  ++n_;
}

namespace {

bool metropolis_accept(double current, double proposed, StreamRng& rng) {
  if (std::isnan(proposed) || proposed == -std::numeric_limits<double>::infinity()) return false;
  const double log_ratio = proposed - current;
  if (log_ratio >= 0.0) return true;
  return std::log(rng.uniform()) < log_ratio;
}

}  // namespace

RwmResult rwm_update(std::span<const double> current, double current_log_target, double step,
                     const std::function<double(std::span<const double>)>& log_target,
                     StreamRng& rng) {
  if (!std::isfinite(current_log_target)) {
    throw InferenceError("random-walk Metropolis started from a state with non-finite log target");
  }
  std::vector<double> proposal(current.begin(), current.end());
  for (auto& v : proposal) v += step * sample_normal(rng);
  const double proposed = log_target(proposal);
  RwmResult r;
  if (metropolis_accept(current_log_target, proposed, rng)) {
    r.values = std::move(proposal);
    r.log_target = proposed;
    r.accepted = true;
  } else {
    r.values.assign(current.begin(), current.end());
    r.log_target = current_log_target;
  }
  return r;
}

RwmResult rwm_update(std::span<const double> current, double step,
                     const std::function<double(std::span<const double>)>& log_target,
                     StreamRng& rng) {
  return rwm_update(current, log_target(current), step, log_target, rng);
}

double tau_conditional_log_density(double tau, std::span<const double> theta_free,
                                   const RatePriors& priors) {
  if (!(tau > 0.0)) return -std::numeric_limits<double>::infinity();
  return theta_log_prior(theta_free, tau) + tau_log_prior(tau, priors);
}

TauDraw update_tau(double current, std::span<const double> theta_free, const RatePriors& priors,
                   double log_step, StreamRng& rng) {
  if (!(current > 0.0)) throw DomainError("tau must be positive");
  // Random walk on u = log tau; the Jacobian adds u to the log target.
  const double u = std::log(current);
  const double u_new = u + std::exp(log_step) * sample_normal(rng);
  const double tau_new = std::exp(u_new);
  if (!(tau_new > 0.0) || !std::isfinite(tau_new)) return {current, false};
  const double cur = tau_conditional_log_density(current, theta_free, priors) + u;
  const double prop = tau_conditional_log_density(tau_new, theta_free, priors) + u_new;
  if (metropolis_accept(cur, prop, rng)) return {tau_new, true};
  return {current, false};
}

void parallel_for(std::size_t workers, std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        const std::size_t begin = n * t / threads;
        const std::size_t end = n * (t + 1) / threads;
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

// Stream groups; units within a group are blocks, cells, observations or components.
enum StreamGroup : std::uint64_t {
  kRateStream = 1,
  kPhiAssistStream,
  kPhiChanceStream,
  kKappaAssistStream,
  kSigmaAssistStream,
  kZAssistStream,
  kKappaDeltaStream,
  kSigmaDeltaStream,
  kZDeltaStream,
};

struct PreparedObservation {
  std::size_t team = 0;
  BlockIndex block{1};
  std::size_t assist_player = 0;
  std::size_t chance_player = 0;
  Eigen::Vector2d assist;
  Eigen::Vector2d delta;
};

class ChainSampler {
 public:
  ChainSampler(const FitData& data, const FitConfig& config, std::uint64_t seed, ModelState state)
      : data_(data),
        config_(config),
        sc_(config.sampler),
        seed_(seed),
        state_(std::move(state)),
        index_(data.index),
        players_(index_.player_count()),
        m_(index_.components()) {
    prepare_rows();
    prepare_observations();
    const auto& st = sc_.initial_step;
    for (int b = 0; b < kBlockCount; ++b) {
      theta_step_.emplace_back(st.theta, sc_.adapt_target);
      gamma_step_.emplace_back(st.gamma, sc_.adapt_target);
    }
    alpha_step_.emplace_back(st.alpha, sc_.adapt_target);
    beta_step_.emplace_back(st.beta, sc_.adapt_target);
    tau_step_.emplace_back(st.tau, sc_.adapt_target);
    assist_scale_ = sigma_prior_scale(config, Space::assist);
    delta_scale_ = sigma_prior_scale(config, Space::delta);
    check_initial_state();
    initial_assignments();
  }

  void run(std::size_t chain, std::vector<Draw>& out, AcceptanceStats& stats) {
    const std::size_t adapt_until = std::min(sc_.adapt_window, sc_.burn_in);
    for (std::size_t it = 0; it < sc_.iterations; ++it) {
      if (it == adapt_until) freeze_adaptation();
      const bool record = it >= sc_.burn_in;
      if (sc_.update_rate) update_rate(it, record ? &stats : nullptr);
      sample_players(it);
      update_space(it, Space::assist);
      update_space(it, Space::delta);
      if (record && (it - sc_.burn_in + 1) % sc_.thin == 0) {
        out.push_back({chain, it, state_.rate, state_.players, state_.assist, state_.delta});
      }
    }
  }

 private:
  void prepare_rows() {
    const auto& rows = data_.rows;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto b = rows[i].block.offset();
      block_rows_[b].push_back(i);
      if (rows[i].is_home) home_rows_[b].push_back(i);
      if (rows[i].game_state != 0) g_rows_.push_back(i);
      if (rows[i].red_state != 0) r_rows_.push_back(i);
    }
  }

  void prepare_observations() {
    phi_assist_counts_.assign(players_ * kBlockCount, 0.0);
    phi_chance_counts_.assign(players_ * kBlockCount, 0.0);
    for (const auto& c : data_.chances) {
      PreparedObservation o;
      o.team = index_.team_index(c.team_id);
      o.block = c.block;
      o.assist_player = index_.player_index(c.assist_player);
      o.chance_player = index_.player_index(c.chance_player);
      o.assist = as_vector(c.assist_loc);
      o.delta = as_vector(c.delta);
      phi_assist_counts_[cell_index(index_, o.block, o.assist_player)] += 1.0;
      phi_chance_counts_[cell_index(index_, o.block, o.chance_player)] += 1.0;
      obs_.push_back(o);
    }
  }

  void check_initial_state() {
    const auto& r = state_.rate;
    if (r.team_count != index_.team_count() || r.theta.size() != index_.team_count() * kBlockCount) {
      throw InferenceError("initial rate parameters do not match the team index");
    }
    if (state_.players.phi_assist.size() != players_ * kBlockCount ||
        state_.players.phi_chance.size() != players_ * kBlockCount) {
      throw InferenceError("initial player probabilities do not match the roster index");
    }
    for (const MixtureParams* mp : {&state_.assist, &state_.delta}) {
      if (mp->kappa.size() != players_ * kBlockCount * m_ || mp->sigma.size() != m_) {
        throw InferenceError("initial mixture parameters do not match the roster index");
      }
    }
    const double ll = log_likelihood(r, data_.rows, sc_.rate_scale);
    if (!std::isfinite(ll)) throw InferenceError("rate log-likelihood is not finite at the initial state");
    const auto priors = log_prior_terms(r, config_.priors.rate);
    const std::pair<const char*, double> terms[] = {
        {"theta prior", priors.theta}, {"gamma prior", priors.gamma}, {"alpha prior", priors.alpha},
        {"beta prior", priors.beta},   {"tau prior", priors.tau}};
    for (const auto& [name, v] : terms) {
      if (!std::isfinite(v)) throw InferenceError(std::string(name) + " is not finite at the initial state");
    }
  }

  void initial_assignments() {
    z_assist_.resize(obs_.size());
    z_delta_.resize(obs_.size());
    for (std::size_t i = 0; i < obs_.size(); ++i) {
      z_assist_[i] = nearest_centroid(data_.assist_centroids, obs_[i].assist);
      z_delta_[i] = nearest_centroid(data_.delta_centroids, obs_[i].delta);
    }
  }

  static std::size_t nearest_centroid(const Centroids& c, const Eigen::Vector2d& x) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < c.size(); ++m) {
      const double d = (x - c.mu[m]).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = m;
      }
    }
    return best;
  }

  void freeze_adaptation() {
    for (auto* group : {&theta_step_, &gamma_step_, &alpha_step_, &beta_step_, &tau_step_}) {
      for (auto& s : *group) s.freeze();
    }
  }

  double rows_ll(const RateParams& p, const std::vector<std::size_t>& which) const {
    double total = 0.0;
    try {
      for (auto i : which) total += row_log_likelihood(p, data_.rows[i], sc_.rate_scale);
    } catch (const NumericError&) {
      // an overflowing proposal is simply rejected
      return -std::numeric_limits<double>::infinity();
    }
    return total;
  }

  void update_rate(std::size_t it, AcceptanceStats* stats) {
    StreamRng rng = StreamRng::keyed(seed_, it, kRateStream, 0);
    auto& p = state_.rate;
    const auto& priors = config_.priors.rate;
    const std::size_t teams = p.team_count;
    auto note = [&](RateGroup g, AdaptiveStep& step, bool ok) {
      step.update(ok);
      if (stats) stats->record(g, ok);
    };

    for (std::size_t sub = 0; sub < sc_.rate_substeps; ++sub) {
      for (int b = 0; b < kBlockCount; ++b) {
        const BlockIndex block = BlockIndex::from_offset(b);
        if (teams >= 2) {
          // Proposal: isotropic noise projected onto the sum-to-zero plane.
          const auto free_cur = p.free_theta(block);
          const double cur = rows_ll(p, block_rows_[b]) + theta_log_prior(free_cur, p.tau);
          std::vector<double> eps(teams);
          double mean = 0.0;
          for (auto& e : eps) {
            e = theta_step_[b].step() * sample_normal(rng);
            mean += e;
          }
          mean /= static_cast<double>(teams);
          std::vector<double> free_new(free_cur);
          for (std::size_t j = 0; j + 1 < teams; ++j) free_new[j] += eps[j] - mean;
          p.set_free_theta(block, free_new);
          const double prop = rows_ll(p, block_rows_[b]) + theta_log_prior(free_new, p.tau);
          const bool ok = metropolis_accept(cur, prop, rng);
          if (!ok) p.set_free_theta(block, free_cur);
          note(RateGroup::theta, theta_step_[b], ok);
        }
        {
          const double old = p.gamma[b];
          const double cur = rows_ll(p, home_rows_[b]) + normal_log_density(old, 0.0, priors.effect_sd);
          p.gamma[b] = old + gamma_step_[b].step() * sample_normal(rng);
          const double prop =
              rows_ll(p, home_rows_[b]) + normal_log_density(p.gamma[b], 0.0, priors.effect_sd);
          const bool ok = metropolis_accept(cur, prop, rng);
          if (!ok) p.gamma[b] = old;
          note(RateGroup::gamma, gamma_step_[b], ok);
        }
      }
      scalar_update(p.alpha, g_rows_, alpha_step_[0], RateGroup::alpha, rng, note);
      scalar_update(p.beta, r_rows_, beta_step_[0], RateGroup::beta, rng, note);
      const auto free = p.all_free_theta();
      const auto t = update_tau(p.tau, free, priors, std::log(tau_step_[0].step()), rng);
      p.tau = t.tau;
      note(RateGroup::tau, tau_step_[0], t.accepted);
    }
  }

  template <typename Note>
  void scalar_update(double& value, const std::vector<std::size_t>& rows, AdaptiveStep& step,
                     RateGroup group, StreamRng& rng, Note& note) {
    const auto& p = state_.rate;
    const double sd = config_.priors.rate.effect_sd;
    const double old = value;
    const double cur = rows_ll(p, rows) + normal_log_density(old, 0.0, sd);
    value = old + step.step() * sample_normal(rng);
    const double prop = rows_ll(p, rows) + normal_log_density(value, 0.0, sd);
    const bool ok = metropolis_accept(cur, prop, rng);
    if (!ok) value = old;
    note(group, step, ok);
  }

  void sample_players(std::size_t it) {
    const double conc = config_.priors.composition.phi_concentration;
    const std::size_t teams = index_.team_count();
    auto run = [&](std::vector<double>& phi, const std::vector<double>& counts, std::uint64_t group) {
      parallel_for(sc_.workers, teams * kBlockCount, [&](std::size_t unit) {
        const std::size_t team = unit / kBlockCount;
        const BlockIndex block = BlockIndex::from_offset(static_cast<int>(unit % kBlockCount));
        if (index_.roster_size(team) == 0) return;
        auto c = phi_slice(index_, counts, team, block);
        const auto post = update_phi(c, conc);
        StreamRng rng = StreamRng::keyed(seed_, it, group, unit);
        const auto draw = sample_dirichlet(rng, post.concentration);
        auto target = phi_slice(index_, phi, team, block);
        std::copy(draw.begin(), draw.end(), target.begin());
      });
    };
    run(state_.players.phi_assist, phi_assist_counts_, kPhiAssistStream);
    run(state_.players.phi_chance, phi_chance_counts_, kPhiChanceStream);
  }

  void update_space(std::size_t it, Space space) {
    const bool assist = space == Space::assist;
    MixtureParams& mp = assist ? state_.assist : state_.delta;
    std::vector<std::size_t>& z = assist ? z_assist_ : z_delta_;
    const Centroids& centroids = assist ? data_.assist_centroids : data_.delta_centroids;
    const Eigen::Matrix2d& prior_scale = assist ? assist_scale_ : delta_scale_;
    const auto point = [&](std::size_t i) -> const Eigen::Vector2d& {
      return assist ? obs_[i].assist : obs_[i].delta;
    };
    const auto owner = [&](std::size_t i) {
      return assist ? obs_[i].assist_player : obs_[i].chance_player;
    };
    const auto& priors = config_.priors.composition;

    // Phase 1: kappa and Sigma given the current assignments.
    std::vector<double> counts(players_ * kBlockCount * m_, 0.0);
    for (std::size_t i = 0; i < obs_.size(); ++i) {
      counts[cell_index(index_, obs_[i].block, owner(i)) * m_ + z[i]] += 1.0;
    }
    parallel_for(sc_.workers, players_ * kBlockCount, [&](std::size_t cell) {
      std::span<const double> c(counts.data() + cell * m_, m_);
      const auto post = update_kappa(c, priors.kappa_concentration);
      StreamRng rng = StreamRng::keyed(seed_, it, assist ? kKappaAssistStream : kKappaDeltaStream, cell);
      const auto draw = sample_dirichlet(rng, post.concentration);
      std::copy(draw.begin(), draw.end(), mp.kappa.begin() + static_cast<std::ptrdiff_t>(cell * m_));
    });
    if (sc_.update_sigma) {
      std::vector<std::vector<Eigen::Vector2d>> members(m_);
      for (std::size_t i = 0; i < obs_.size(); ++i) members[z[i]].push_back(point(i));
      parallel_for(sc_.workers, m_, [&](std::size_t m) {
        StreamRng rng = StreamRng::keyed(seed_, it, assist ? kSigmaAssistStream : kSigmaDeltaStream, m);
        mp.sigma[m] = chance::update_sigma(m, members[m], centroids, prior_scale, priors.sigma_df, rng);
      });
    }

    // Phase 2: assignments given kappa and Sigma.
    const GaussianMixture mixture(centroids, mp.sigma);
    parallel_for(sc_.workers, obs_.size(), [&](std::size_t i) {
      std::vector<double> resp(m_);
      const auto kappa = kappa_slice(index_, mp, owner(i), obs_[i].block);
      if (!mixture.responsibilities(point(i), kappa, resp)) {
        warn("every mixture component underflowed for an observation; assignment drawn uniformly");
      }
      StreamRng rng = StreamRng::keyed(seed_, it, assist ? kZAssistStream : kZDeltaStream, i);
      z[i] = sample_categorical(rng, resp);
    });
  }

  const FitData& data_;
  const FitConfig& config_;
  const SamplerConfig& sc_;
  std::uint64_t seed_;
  ModelState state_;
  const ModelIndex& index_;
  std::size_t players_;
  std::size_t m_;

  std::array<std::vector<std::size_t>, kBlockCount> block_rows_;
  std::array<std::vector<std::size_t>, kBlockCount> home_rows_;
  std::vector<std::size_t> g_rows_;
  std::vector<std::size_t> r_rows_;
  std::vector<PreparedObservation> obs_;
  std::vector<double> phi_assist_counts_;
  std::vector<double> phi_chance_counts_;
  std::vector<std::size_t> z_assist_;
  std::vector<std::size_t> z_delta_;
  std::vector<AdaptiveStep> theta_step_, gamma_step_, alpha_step_, beta_step_, tau_step_;
  Eigen::Matrix2d assist_scale_;
  Eigen::Matrix2d delta_scale_;
};

}  // namespace

PosteriorDraws fit(const FitData& data, const FitConfig& config,
                   const std::optional<ModelState>& initial) {
  config.sampler.validate();
  if (data.rows.empty()) throw DomainError("cannot fit an empty panel");
  if (data.assist_centroids.size() != data.index.components() ||
      data.delta_centroids.size() != data.index.components()) {
    throw DomainError("centroid count does not match the number of mixture components");
  }

  PosteriorDraws out;
  out.config = config;
  out.index = data.index;
  out.assist_centroids = data.assist_centroids;
  out.delta_centroids = data.delta_centroids;
  out.data_checksum = data_checksum(data);
  out.centroid_checksum = centroid_checksum(data.assist_centroids, data.delta_centroids);
  out.draws.reserve(config.sampler.chains * config.sampler.stored_per_chain());
  out.acceptance.resize(config.sampler.chains);

  for (std::size_t c = 0; c < config.sampler.chains; ++c) {
    const std::uint64_t seed = c == 0 ? config.sampler.seed : derive_seed(config.sampler.seed, c);
    ChainSampler sampler(data, config, seed, initial ? *initial : initial_state(data.index));
    sampler.run(c, out.draws, out.acceptance[c]);
  }
  return out;
}

}  // namespace chance
