#pragma once

// Unconditional and conditional sampling of the margin vector.  All sampling
// happens in a standard-normal space u; margins are z = mu + L u with
// L L^T = diag(sigma) R_zz diag(sigma).

#include "seisnet/gmpe.hpp"
#include "seisnet/limit_state.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace seisnet {

/// Mixes a master seed with stream coordinates (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

/// Deterministic normal-variate stream: identical (seed, stream) give
/// identical draws.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  void fill_normal(Eigen::Ref<Eigen::VectorXd> out);

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

class GaussianMap {
 public:
  GaussianMap(Eigen::VectorXd mu, const Eigen::MatrixXd& covariance);
  /// Margins of `dist` at magnitude `mw`.
  GaussianMap(const MarginDistribution& dist, double mw);

  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(mu_.size()); }
  [[nodiscard]] const Eigen::VectorXd& mu() const { return mu_; }
  [[nodiscard]] const Eigen::MatrixXd& chol() const { return chol_; }
  [[nodiscard]] Eigen::VectorXd map(const Eigen::VectorXd& u) const { return mu_ + chol_ * u; }
  void map_into(const Eigen::VectorXd& u, Eigen::VectorXd& z) const;
  /// Same factor, different mean.
  [[nodiscard]] GaussianMap with_mean(Eigen::VectorXd mu) const;

 private:
  GaussianMap() = default;
  Eigen::VectorXd mu_;
  Eigen::MatrixXd chol_;
};

struct ChainState {
  Eigen::VectorXd u;
  Eigen::VectorXd z;
  double g = 0.0;  ///< cached limit-state value at z
  std::size_t chain = 0;
};

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

/// n i.i.d. states; g is evaluated when `limit_state` is given.
std::vector<ChainState> sample_unconditional(const GaussianMap& map, std::size_t n,
                                             RngStream& rng, LimitStateFn* limit_state = nullptr);

struct StepResult {
  ChainState state;
  bool accepted = false;
};

/// One exact-flow HMC move targeting the standard normal restricted to
/// {g(z) <= threshold}: fresh momentum p, u' = u cos(t_f) + p sin(t_f),
/// accepted iff the proposal stays in the domain.  Always evaluates g once.
StepResult hmc_conditional_step(const GaussianMap& map, const ChainState& state,
                                LimitStateFn& limit_state, double threshold, double t_f,
                                RngStream& rng);

struct PopulateResult {
  std::vector<ChainState> states;  ///< chain-major, each chain starts with its seed
  std::size_t evaluations = 0;
  std::size_t accepted = 0;
};

/// Grows `seeds` into n states inside {g <= threshold}.  Chains get
/// floor(n / s) or ceil(n / s) states; chain c draws from the stream
/// (seed, derive_seed(level_tag, c)), so the result does not depend on the
/// thread count.  `storage` is recycled for the output states (pass the
/// spent population to avoid reallocating).  Throws CannotAdvanceLevelError
/// on empty seeds.
PopulateResult populate_level(const GaussianMap& map, std::span<const ChainState> seeds,
                              std::size_t n, const LimitStateFn& limit_state, double threshold,
                              double t_f, std::uint64_t seed, std::uint64_t level_tag,
                              std::vector<ChainState> storage = {});

}  // namespace seisnet
