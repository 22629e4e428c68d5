#pragma once

// Subset simulation at a fixed magnitude:
//
//   P_f = p0^(m-1) * (1/n) * sum_j I(g(z_j) <= 0 | level m-1),
//
// with intermediate thresholds set to the p0-quantile of each level and
// conditional levels populated by exact-flow HMC chains.

#include "seisnet/error.hpp"
#include "seisnet/limit_state.hpp"
#include "seisnet/sampler.hpp"

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace seisnet {

struct SsConfig {
  std::size_t n = 1000;  ///< samples per level
  double p0 = 0.1;       ///< conditional probability of intermediate levels
  std::size_t max_levels = 20;
  double t_f = std::numbers::pi / 4.0;
  std::uint64_t seed = 1;

  /// Throws InvalidArgumentError unless 0 < p0 < 1, n * p0 is a positive
  /// integer and max_levels >= 1.
  void validate() const;
  [[nodiscard]] std::size_t seeds_per_level() const;
};

struct SsLevel {
  double threshold = 0.0;
  double conditional_probability = 0.0;
  std::size_t evaluations = 0;  ///< fresh limit-state evaluations spent on this level
  double acceptance_rate = 1.0;
};

struct SsResult {
  double p_hat = 0.0;
  std::vector<SsLevel> levels;  ///< level 0 first; the last has threshold 0
  std::size_t n_g = 0;
  double wall_seconds = 0.0;
  bool zero_failures = false;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t num_levels() const { return levels.size(); }
};

/// Raised when max_levels is reached before the quantile hits zero.  The
/// partial result holds p0^(m-1) times the failure fraction of the last level.
class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, SsResult partial)
      : Error(what), partial_(std::move(partial)) {}
  [[nodiscard]] const SsResult& partial() const { return partial_; }

 private:
  SsResult partial_;
};

/// The ceil(p0 n)-th smallest value; 0 when that value is 0 or ties with the
/// sample maximum (no smaller domain can be formed).
double quantile_threshold(std::span<const double> values, double p0);

/// Indices of the ceil(p0 n) smallest values, ties by lowest index.
std::vector<std::size_t> lowest_indices(std::span<const double> values, std::size_t count);

/// Outcome of descending from an already-evaluated population to {g <= 0}.
struct Descent {
  double probability = 1.0;  ///< product of the conditional probabilities
  std::vector<SsLevel> levels;
  std::size_t evaluations = 0;
  bool converged = false;
  bool zero_failures = false;  ///< converged with no sample in the failure domain
};

/// Core adaptive loop shared by run_ss and the fragility runs.  `population`
/// must carry current g values; on return it is the last level's population.
/// `level_tag` is advanced once per populated level.
Descent descend_to_failure(std::vector<ChainState>& population, const LimitStateFn& limit_state,
                           const GaussianMap& map, const SsConfig& config,
                           std::uint64_t& level_tag, std::size_t max_new_levels);

SsResult run_ss(const LimitStateFn& limit_state, const GaussianMap& map, const SsConfig& config);

struct RepeatSummary {
  double mean_p = 0.0;
  double std_p = 0.0;
  double cov = 0.0;
  double mean_n_g = 0.0;
  double eff = 0.0;  ///< cov * sqrt(mean N_G)
  double mean_wall_seconds = 0.0;
  std::size_t failed_runs = 0;  ///< runs that did not converge (excluded)
  std::vector<SsResult> runs;
};

/// Per-repetition seeds are derive_seed(config.seed, r).
std::uint64_t repetition_seed(std::uint64_t master, std::size_t rep);

/// Independent repetitions, OpenMP-parallel across repetitions.
RepeatSummary repeat_ss(const LimitStateFn& limit_state, const GaussianMap& map,
                        const SsConfig& config, std::size_t reps);
/// Single-threaded reference; produces the same estimates as repeat_ss.
RepeatSummary repeat_ss_serial(const LimitStateFn& limit_state, const GaussianMap& map,
                               const SsConfig& config, std::size_t reps);

/// Mean, sample standard deviation (n-1), c.o.v. and eff of run results.
RepeatSummary summarize_runs(std::vector<SsResult> runs);

}  // namespace seisnet
