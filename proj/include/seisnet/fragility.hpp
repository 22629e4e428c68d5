#pragma once

// Fragility curves over moment magnitude from a single specialized subset
// simulation.  Because only the mean of z depends on Mw, the failure domain
// at the k-th grid magnitude can be written in terms of samples drawn at the
// largest magnitude:
//
//   F_k = { G(z(Mw_1) + (k - 1) dz) <= 0 },   dz = z(Mw_2) - z(Mw_1),
//
// so each grid point is one more nested level of the same run.

#include "seisnet/error.hpp"
#include "seisnet/limit_state.hpp"
#include "seisnet/subset_sim.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace seisnet {

/// Magnitudes mw with lo < mw <= hi (lo inclusive for the last interval).
struct MagnitudeInterval {
  double hi = 0.0;
  double lo = 0.0;
};

class MagnitudeGrid {
 public:
  /// Throws InvalidArgumentError unless mw_max > mw_min, step > 0, the step
  /// divides every span and the intervals partition [mw_min, mw_max].
  MagnitudeGrid(double mw_max, double mw_min, double step,
                std::vector<MagnitudeInterval> intervals = {});

  [[nodiscard]] double mw_max() const { return mw_max_; }
  [[nodiscard]] double mw_min() const { return mw_min_; }
  [[nodiscard]] double step() const { return step_; }
  [[nodiscard]] const std::vector<MagnitudeInterval>& intervals() const { return intervals_; }

  /// Descending grid: mw_max, mw_max - step, ..., mw_min.
  [[nodiscard]] std::vector<double> magnitudes() const;
  [[nodiscard]] std::vector<double> interval_magnitudes(std::size_t interval) const;

 private:
  double mw_max_;
  double mw_min_;
  double step_;
  std::vector<MagnitudeInterval> intervals_;
};

struct FragilityPoint {
  double mw = 0.0;
  double p_hat = 0.0;
  std::size_t n_g = 0;      ///< evaluations spent reaching this point
  std::size_t n_g_cum = 0;  ///< cumulative evaluations along the curve
  std::size_t sublevels = 0;  ///< adaptive p0 levels inserted before this point
  std::size_t interval = 0;
};

struct FragilityCurve {
  std::string damage_state;
  std::vector<FragilityPoint> points;
  /// Evaluations of the next shifted function on an existing population
  /// (bookkeeping only; N_G counts fresh samples).
  std::size_t reevaluations = 0;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t total_evaluations() const {
    return points.empty() ? 0 : points.back().n_g_cum;
  }
};

/// Raised when a conditional population cannot be formed; carries the points
/// computed so far.
class PartialCurveError : public Error {
 public:
  PartialCurveError(const std::string& what, FragilityCurve partial)
      : Error(what), partial_(std::move(partial)) {}
  [[nodiscard]] const FragilityCurve& partial() const { return partial_; }

 private:
  FragilityCurve partial_;
};

struct DamageState {
  std::string label;
  double capacity_median = 0.0;
  double capacity_log_std = 0.0;
};

struct DamageStateSet {
  std::vector<DamageState> states;

  /// Throws InvalidArgumentError unless medians strictly increase.
  void validate() const;
  /// slight / moderate / extensive / collapse bridge capacities.
  static DamageStateSet hazus4();
};

/// G evaluated at z + (k - 1) dz; k = 1 is the base function.
LimitStateFn shifted_limit_state(LimitStateFn base, std::size_t k, Eigen::VectorXd dz);

/// One specialized pass over the descending, equally spaced magnitudes `mws`.
FragilityCurve run_specialized_ss(const LimitStateFactory& factory,
                                  const MarginDistribution& dist, std::span<const double> mws,
                                  const SsConfig& config);
/// Whole grid in one pass (intervals ignored).
FragilityCurve run_specialized_ss(const LimitStateFactory& factory,
                                  const MarginDistribution& dist, const MagnitudeGrid& grid,
                                  const SsConfig& config);

/// Seed of the i-th interval of a divided run; interval 0 keeps the master seed.
std::uint64_t interval_seed(std::uint64_t master, std::size_t interval);

/// Independent specialized pass per interval, concatenated.
FragilityCurve run_divided(const LimitStateFactory& factory, const MarginDistribution& dist,
                           const MagnitudeGrid& grid, const SsConfig& config);

/// One divided run per damage state with that capacity substituted into every
/// failure-prone component.
std::vector<FragilityCurve> multi_state_curves(const Network& network, const SeismicModel& model,
                                               const LimitStateSpec& spec,
                                               const DamageStateSet& damage_states,
                                               const MagnitudeGrid& grid, const SsConfig& config,
                                               double mw_ref);

/// Repeated curves with per-repetition seeds, OpenMP-parallel.
using CurveRunner = std::function<FragilityCurve(const SsConfig&)>;
std::vector<FragilityCurve> repeat_curves(const CurveRunner& runner, const SsConfig& config,
                                          std::size_t reps);

struct CurveStatistics {
  double mw = 0.0;
  double mean_p = 0.0;
  double cov = 0.0;
  double p_lo = 0.0;  ///< 2.5 % percentile
  double p_hi = 0.0;  ///< 97.5 % percentile
  double mean_n_g = 0.0;
  double mean_n_g_cum = 0.0;
};

/// Pointwise statistics over repetitions that share one magnitude grid.
std::vector<CurveStatistics> curve_statistics(std::span<const FragilityCurve> curves);

}  // namespace seisnet
