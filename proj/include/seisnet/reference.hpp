#pragma once

// Independent reference solutions: crude Monte Carlo and exact two-component
// probabilities by two-dimensional quadrature.

#include "seisnet/gmpe.hpp"
#include "seisnet/limit_state.hpp"
#include "seisnet/sampler.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace seisnet {

struct McsResult {
  double p_hat = 0.0;
  std::size_t n_used = 0;
  std::size_t failures = 0;
  double standard_error = 0.0;  ///< sqrt(p (1 - p) / n)
  std::uint64_t seed = 0;
  bool cap_reached = false;  ///< target c.o.v. not met within the cap

  [[nodiscard]] double cov() const { return p_hat > 0.0 ? standard_error / p_hat : 0.0; }
};

/// Either a fixed sample size or a target c.o.v. (checked after every round
/// of batches) bounded by `cap`.
struct McsTarget {
  std::optional<std::size_t> n;
  std::optional<double> cov;
  std::size_t cap = 100'000'000;
  std::size_t batch = 1 << 15;
  std::size_t batches_per_round = 32;
};

/// Failure fraction of i.i.d. samples (failure: g(z) <= 0).  Batch b draws
/// from stream (seed, b), so the estimate is independent of the thread count.
McsResult crude_mcs(const LimitStateFn& limit_state, const GaussianMap& map,
                    const McsTarget& target, std::uint64_t seed);
/// Serial reference of crude_mcs; bit-identical result.
McsResult crude_mcs_serial(const LimitStateFn& limit_state, const GaussianMap& map,
                           const McsTarget& target, std::uint64_t seed);

/// Crude MCS at several magnitudes from one sample set: each sample drawn at
/// dist.mw_ref is shifted by dist.margin_shift(mw - mw_ref) before evaluation.
std::vector<McsResult> crude_mcs_sweep(const LimitStateFn& limit_state,
                                       const MarginDistribution& dist,
                                       std::span<const double> mws, std::size_t n,
                                       std::uint64_t seed, std::size_t batch = 1 << 15);

enum class SystemKind { series, parallel };

struct TwoComponentSystem {
  SystemKind kind = SystemKind::parallel;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double rho = 0.0;
};

/// P(X <= h, Y <= k) for standard bivariate normal with correlation rho, by
/// adaptive tensor-product Gauss–Legendre on [-8.5, h] x [-8.5, k].
/// Throws NearSingularError when |rho| > 1 - 1e-6.
double bivariate_normal_cdf(double h, double k, double rho, double abs_tol = 1e-8);

/// parallel: both fail; series: at least one fails.
double exact_two_component(const TwoComponentSystem& system);

}  // namespace seisnet
