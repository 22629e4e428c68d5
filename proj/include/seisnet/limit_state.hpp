#pragma once

// Network limit-state functions.  Every function is non-negative and equals
// zero exactly on the failure domain (disconnection); the informative variants
// (rp, sp) grade the safe domain by the weakest node on a surviving path:
//
//   G(z) = min_{i in path} z_i / n_path   if connected,   0 otherwise.

#include "seisnet/gmpe.hpp"
#include "seisnet/network.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace seisnet {

enum class LimitStateKind { binary, rp, sp };
enum class Aggregation { single_od, k_terminal, k_out_of_n };

/// How rp node weights -ln P(survive) are formed.
///   sample:   from each sample's own standardized margin, -ln Phi(z_i / sigma_i)
///   marginal: from the reliability indices at the current magnitude, -ln Phi(beta_i)
enum class RpWeighting { sample, marginal };

/// Returned for a connected pair whose path contains only perfect nodes.
inline constexpr double kUnfailablePair = std::numeric_limits<double>::infinity();

struct LimitStateSpec {
  LimitStateKind kind = LimitStateKind::rp;
  Aggregation aggregation = Aggregation::single_od;
  /// single_od uses the first origin and first destination.
  TerminalSpec terminals;
  /// k_out_of_n only.
  std::vector<IdPair> od_pairs;
  std::size_t k = 1;
  RpWeighting rp_weighting = RpWeighting::sample;

  /// Throws EmptyTerminalSetError, UnknownNodeError or InvalidArgumentError.
  void validate(const Network& network) const;
  /// The (origin, destination) pairs the aggregation ranges over.
  [[nodiscard]] std::vector<IdPair> pairs() const;
};

LimitStateKind parse_limit_state_kind(const std::string& text);
Aggregation parse_aggregation(const std::string& text);
RpWeighting parse_rp_weighting(const std::string& text);
std::string to_string(LimitStateKind kind);
std::string to_string(Aggregation aggregation);
std::string to_string(RpWeighting weighting);

using LimitStateFn = std::function<double(std::span<const double>)>;
/// Builds the limit state for a given moment magnitude (RP weights depend on it).
using LimitStateFactory = std::function<LimitStateFn(double mw)>;

/// -ln(1 - Phi(-beta_i)) for random nodes at magnitude `mw`, 0 for perfect
/// nodes.  Indexed by network node.
std::vector<double> rp_weights(const Network& network, const MarginDistribution& dist, double mw);

/// Stateful evaluator with private scratch; copy it once per thread.
class NetworkLimitState {
 public:
  /// rp with marginal weighting reads `node_weights` (one per node); rp with
  /// sample weighting reads `margin_std` (one per random node).
  NetworkLimitState(const Network& network, LimitStateSpec spec,
                    std::vector<double> node_weights = {}, std::vector<double> margin_std = {});

  double operator()(std::span<const double> z);

  /// Value for one pair, using the mask from the most recent call to
  /// update_mask().
  double pair_value(std::size_t origin, std::size_t destination, std::span<const double> z);
  void update_mask(std::span<const double> z) { surviving_subgraph(*network_, z, mask_); }

  [[nodiscard]] const LimitStateSpec& spec() const { return spec_; }

 private:
  double path_value(const NodePath& path, std::span<const double> z) const;
  void update_weights(std::span<const double> z);

  const Network* network_;
  LimitStateSpec spec_;
  std::vector<double> weights_;
  std::vector<double> margin_std_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  NodeMask mask_;
  PathFinder finder_;
  NodePath path_;
  std::vector<double> values_;
};

LimitStateFactory make_limit_state_factory(const Network& network, const LimitStateSpec& spec,
                                           const MarginDistribution& dist);

/// k-th largest of `values` (k = 1 is the maximum).  Throws InvalidArgumentError.
double kth_largest(std::span<const double> values, std::size_t k);

// Free-function forms, convenient for tests and one-off evaluation.
double g_binary(const Network& net, std::span<const double> z, const std::string& origin,
                const std::string& destination);
double g_rp(const Network& net, std::span<const double> z, const std::string& origin,
            const std::string& destination, std::span<const double> node_weights);
double g_sp(const Network& net, std::span<const double> z, const std::string& origin,
            const std::string& destination);
double g_k_terminal(const Network& net, std::span<const double> z, const TerminalSpec& terminals,
                    LimitStateKind kind, std::span<const double> node_weights = {});
double g_k_out_of_n(const Network& net, std::span<const double> z,
                    const std::vector<IdPair>& od_pairs, std::size_t k, LimitStateKind kind,
                    std::span<const double> node_weights = {});

}  // namespace seisnet
