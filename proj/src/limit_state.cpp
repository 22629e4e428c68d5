#include "seisnet/limit_state.hpp"

#include "seisnet/error.hpp"
#include "seisnet/normal.hpp"

#include <algorithm>

namespace seisnet {

void LimitStateSpec::validate(const Network& network) const {
  if (aggregation == Aggregation::k_out_of_n) {
    if (od_pairs.empty()) throw EmptyTerminalSetError("k-out-of-N needs at least one OD pair");
    if (k < 1 || k > od_pairs.size()) {
      throw InvalidArgumentError("k = " + std::to_string(k) + " outside [1, " +
                                 std::to_string(od_pairs.size()) + "]");
    }
  } else if (terminals.origins.empty() || terminals.destinations.empty()) {
    throw EmptyTerminalSetError("origin and destination sets must be non-empty");
  }
  for (const auto& [o, d] : pairs()) {
    (void)network.index_of(o);
    (void)network.index_of(d);
  }
}

std::vector<IdPair> LimitStateSpec::pairs() const {
  std::vector<IdPair> out;
  switch (aggregation) {
    case Aggregation::single_od:
      if (!terminals.origins.empty() && !terminals.destinations.empty()) {
        out.emplace_back(terminals.origins.front(), terminals.destinations.front());
      }
      break;
    case Aggregation::k_terminal:
      for (const auto& o : terminals.origins) {
        for (const auto& d : terminals.destinations) out.emplace_back(o, d);
      }
      break;
    case Aggregation::k_out_of_n:
      out = od_pairs;
      break;
  }
  return out;
}

LimitStateKind parse_limit_state_kind(const std::string& text) {
  if (text == "binary") return LimitStateKind::binary;
  if (text == "rp") return LimitStateKind::rp;
  if (text == "sp") return LimitStateKind::sp;
  throw InvalidArgumentError("unknown limit-state kind '" + text + "' (binary|rp|sp)");
}

Aggregation parse_aggregation(const std::string& text) {
  if (text == "single" || text == "single-od") return Aggregation::single_od;
  if (text == "k-terminal") return Aggregation::k_terminal;
  if (text == "k-out-of-n") return Aggregation::k_out_of_n;
  throw InvalidArgumentError("unknown aggregation '" + text +
                             "' (single-od|k-terminal|k-out-of-n)");
}

RpWeighting parse_rp_weighting(const std::string& text) {
  if (text == "sample") return RpWeighting::sample;
  if (text == "marginal") return RpWeighting::marginal;
  throw InvalidArgumentError("unknown rp weighting '" + text + "' (sample|marginal)");
}

std::string to_string(RpWeighting weighting) {
  return weighting == RpWeighting::sample ? "sample" : "marginal";
}

std::string to_string(LimitStateKind kind) {
  switch (kind) {
    case LimitStateKind::binary: return "binary";
    case LimitStateKind::rp: return "rp";
    case LimitStateKind::sp: return "sp";
  }
  return "?";
}

std::string to_string(Aggregation aggregation) {
  switch (aggregation) {
    case Aggregation::single_od: return "single-od";
    case Aggregation::k_terminal: return "k-terminal";
    case Aggregation::k_out_of_n: return "k-out-of-n";
  }
  return "?";
}

std::vector<double> rp_weights(const Network& network, const MarginDistribution& dist,
                               double mw) {
  if (dist.dim() != network.random_count()) {
    throw DimensionMismatchError("margin distribution does not match network");
  }
  std::vector<double> weights(network.node_count(), 0.0);
  const Eigen::VectorXd beta = dist.reliability_indices(mw);
  for (std::size_t k = 0; k < dist.dim(); ++k) {
    // survival probability 1 - Phi(-beta) = Phi(beta)
    weights[dist.node_index[k]] = -std_normal_log_cdf(beta(static_cast<Eigen::Index>(k)));
  }
  return weights;
}

NetworkLimitState::NetworkLimitState(const Network& network, LimitStateSpec spec,
                                     std::vector<double> node_weights,
                                     std::vector<double> margin_std)
    : network_(&network),
      spec_(std::move(spec)),
      weights_(std::move(node_weights)),
      margin_std_(std::move(margin_std)) {
  spec_.validate(network);
  if (spec_.kind == LimitStateKind::rp && spec_.rp_weighting == RpWeighting::sample) {
    if (margin_std_.size() != network.random_count()) {
      throw DimensionMismatchError("sample-weighted rp needs one margin std per random node");
    }
    for (const double s : margin_std_) {
      if (!(s > 0.0)) throw InvalidArgumentError("margin std must be positive");
    }
    weights_.assign(network.node_count(), 0.0);
  } else if (spec_.kind == LimitStateKind::rp) {
    if (weights_.size() != network.node_count()) {
      throw DimensionMismatchError("rp limit state needs one weight per node");
    }
    for (const double w : weights_) {
      if (w < 0.0) throw NegativeWeightError("node weights must be non-negative");
    }
  }
  for (const auto& [o, d] : spec_.pairs()) {
    pairs_.emplace_back(network.index_of(o), network.index_of(d));
  }
  values_.resize(pairs_.size());
}

double NetworkLimitState::path_value(const NodePath& path, std::span<const double> z) const {
  double weakest = kUnfailablePair;
  std::size_t count = 0;
  for (const std::size_t v : path) {
    const std::ptrdiff_t r = network_->random_index(v);
    if (r < 0) continue;
    weakest = std::min(weakest, z[static_cast<std::size_t>(r)]);
    ++count;
  }
  if (count == 0) return kUnfailablePair;
  return weakest / static_cast<double>(count);
}

void NetworkLimitState::update_weights(std::span<const double> z) {
  const auto random = network_->random_nodes();
  for (std::size_t r = 0; r < random.size(); ++r) {
    // dead nodes are masked out of the search; their weight is irrelevant
    weights_[random[r]] = z[r] > 0.0 ? -std_normal_log_cdf(z[r] / margin_std_[r]) : 0.0;
  }
}

double NetworkLimitState::pair_value(std::size_t origin, std::size_t destination,
                                     std::span<const double> z) {
  if (!mask_[origin] || !mask_[destination]) return 0.0;
  if (spec_.kind == LimitStateKind::rp && spec_.rp_weighting == RpWeighting::sample) {
    update_weights(z);
  }
  switch (spec_.kind) {
    case LimitStateKind::binary:
      return finder_.connected(*network_, mask_, origin, destination) ? 1.0 : 0.0;
    case LimitStateKind::sp:
      finder_.bfs_from(*network_, mask_, origin);
      break;
    case LimitStateKind::rp:
      finder_.dijkstra_from(*network_, mask_, origin, weights_);
      break;
  }
  if (!finder_.reached(destination)) return 0.0;
  finder_.path_to(destination, path_);
  return path_value(path_, z);
}

double NetworkLimitState::operator()(std::span<const double> z) {
  update_mask(z);
  if (spec_.kind == LimitStateKind::rp && spec_.rp_weighting == RpWeighting::sample) {
    update_weights(z);
  }
  const Network& net = *network_;

  // One single-source search per distinct origin; pairs are grouped by origin
  // in the order they were listed.
  std::size_t searched = static_cast<std::size_t>(-1);
  auto value_of = [&](std::size_t o, std::size_t d) -> double {
    if (!mask_[o] || !mask_[d]) return 0.0;
    if (spec_.kind == LimitStateKind::binary && pairs_.size() == 1) {
      return finder_.connected(net, mask_, o, d) ? 1.0 : 0.0;
    }
    if (searched != o) {
      if (spec_.kind == LimitStateKind::rp) {
        finder_.dijkstra_from(net, mask_, o, weights_);
      } else {
        finder_.bfs_from(net, mask_, o);
      }
      searched = o;
    }
    if (!finder_.reached(d)) return 0.0;
    if (spec_.kind == LimitStateKind::binary) return 1.0;
    finder_.path_to(d, path_);
    return path_value(path_, z);
  };

  if (spec_.aggregation == Aggregation::k_out_of_n) {
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
      values_[p] = value_of(pairs_[p].first, pairs_[p].second);
    }
    return kth_largest(values_, spec_.k);
  }
  double g = kUnfailablePair;
  for (const auto& [o, d] : pairs_) {
    g = std::min(g, value_of(o, d));
    if (g == 0.0) break;
  }
  return g;
}

LimitStateFactory make_limit_state_factory(const Network& network, const LimitStateSpec& spec,
                                           const MarginDistribution& dist) {
  spec.validate(network);
  if (dist.dim() != network.random_count()) {
    throw DimensionMismatchError("margin distribution does not match network");
  }
  return [&network, spec, &dist](double mw) -> LimitStateFn {
    if (spec.kind != LimitStateKind::rp) return NetworkLimitState(network, spec);
    if (spec.rp_weighting == RpWeighting::sample) {
      return NetworkLimitState(network, spec, {},
                               {dist.sigma.data(), dist.sigma.data() + dist.sigma.size()});
    }
    return NetworkLimitState(network, spec, rp_weights(network, dist, mw));
  };
}

double kth_largest(std::span<const double> values, std::size_t k) {
  if (k < 1 || k > values.size()) {
    throw InvalidArgumentError("k = " + std::to_string(k) + " outside [1, " +
                               std::to_string(values.size()) + "]");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   sorted.end(), std::greater<>());
  return sorted[k - 1];
}

namespace {

LimitStateSpec single_pair(LimitStateKind kind, const std::string& o, const std::string& d) {
  LimitStateSpec spec;
  spec.kind = kind;
  spec.aggregation = Aggregation::single_od;
  spec.terminals = {{o}, {d}};
  spec.rp_weighting = RpWeighting::marginal;
  return spec;
}

std::vector<double> weights_or_empty(LimitStateKind kind, std::span<const double> w) {
  if (kind != LimitStateKind::rp) return {};
  return {w.begin(), w.end()};
}

}  // namespace

double g_binary(const Network& net, std::span<const double> z, const std::string& origin,
                const std::string& destination) {
  NetworkLimitState g(net, single_pair(LimitStateKind::binary, origin, destination));
  return g(z);
}

double g_rp(const Network& net, std::span<const double> z, const std::string& origin,
            const std::string& destination, std::span<const double> node_weights) {
  NetworkLimitState g(net, single_pair(LimitStateKind::rp, origin, destination),
                      {node_weights.begin(), node_weights.end()});
  return g(z);
}

double g_sp(const Network& net, std::span<const double> z, const std::string& origin,
            const std::string& destination) {
  NetworkLimitState g(net, single_pair(LimitStateKind::sp, origin, destination));
  return g(z);
}

double g_k_terminal(const Network& net, std::span<const double> z, const TerminalSpec& terminals,
                    LimitStateKind kind, std::span<const double> node_weights) {
  LimitStateSpec spec;
  spec.kind = kind;
  spec.aggregation = Aggregation::k_terminal;
  spec.terminals = terminals;
  spec.rp_weighting = RpWeighting::marginal;
  NetworkLimitState g(net, std::move(spec), weights_or_empty(kind, node_weights));
  return g(z);
}

double g_k_out_of_n(const Network& net, std::span<const double> z,
                    const std::vector<IdPair>& od_pairs, std::size_t k, LimitStateKind kind,
                    std::span<const double> node_weights) {
  LimitStateSpec spec;
  spec.kind = kind;
  spec.aggregation = Aggregation::k_out_of_n;
  spec.od_pairs = od_pairs;
  spec.k = k;
  spec.rp_weighting = RpWeighting::marginal;
  NetworkLimitState g(net, std::move(spec), weights_or_empty(kind, node_weights));
  return g(z);
}

}  // namespace seisnet
