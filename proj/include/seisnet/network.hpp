#pragma once

// Lifeline network as an undirected graph of seismic components with
// perfectly reliable links, plus the connectivity and path searches the
// limit-state functions are built on.

#include "seisnet/gmpe.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace seisnet {

using NodeMask = std::vector<std::uint8_t>;
using NodePath = std::vector<std::size_t>;
using IdPair = std::pair<std::string, std::string>;

class Network {
 public:
  Network() = default;
  /// Throws ValidationError on duplicate ids, self-loops, duplicate edges or
  /// edges referencing unknown ids.
  Network(std::vector<Component> nodes, const std::vector<IdPair>& edges);

  [[nodiscard]] std::size_t node_count() const { return nodes_.size(); }
  [[nodiscard]] std::size_t edge_count() const { return edges_.size(); }
  [[nodiscard]] const Component& node(std::size_t i) const { return nodes_[i]; }
  [[nodiscard]] const std::vector<Component>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<std::pair<std::size_t, std::size_t>>& edges() const {
    return edges_;
  }
  /// Position of the node when ids are sorted lexicographically; all searches
  /// break ties by this rank.
  [[nodiscard]] std::size_t id_rank(std::size_t i) const { return rank_[i]; }
  [[nodiscard]] std::size_t node_by_rank(std::size_t r) const { return by_rank_[r]; }
  /// Neighbours in ascending id order.
  [[nodiscard]] std::span<const std::size_t> neighbors(std::size_t i) const {
    return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
  }

  [[nodiscard]] std::optional<std::size_t> find(const std::string& id) const;
  /// Throws UnknownNodeError.
  [[nodiscard]] std::size_t index_of(const std::string& id) const;

  /// Index into the margin vector, or -1 for perfect nodes.
  [[nodiscard]] std::ptrdiff_t random_index(std::size_t node) const { return random_index_[node]; }
  [[nodiscard]] std::size_t random_count() const { return random_nodes_.size(); }
  [[nodiscard]] std::span<const std::size_t> random_nodes() const { return random_nodes_; }

  /// Copy with every non-perfect component given the same capacity.
  [[nodiscard]] Network with_capacity(double median, double log_std) const;

 private:
  void build_index();

  std::vector<Component> nodes_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> adjacency_;
  std::vector<std::size_t> rank_;
  std::vector<std::size_t> by_rank_;
  std::vector<std::ptrdiff_t> random_index_;
  std::vector<std::size_t> random_nodes_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

struct TerminalSpec {
  std::vector<std::string> origins;
  std::vector<std::string> destinations;
};

/// A failure-prone link; converted to a node placed at the link midpoint.
struct UnreliableLink {
  std::string from;
  std::string to;
  double capacity_median = 1.0;
  double capacity_log_std = 0.0;
  std::string id;  ///< defaults to "<from>~<to>"
};

/// Replaces every unreliable link a-b by a new node m with edges a-m, m-b.
Network link_to_node_conversion(const Network& network, std::span<const UnreliableLink> links);

/// mask[i] = z_i > 0 for random nodes, 1 for perfect nodes.
NodeMask surviving_subgraph(const Network& network, std::span<const double> z);
void surviving_subgraph(const Network& network, std::span<const double> z, NodeMask& mask);

/// Reusable scratch space for the graph searches.  One per thread.
class PathFinder {
 public:
  /// Breadth-first reachability from `origin`; false if either end is dead.
  bool connected(const Network& net, const NodeMask& mask, std::size_t origin,
                 std::size_t destination);

  /// Fewest-node surviving path.  Neighbours are expanded in ascending id
  /// order and the first discovery wins, so equal-length ties resolve to the
  /// lowest-id branch.
  std::optional<NodePath> shortest_path(const Network& net, const NodeMask& mask,
                                        std::size_t origin, std::size_t destination);

  /// Surviving path minimizing the summed node weights (Dijkstra, binary heap).
  /// Weights are not validated here.
  std::optional<NodePath> most_reliable_path(const Network& net, const NodeMask& mask,
                                             std::size_t origin, std::size_t destination,
                                             std::span<const double> node_weights);

  /// Single-source searches; paths are then read with path_to().
  void bfs_from(const Network& net, const NodeMask& mask, std::size_t origin);
  void dijkstra_from(const Network& net, const NodeMask& mask, std::size_t origin,
                     std::span<const double> node_weights);
  [[nodiscard]] bool reached(std::size_t node) const { return parent_[node] != kUnreached; }
  void path_to(std::size_t destination, NodePath& out) const;

 private:
  static constexpr std::size_t kUnreached = static_cast<std::size_t>(-1);
  void reset(std::size_t n);

  std::vector<std::size_t> parent_;
  std::vector<std::size_t> queue_;
  std::vector<double> dist_;
  std::vector<std::pair<double, std::size_t>> heap_;
  std::size_t source_ = kUnreached;
};

bool bfs_connected(const Network& net, const NodeMask& mask, const std::string& origin,
                   const std::string& destination);
std::optional<NodePath> shortest_path(const Network& net, const NodeMask& mask,
                                      const std::string& origin, const std::string& destination);
/// Throws NegativeWeightError if any weight is negative.
std::optional<NodePath> most_reliable_path(const Network& net, const NodeMask& mask,
                                           const std::string& origin,
                                           const std::string& destination,
                                           std::span<const double> node_weights);

}  // namespace seisnet
