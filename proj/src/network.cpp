#include "seisnet/network.hpp"

#include "seisnet/error.hpp"

#include <algorithm>
#include <numeric>
#include <limits>
#include <set>

namespace seisnet {

Network::Network(std::vector<Component> nodes, const std::vector<IdPair>& edges)
    : nodes_(std::move(nodes)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!lookup_.emplace(nodes_[i].id, i).second) {
      throw ValidationError("duplicate node id '" + nodes_[i].id + "'");
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& [a, b] : edges) {
    const auto ia = find(a);
    const auto ib = find(b);
    if (!ia) throw ValidationError("edge references unknown node id '" + a + "'");
    if (!ib) throw ValidationError("edge references unknown node id '" + b + "'");
    if (*ia == *ib) throw ValidationError("self-loop on node '" + a + "'");
    const auto key = std::minmax(*ia, *ib);
    if (!seen.insert(key).second) {
      throw ValidationError("duplicate edge '" + a + "'-'" + b + "'");
    }
    edges_.emplace_back(key.first, key.second);
  }
  build_index();
}

void Network::build_index() {
  const std::size_t n = nodes_.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [a, b] : edges_) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  by_rank_.resize(n);
  std::iota(by_rank_.begin(), by_rank_.end(), std::size_t{0});
  std::sort(by_rank_.begin(), by_rank_.end(),
            [&](std::size_t a, std::size_t b) { return nodes_[a].id < nodes_[b].id; });
  rank_.resize(n);
  for (std::size_t r = 0; r < n; ++r) rank_[by_rank_[r]] = r;

  offsets_.assign(n + 1, 0);
  adjacency_.clear();
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(adj[i].begin(), adj[i].end(),
              [&](std::size_t a, std::size_t b) { return rank_[a] < rank_[b]; });
    offsets_[i] = adjacency_.size();
    adjacency_.insert(adjacency_.end(), adj[i].begin(), adj[i].end());
  }
  offsets_[n] = adjacency_.size();

  random_index_.assign(n, -1);
  random_nodes_.clear();
  for (std::size_t i = 0; i < n; ++i) {
    if (!nodes_[i].perfect) {
      random_index_[i] = static_cast<std::ptrdiff_t>(random_nodes_.size());
      random_nodes_.push_back(i);
    }
  }
}

std::optional<std::size_t> Network::find(const std::string& id) const {
  const auto it = lookup_.find(id);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Network::index_of(const std::string& id) const {
  const auto i = find(id);
  if (!i) throw UnknownNodeError("unknown node id '" + id + "'");
  return *i;
}

Network Network::with_capacity(double median, double log_std) const {
  Network copy = *this;
  for (auto& c : copy.nodes_) {
    if (c.perfect) continue;
    c.capacity_median = median;
    c.capacity_log_std = log_std;
  }
  return copy;
}

Network link_to_node_conversion(const Network& network, std::span<const UnreliableLink> links) {
  std::vector<Component> nodes = network.nodes();
  std::vector<IdPair> edges;
  for (const auto& [a, b] : network.edges()) edges.emplace_back(nodes[a].id, nodes[b].id);
  for (const auto& link : links) {
    const Component& a = network.node(network.index_of(link.from));
    const Component& b = network.node(network.index_of(link.to));
    Component mid;
    mid.id = link.id.empty() ? link.from + "~" + link.to : link.id;
    mid.position = {0.5 * (a.position.x_km + b.position.x_km),
                    0.5 * (a.position.y_km + b.position.y_km)};
    mid.capacity_median = link.capacity_median;
    mid.capacity_log_std = link.capacity_log_std;
    nodes.push_back(mid);
    edges.emplace_back(link.from, mid.id);
    edges.emplace_back(mid.id, link.to);
  }
  return Network(std::move(nodes), edges);
}

void surviving_subgraph(const Network& network, std::span<const double> z, NodeMask& mask) {
  if (z.size() != network.random_count()) {
    throw DimensionMismatchError("margin vector has " + std::to_string(z.size()) +
                                 " entries, network has " +
                                 std::to_string(network.random_count()) + " random components");
  }
  mask.assign(network.node_count(), 1);
  const auto random = network.random_nodes();
  for (std::size_t k = 0; k < random.size(); ++k) mask[random[k]] = z[k] > 0.0 ? 1 : 0;
}

NodeMask surviving_subgraph(const Network& network, std::span<const double> z) {
  NodeMask mask;
  surviving_subgraph(network, z, mask);
  return mask;
}

void PathFinder::reset(std::size_t n) {
  parent_.assign(n, kUnreached);
  if (queue_.size() < n) queue_.resize(n);
}

void PathFinder::bfs_from(const Network& net, const NodeMask& mask, std::size_t origin) {
  reset(net.node_count());
  source_ = origin;
  if (!mask[origin]) return;
  parent_[origin] = origin;
  std::size_t head = 0;
  std::size_t tail = 0;
  queue_[tail++] = origin;
  while (head < tail) {
    const std::size_t u = queue_[head++];
    for (const std::size_t v : net.neighbors(u)) {
      if (parent_[v] != kUnreached || !mask[v]) continue;
      parent_[v] = u;
      queue_[tail++] = v;
    }
  }
}

void PathFinder::dijkstra_from(const Network& net, const NodeMask& mask, std::size_t origin,
                               std::span<const double> node_weights) {
  const std::size_t n = net.node_count();
  reset(n);
  source_ = origin;
  if (!mask[origin]) return;
  dist_.assign(n, std::numeric_limits<double>::infinity());
  heap_.clear();
  // Min-heap on (distance, id rank).
  const auto cmp = [](const auto& x, const auto& y) { return x > y; };
  dist_[origin] = node_weights[origin];
  parent_[origin] = origin;
  heap_.emplace_back(dist_[origin], net.id_rank(origin));
  while (!heap_.empty()) {
    std::pop_heap(heap_.begin(), heap_.end(), cmp);
    const auto [d, ru] = heap_.back();
    const std::size_t u = net.node_by_rank(ru);
    heap_.pop_back();
    if (d > dist_[u]) continue;
    for (const std::size_t v : net.neighbors(u)) {
      if (!mask[v]) continue;
      const double nd = d + node_weights[v];
      if (nd < dist_[v]) {
        dist_[v] = nd;
        parent_[v] = u;
        heap_.emplace_back(nd, net.id_rank(v));
        std::push_heap(heap_.begin(), heap_.end(), cmp);
      }
    }
  }
}

void PathFinder::path_to(std::size_t destination, NodePath& out) const {
  out.clear();
  if (parent_[destination] == kUnreached) return;
  for (std::size_t v = destination;; v = parent_[v]) {
    out.push_back(v);
    if (v == source_) break;
  }
  std::reverse(out.begin(), out.end());
}

bool PathFinder::connected(const Network& net, const NodeMask& mask, std::size_t origin,
                           std::size_t destination) {
  if (!mask[origin] || !mask[destination]) return false;
  if (origin == destination) return true;
  reset(net.node_count());
  parent_[origin] = origin;
  std::size_t head = 0;
  std::size_t tail = 0;
  queue_[tail++] = origin;
  while (head < tail) {
    const std::size_t u = queue_[head++];
    for (const std::size_t v : net.neighbors(u)) {
      if (parent_[v] != kUnreached || !mask[v]) continue;
      if (v == destination) return true;
      parent_[v] = u;
      queue_[tail++] = v;
    }
  }
  return false;
}

std::optional<NodePath> PathFinder::shortest_path(const Network& net, const NodeMask& mask,
                                                  std::size_t origin, std::size_t destination) {
  bfs_from(net, mask, origin);
  if (!reached(destination)) return std::nullopt;
  NodePath path;
  path_to(destination, path);
  return path;
}

std::optional<NodePath> PathFinder::most_reliable_path(const Network& net, const NodeMask& mask,
                                                       std::size_t origin,
                                                       std::size_t destination,
                                                       std::span<const double> node_weights) {
  dijkstra_from(net, mask, origin, node_weights);
  if (!reached(destination)) return std::nullopt;
  NodePath path;
  path_to(destination, path);
  return path;
}

bool bfs_connected(const Network& net, const NodeMask& mask, const std::string& origin,
                   const std::string& destination) {
  PathFinder finder;
  return finder.connected(net, mask, net.index_of(origin), net.index_of(destination));
}

std::optional<NodePath> shortest_path(const Network& net, const NodeMask& mask,
                                      const std::string& origin, const std::string& destination) {
  PathFinder finder;
  return finder.shortest_path(net, mask, net.index_of(origin), net.index_of(destination));
}

std::optional<NodePath> most_reliable_path(const Network& net, const NodeMask& mask,
                                           const std::string& origin,
                                           const std::string& destination,
                                           std::span<const double> node_weights) {
  if (node_weights.size() != net.node_count()) {
    throw DimensionMismatchError("node weight vector does not match node count");
  }
  for (const double w : node_weights) {
    if (w < 0.0) throw NegativeWeightError("node weights must be non-negative");
  }
  PathFinder finder;
  return finder.most_reliable_path(net, mask, net.index_of(origin), net.index_of(destination),
                                   node_weights);
}

}  // namespace seisnet
