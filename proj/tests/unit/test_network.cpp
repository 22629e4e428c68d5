#include "support.hpp"

#include "seisnet/error.hpp"

#include <doctest.h>

#include <functional>
#include <limits>
#include <numeric>
#include <random>

using namespace seisnet;

namespace {

Component node(const std::string& id, bool perfect = false) {
  return {id, {0.0, 0.0}, 0.98, 0.69, perfect, {}};
}

Network chain() {
  return Network({node("O", true), node("1"), node("2"), node("D", true)},
                 {{"O", "1"}, {"1", "2"}, {"2", "D"}});
}

// Independent oracle: union-find over surviving endpoints.
struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

NodeMask random_mask(std::mt19937_64& rng, std::size_t n, double alive) {
  std::bernoulli_distribution b(alive);
  NodeMask m(n);
  for (auto& x : m) x = b(rng) ? 1 : 0;
  return m;
}

// Minimum summed node weight over every simple surviving path.
double brute_force_min_weight(const Network& net, const NodeMask& mask, std::size_t o,
                              std::size_t d, const std::vector<double>& w) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<char> on_path(net.node_count(), 0);
  std::function<void(std::size_t, double)> dfs = [&](std::size_t u, double acc) {
    if (u == d) {
      best = std::min(best, acc);
      return;
    }
    for (const std::size_t v : net.neighbors(u)) {
      if (!mask[v] || on_path[v]) continue;
      on_path[v] = 1;
      dfs(v, acc + w[v]);
      on_path[v] = 0;
    }
  };
  if (!mask[o] || !mask[d]) return best;
  on_path[o] = 1;
  dfs(o, w[o]);
  return best;
}

double path_weight(const NodePath& p, const std::vector<double>& w) {
  double s = 0.0;
  for (const auto v : p) s += w[v];
  return s;
}

}  // namespace

TEST_CASE("network construction rejects malformed graphs") {
  CHECK_THROWS_AS(Network({node("a"), node("a")}, {}), ValidationError);
  CHECK_THROWS_AS(Network({node("a"), node("b")}, {{"a", "c"}}), ValidationError);
  CHECK_THROWS_AS(Network({node("a"), node("b")}, {{"a", "a"}}), ValidationError);
  CHECK_THROWS_AS(Network({node("a"), node("b")}, {{"a", "b"}, {"b", "a"}}), ValidationError);
  const Network net = chain();
  CHECK(net.node_count() == 4);
  CHECK(net.edge_count() == 3);
  CHECK(net.random_count() == 2);
  CHECK_THROWS_AS((void)net.index_of("zz"), UnknownNodeError);
}

TEST_CASE("surviving subgraph treats zero as failure") {
  const Network net = chain();
  CHECK(surviving_subgraph(net, std::vector<double>{1.0, 2.0}) == NodeMask{1, 1, 1, 1});
  CHECK(surviving_subgraph(net, std::vector<double>{0.0, 2.0}) == NodeMask{1, 0, 1, 1});
  CHECK(surviving_subgraph(net, std::vector<double>{1.0, -1.0}) == NodeMask{1, 1, 0, 1});
  CHECK_THROWS_AS(surviving_subgraph(net, std::vector<double>{1.0}), DimensionMismatchError);
}

TEST_CASE("bfs connectivity on a chain") {
  const Network net = chain();
  CHECK(bfs_connected(net, {1, 1, 1, 1}, "O", "D"));
  CHECK(bfs_connected(net, {1, 0, 1, 1}, "2", "2"));
  CHECK_FALSE(bfs_connected(net, {1, 0, 1, 1}, "O", "D"));
  CHECK_FALSE(bfs_connected(net, {1, 1, 0, 1}, "2", "2"));
  CHECK_THROWS_AS(bfs_connected(net, {1, 1, 1, 1}, "O", "X"), UnknownNodeError);
}

TEST_CASE("bfs agrees with a union-find oracle on random graphs") {
  std::mt19937_64 rng(3);
  std::size_t disconnected = 0;
  for (int gi = 0; gi < 20; ++gi) {
    const auto g = testing::random_graph(rng, 20, 0.4);
    const Network& net = g.network;
    PathFinder finder;
    for (int m = 0; m < 1000; ++m) {
      const NodeMask mask = random_mask(rng, 20, 0.75);
      UnionFind uf(20);
      for (const auto& [a, b] : net.edges()) {
        if (mask[a] && mask[b]) uf.unite(a, b);
      }
      std::uniform_int_distribution<std::size_t> pick(0, 19);
      const std::size_t o = pick(rng);
      const std::size_t d = pick(rng);
      const bool expected = mask[o] && mask[d] && uf.find(o) == uf.find(d);
      const bool got = finder.connected(net, mask, o, d);
      disconnected += expected ? 0 : 1;
      REQUIRE(got == expected);
      REQUIRE(finder.connected(net, mask, d, o) == got);
      // both path searches return nothing exactly when disconnected
      REQUIRE(finder.shortest_path(net, mask, o, d).has_value() == got);
      const std::vector<double> w(20, 1.0);
      REQUIRE(finder.most_reliable_path(net, mask, o, d, w).has_value() == got);
    }
  }
  CHECK(disconnected > 1000);  // both outcomes are exercised
}

TEST_CASE("shortest path basics and the id tie-break") {
  const Network direct({node("o"), node("d")}, {{"o", "d"}});
  const auto p = shortest_path(direct, {1, 1}, "o", "d");
  REQUIRE(p);
  CHECK(p->size() == 2);

  const Scenario sys = two_component_system(SystemKind::parallel);
  const auto sp = shortest_path(sys.network, {1, 1, 1, 1}, "O", "D");
  REQUIRE(sp);
  REQUIRE(sp->size() == 3);
  CHECK(sys.network.node((*sp)[1]).id == "1");
  CHECK_FALSE(shortest_path(sys.network, {1, 0, 0, 1}, "O", "D"));
}

TEST_CASE("most reliable path") {
  const Scenario sys = two_component_system(SystemKind::parallel);
  const Network& net = sys.network;
  // node 1 more reliable (smaller -ln P(survive))
  std::vector<double> w = {0.0, 0.01, 0.2, 0.0};
  auto rp = most_reliable_path(net, {1, 1, 1, 1}, "O", "D", w);
  REQUIRE(rp);
  CHECK(net.node((*rp)[1]).id == "1");
  w = {0.0, 0.3, 0.2, 0.0};
  rp = most_reliable_path(net, {1, 1, 1, 1}, "O", "D", w);
  CHECK(net.node((*rp)[1]).id == "2");
  // scaling weights does not change the choice
  for (auto& x : w) x *= 17.0;
  CHECK(net.node((*most_reliable_path(net, {1, 1, 1, 1}, "O", "D", w))[1]).id == "2");

  w[1] = -0.1;
  CHECK_THROWS_AS(most_reliable_path(net, {1, 1, 1, 1}, "O", "D", w), NegativeWeightError);
  CHECK_THROWS_AS(most_reliable_path(net, {1, 1, 1, 1}, "O", "D", std::vector<double>{1.0}),
                  DimensionMismatchError);
}

TEST_CASE("uniform weights give a fewest-node path") {
  std::mt19937_64 rng(5);
  for (int gi = 0; gi < 30; ++gi) {
    const auto g = testing::random_graph(rng, 15, 0.8);
    const std::vector<double> w(15, 1.0);
    const NodeMask mask = random_mask(rng, 15, 0.85);
    PathFinder finder;
    const auto sp = finder.shortest_path(g.network, mask, 0, 14);
    const auto rp = finder.most_reliable_path(g.network, mask, 0, 14, w);
    REQUIRE(sp.has_value() == rp.has_value());
    if (sp) CHECK(sp->size() == rp->size());
  }
}

TEST_CASE("dijkstra matches exhaustive simple-path enumeration") {
  std::mt19937_64 rng(11);
  std::exponential_distribution<double> weight(1.0);
  int compared = 0;
  for (int gi = 0; gi < 40; ++gi) {
    const auto g = testing::random_graph(rng, 15, 0.5);
    std::vector<double> w(15);
    for (auto& x : w) x = weight(rng);
    for (int m = 0; m < 10; ++m) {
      const NodeMask mask = random_mask(rng, 15, 0.85);
      PathFinder finder;
      const auto rp = finder.most_reliable_path(g.network, mask, 0, 14, w);
      const double best = brute_force_min_weight(g.network, mask, 0, 14, w);
      REQUIRE(rp.has_value() == std::isfinite(best));
      if (rp) {
        CHECK(path_weight(*rp, w) == doctest::Approx(best).epsilon(1e-12));
        ++compared;
      }
    }
  }
  CHECK(compared > 100);
}

TEST_CASE("unreliable links become nodes") {
  const Network base({node("a"), node("b"), node("c")}, {{"a", "b"}});
  CHECK(link_to_node_conversion(base, {}).node_count() == 3);
  CHECK(link_to_node_conversion(base, {}).edge_count() == 1);

  const std::vector<UnreliableLink> one = {{"b", "c", 0.5, 0.3, "m"}};
  const Network converted = link_to_node_conversion(base, one);
  CHECK(converted.node_count() == 4);
  CHECK(converted.edge_count() == 3);
  const Component& m = converted.node(converted.index_of("m"));
  CHECK(m.capacity_median == 0.5);
  CHECK(m.capacity_log_std == 0.3);
  CHECK_FALSE(m.perfect);
  CHECK(bfs_connected(converted, {1, 1, 1, 1}, "a", "c"));
  CHECK_FALSE(bfs_connected(converted, surviving_subgraph(converted, std::vector<double>{1, 1, 1, -1}), "a", "c"));

  const std::vector<UnreliableLink> three = {{"a", "c", 1, 0.1, {}}, {"b", "c", 1, 0.1, {}},
                                             {"a", "b", 1, 0.1, "ab"}};
  const Network many = link_to_node_conversion(base, three);
  CHECK(many.node_count() == 6);
  // counting each link as an edge of the input, |E| grows by one per link
  CHECK(many.edge_count() == (base.edge_count() + three.size()) + three.size());
}
