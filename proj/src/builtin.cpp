#include "seisnet/builtin.hpp"

#include "seisnet/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <set>

namespace seisnet {

namespace {

constexpr double kR1 = 3.46;
constexpr double kR2 = 9.28;
constexpr double kDelta12 = 11.12;
constexpr double kMedian = 0.98;
constexpr double kZeta = 0.69;

Point second_site() {
  const double cos_t = (kR1 * kR1 + kR2 * kR2 - kDelta12 * kDelta12) / (2.0 * kR1 * kR2);
  return {kR2 * cos_t, kR2 * std::sqrt(1.0 - cos_t * cos_t)};
}

}  // namespace

Scenario two_component_system(SystemKind kind, LimitStateKind ls) {
  std::vector<Component> nodes = {
      {"O", {-2.0, 6.0}, 1.0, 0.0, true, {}},
      {"1", {kR1, 0.0}, kMedian, kZeta, false, {}},
      {"2", second_site(), kMedian, kZeta, false, {}},
      {"D", {8.0, 6.0}, 1.0, 0.0, true, {}},
  };
  std::vector<IdPair> edges;
  if (kind == SystemKind::parallel) {
    edges = {{"O", "1"}, {"O", "2"}, {"1", "D"}, {"2", "D"}};
  } else {
    edges = {{"O", "1"}, {"1", "2"}, {"2", "D"}};
  }
  Scenario s{Network(std::move(nodes), edges), SeismicModel{}, LimitStateSpec{}};
  s.spec.kind = ls;
  s.spec.aggregation = Aggregation::single_od;
  s.spec.terminals = {{"O"}, {"D"}};
  return s;
}

TwoComponentSystem two_component_reliability(SystemKind kind, double mw) {
  const Scenario s = two_component_system(kind);
  const MarginDistribution dist = build_margin_distribution(s.network, s.model, mw);
  const Eigen::VectorXd beta = dist.reliability_indices(mw);
  return {kind, beta(0), beta(1), dist.corr(0, 1)};
}

Scenario synthetic_network(std::uint64_t seed, const SyntheticOptions& options) {
  std::mt19937_64 rng(derive_seed(seed, 0x5A17ULL));
  std::uniform_real_distribution<double> ux(0.15 * options.width_km, 0.85 * options.width_km);
  std::uniform_real_distribution<double> uy(0.0, options.height_km);

  const std::size_t n = options.bridges;
  std::vector<Component> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    nodes.push_back({"B" + std::to_string(i), {ux(rng), uy(rng)}, options.capacity_median,
                     options.capacity_log_std, false, {}});
  }
  auto dist = [&](std::size_t a, std::size_t b) {
    return distance_km(nodes[a].position, nodes[b].position);
  };

  std::set<std::pair<std::size_t, std::size_t>> edge_set;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return dist(i, a) < dist(i, b); });
    std::size_t added = 0;
    for (const std::size_t j : order) {
      if (j == i) continue;
      edge_set.insert(std::minmax(i, j));
      if (++added == options.neighbors) break;
    }
  }

  // Join components through their closest pair until the bridge graph is connected.
  for (;;) {
    std::vector<std::size_t> comp(n);
    std::iota(comp.begin(), comp.end(), std::size_t{0});
    std::function<std::size_t(std::size_t)> root = [&](std::size_t x) {
      return comp[x] == x ? x : comp[x] = root(comp[x]);
    };
    for (const auto& [a, b] : edge_set) comp[root(a)] = root(b);
    double best = INFINITY;
    std::pair<std::size_t, std::size_t> join{0, 0};
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (root(a) != root(b) && dist(a, b) < best) {
          best = dist(a, b);
          join = {a, b};
        }
      }
    }
    if (!std::isfinite(best)) break;
    edge_set.insert(join);
  }

  std::vector<IdPair> edges;
  for (const auto& [a, b] : edge_set) edges.emplace_back(nodes[a].id, nodes[b].id);

  const double w = options.width_km;
  const double h = options.height_km;
  const std::vector<std::pair<std::string, Point>> terminals = {
      {"O1", {0.0, h / 3.0}}, {"O2", {0.0, 2.0 * h / 3.0}},
      {"D1", {w, h / 3.0}},   {"D2", {w, 2.0 * h / 3.0}}};
  for (const auto& [id, pos] : terminals) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return distance_km(pos, nodes[a].position) < distance_km(pos, nodes[b].position);
    });
    edges.emplace_back(id, nodes[order[0]].id);
    edges.emplace_back(id, nodes[order[1]].id);
  }
  for (const auto& [id, pos] : terminals) nodes.push_back({id, pos, 1.0, 0.0, true, {}});

  Scenario s{Network(std::move(nodes), edges), SeismicModel{}, LimitStateSpec{}};
  s.model.epicenter = {0.5 * w, 0.5 * h};
  s.spec.kind = LimitStateKind::rp;
  s.spec.aggregation = Aggregation::k_terminal;
  s.spec.terminals = {{"O1", "O2"}, {"D1", "D2"}};
  return s;
}

}  // namespace seisnet
