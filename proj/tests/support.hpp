#pragma once

#include "seisnet/builtin.hpp"
#include "seisnet/fragility.hpp"
#include "seisnet/gmpe.hpp"
#include "seisnet/limit_state.hpp"
#include "seisnet/network.hpp"
#include "seisnet/reference.hpp"
#include "seisnet/sampler.hpp"
#include "seisnet/subset_sim.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace seisnet::testing {

struct RandomGraph {
  Network network;
  TerminalSpec terminals;
};

/// Ids are zero-padded ("n07") so id order equals index order.  Terminals are
/// the first `origins` and last `destinations` nodes.
RandomGraph random_graph(std::mt19937_64& rng, std::size_t nodes, double extra_edge_ratio,
                         std::size_t origins = 1, std::size_t destinations = 1,
                         bool perfect_terminals = false);

std::vector<double> random_z(std::mt19937_64& rng, std::size_t n, double mean = 0.5);

/// Outcome of a property check: pass flag and a one-line summary.
struct Check {
  bool ok = true;
  std::string detail;
};

Check failure_domain_equivalence(std::uint64_t seed, std::size_t graphs, std::size_t samples);
Check binary_monotonicity(std::uint64_t seed, std::size_t graphs, std::size_t samples);
Check k_out_of_n_coherence(std::uint64_t seed, std::size_t graphs, std::size_t samples);
Check truncated_normal_match(std::uint64_t seed, std::size_t steps);
Check margin_correlation_match(std::uint64_t seed, std::size_t samples);
Check fragility_monotonicity(std::uint64_t seed, std::size_t runs);
Check thread_count_determinism(std::uint64_t seed);

}  // namespace seisnet::testing
