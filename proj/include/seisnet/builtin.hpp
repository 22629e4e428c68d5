#pragma once

// Ready-made scenarios: the two-component series/parallel benchmark systems
// and a seeded synthetic bridge network.

#include "seisnet/gmpe.hpp"
#include "seisnet/limit_state.hpp"
#include "seisnet/network.hpp"
#include "seisnet/reference.hpp"

#include <cstddef>
#include <cstdint>

namespace seisnet {

struct Scenario {
  Network network;
  SeismicModel model;
  LimitStateSpec spec;
};

/// Epicentral distances 3.46 km and 9.28 km, 11.12 km apart, C = 0.98 g,
/// zeta = 0.69.  Node ids O, 1, 2, D; O and D are perfect.
Scenario two_component_system(SystemKind kind, LimitStateKind ls = LimitStateKind::rp);

/// Reliability indices and margin correlation of the two-component system.
TwoComponentSystem two_component_reliability(SystemKind kind, double mw);

struct SyntheticOptions {
  std::size_t bridges = 26;
  std::size_t neighbors = 3;  ///< each bridge links to this many nearest bridges
  double width_km = 50.0;
  double height_km = 100.0 / 3.0;
  double capacity_median = 0.98;
  double capacity_log_std = 0.69;
};

/// Random geometric bridge network with two origins on the west edge and two
/// destinations on the east edge; epicenter at the box centre.  The spec is a
/// 4-terminal rp limit state.
Scenario synthetic_network(std::uint64_t seed, const SyntheticOptions& options = {});

}  // namespace seisnet
