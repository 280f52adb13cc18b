#pragma once

#include <optional>

#include "hopart/model.hpp"
#include "hopart/refine.hpp"
#include "hopart/topology.hpp"

// Brute-force references. They share only the metrics module with the solver.
namespace hopart::oracle {

inline constexpr double kEnumerationLimit = 1e7;

struct ExhaustiveResult {
  std::optional<Placement> placement;  // empty: no feasible assignment
  Weight total_hop_distance = 0;
  std::size_t evaluated = 0;
};

/// Every unreplicated assignment, filtered by validate; minimum hop distance
/// with ties to the lexicographically smallest assignment. Throws
/// std::invalid_argument when K^|V| exceeds kEnumerationLimit.
ExhaustiveResult exhaustive_partition(const Hypergraph& h, const MfsTopology& t);

struct Replication {
  VertexId vertex = -1;
  FpgaId fpga = -1;
  Weight gain = 0;
};

/// Best feasible single replicate over every (v, f); ties go to the lower
/// vertex, then the lower FPGA. Empty when no replicate is feasible.
std::optional<Replication> best_single_replication(const Hypergraph& h, const MfsTopology& t,
                                                   const Placement& p);

/// THD before minus THD after, from two complete metric evaluations.
Weight full_gain_recompute(const Hypergraph& h, const Placement& p, const HopMatrix& hm,
                           const refine::Op& op);

}  // namespace hopart::oracle
