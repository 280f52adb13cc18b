#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <vector>

#include "hopart/assign.hpp"
#include "hopart/coarsen.hpp"
#include "hopart/refine.hpp"

namespace hopart {

struct PartitionConfig {
  std::uint64_t seed = 1;
  std::size_t num_seeds = 4;
  coarsen::CoarseningConfig coarsening;
  assign::SearchBudget budget;
  assign::Jitter jitter = assign::Jitter::nodes;
  refine::RefineConfig refinement;
  // Checked at phase boundaries; once exceeded the remaining levels are only
  // projected. Zero disables the limit.
  std::chrono::milliseconds time_limit{0};
};

/// Assignment seeds derived from the master seed.
std::vector<std::uint64_t> assign_seeds(std::uint64_t seed, std::size_t count);

enum class PartitionStatus { ok, no_solution, budget_exhausted_no_solution };

struct PartitionResult {
  PartitionStatus status = PartitionStatus::no_solution;
  Placement placement;
  Weight total_hop_distance = 0;
  std::size_t num_levels = 0;
  std::size_t coarsest_vertices = 0;
  Weight assigned_hop_distance = 0;
  assign::AssignStatus assign_status = assign::AssignStatus::no_solution;
  std::vector<refine::RefineStats> refine_stats;  // coarsest level first
};

/// Called after each applied refinement op with the hypergraph of that level.
using LevelObserver = std::function<void(const Hypergraph&, const refine::Op&, const refine::Refiner&)>;

/// Coarsen, assign the coarsest level, then refine on the way back down.
PartitionResult partition(const Hypergraph& h, const MfsTopology& t, const PartitionConfig& config,
                          const LevelObserver& observer = {});

}  // namespace hopart
