#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "hopart/model.hpp"
#include "hopart/topology.hpp"

namespace hopart::assign {

/// Sum of squared capacities over hop_sum; 1.0 for every FPGA of a
/// single-FPGA system.
double fpga_heat(const MfsTopology& t, const HopMatrix& hm, FpgaId f);

/// Total incident net weight times the sum of squared resource usages.
double node_heat(const Hypergraph& h, VertexId v);

struct HeatScores {
  std::vector<double> fpga_heat;
  std::vector<double> node_heat;
};

HeatScores compute_heats(const Hypergraph& h, const MfsTopology& t);

struct SearchBudget {
  std::size_t max_solutions = 10'000;
  // Placement attempts across the whole search; keeps results reproducible.
  std::size_t max_nodes = 200'000;
  // Zero disables the wall-clock limit.
  std::chrono::milliseconds wall_clock{0};
  // Deep backtracking fires when consecutive solutions improve by less than this fraction.
  double stall_delta = 0.02;
  // Resume depth as a fraction of the current depth.
  double rho = 0.3;
  bool deep_backtracking = true;
};

enum class Jitter { none, nodes, fpgas };

struct AssignOptions {
  Jitter jitter = Jitter::none;
  std::uint64_t seed = 0;
};

enum class AssignStatus {
  complete,          // search space exhausted; incumbent is the best found
  budget_exhausted,  // stopped early with an incumbent
  no_solution,       // search space exhausted without a feasible placement
  budget_exhausted_no_solution,
};

struct AssignResult {
  AssignStatus status = AssignStatus::no_solution;
  Placement placement;
  Weight total_hop_distance = 0;
  std::size_t solutions = 0;
  std::size_t nodes = 0;
  std::size_t deep_backtracks = 0;
  std::uint64_t seed = 0;

  bool has_solution() const {
    return status == AssignStatus::complete || status == AssignStatus::budget_exhausted;
  }
};

/// Floor of rho * depth: where the search resumes after a stall.
std::size_t resume_depth(std::size_t depth, double rho);

/// True when |current - previous| / previous < delta. A zero previous cost
/// never triggers (it cannot be improved upon).
bool stall_detected(Weight previous, Weight current, double delta);

/// Depth-first assignment of every vertex to one FPGA. Vertices go in
/// descending node heat, candidate FPGAs in descending FPGA heat. A branch is
/// cut when its partial hop distance reaches the incumbent, when a fully
/// placed net breaks an I/O limit or the hop limit, or when an FPGA overflows.
/// No replicas are created.
AssignResult dfs_assign(const Hypergraph& h, const MfsTopology& t, const SearchBudget& budget,
                        const AssignOptions& options = {});

/// Independent dfs_assign runs, one thread per seed. Lowest hop distance
/// wins; ties go to the lower seed.
AssignResult parallel_assign(const Hypergraph& h, const MfsTopology& t, const SearchBudget& budget,
                             const std::vector<std::uint64_t>& seeds, Jitter jitter = Jitter::nodes);

}  // namespace hopart::assign
