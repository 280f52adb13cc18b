#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hopart/model.hpp"
#include "hopart/topology.hpp"

namespace hopart::coarsen {

struct CoarseningConfig {
  double alpha0 = 0.5;
  double delta_alpha = 3.0;
  // Unset: max(128, 16 * K).
  std::optional<std::size_t> n_final;
  // Stop once a level keeps more than this fraction of its vertices.
  double min_reduction = 0.95;
  std::uint64_t seed = 1;
  // Nets with more pins are ignored when rating merge candidates.
  std::size_t max_rated_net_size = 1000;
};

std::size_t default_n_final(std::size_t num_fpgas);
std::size_t resolve_n_final(const CoarseningConfig& config, std::size_t num_fpgas);

struct Level {
  Hypergraph graph;
  // Vertex of the finer level -> hypernode of `graph`.
  std::vector<VertexId> fine_to_coarse;
  int index = 0;
};

/// r(u,v) = sum over shared nets of w_e / (|e| - 1).
double heavy_edge_score(const Hypergraph& h, VertexId u, VertexId v);

/// p(u,v) = (sum_i w_i(u) w_i(v) / mean_cap_i^2)^alpha. Throws
/// std::invalid_argument if a type used by both has zero mean capacity.
double heavy_node_penalty(const ResourceVector& u, const ResourceVector& v, double alpha,
                          const std::vector<double>& mean_capacity);

/// alpha0 + delta_alpha * ln2 / ln((n_init + 1) / n_final) * level, clamped to
/// [alpha0, alpha0 + delta_alpha]. Throws std::domain_error when
/// n_init + 1 <= n_final (nothing to coarsen).
double alpha_at_level(const CoarseningConfig& config, std::size_t n_init, std::size_t n_final, int level);

/// r / p; +infinity when p == 0.
double rating(const Hypergraph& h, VertexId u, VertexId v, double alpha,
              const std::vector<double>& mean_capacity);

/// One round of pairwise matching in seeded random order. Each unmatched
/// vertex merges with its best-rated unmatched neighbour (ties to the lower
/// id) unless the pair would exceed the largest FPGA capacity.
Level coarsen_level(const Hypergraph& h, const MfsTopology& t, const CoarseningConfig& config,
                    int level, double alpha);

/// Coarsest level last. Empty when the hypergraph is already small enough.
std::vector<Level> build_hierarchy(const Hypergraph& h, const MfsTopology& t,
                                   const CoarseningConfig& config);

/// Contract `h` with a total map onto [0, num_coarse). Single-pin nets vanish
/// and nets with identical source and drain set merge with summed weight.
Hypergraph contract(const Hypergraph& h, const std::vector<VertexId>& fine_to_coarse,
                    std::size_t num_coarse);

}  // namespace hopart::coarsen
