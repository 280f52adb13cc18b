#pragma once

#include <initializer_list>
#include <utility>
#include <vector>

#include "hopart/io.hpp"
#include "hopart/model.hpp"
#include "hopart/topology.hpp"

namespace hopart::testing {

struct EdgeSpec {
  Weight weight;
  VertexId source;
  std::vector<VertexId> drains;
};

inline Hypergraph make_graph(std::vector<ResourceVector> weights, const std::vector<EdgeSpec>& edges) {
  HypergraphBuilder b(weights.empty() ? 1 : weights.front().size());
  for (auto& w : weights) b.add_vertex(std::move(w));
  for (const auto& e : edges) b.add_edge(e.weight, e.source, e.drains);
  return std::move(b).build();
}

inline Hypergraph unit_graph(std::size_t n, const std::vector<EdgeSpec>& edges) {
  return make_graph(std::vector<ResourceVector>(n, ResourceVector{1}), edges);
}

inline std::vector<FpgaSpec> uniform_fpgas(std::size_t k, ResourceVector cap, Weight io = kUnlimited) {
  return std::vector<FpgaSpec>(k, FpgaSpec{std::move(cap), io});
}

inline MfsTopology path_topology(std::size_t k, ResourceVector cap, std::optional<int> hop_max = std::nullopt,
                                 Weight io = kUnlimited) {
  std::vector<std::pair<FpgaId, FpgaId>> links;
  for (std::size_t i = 0; i + 1 < k; ++i) links.emplace_back(static_cast<FpgaId>(i), static_cast<FpgaId>(i + 1));
  return MfsTopology(uniform_fpgas(k, std::move(cap), io), links, hop_max);
}

inline MfsTopology ring_topology(std::size_t k, ResourceVector cap) {
  std::vector<std::pair<FpgaId, FpgaId>> links;
  for (std::size_t i = 0; i < k; ++i) {
    links.emplace_back(static_cast<FpgaId>(i), static_cast<FpgaId>((i + 1) % k));
  }
  return MfsTopology(uniform_fpgas(k, std::move(cap)), links);
}

// A and B on FPGA 1 of the path 0-1-2; B drives three drains on FPGA 2 and
// A drives B. Vertices: A=0, B=1, drains 2..4.
struct ReplicationExample {
  Hypergraph h;
  MfsTopology t;
  Placement p;
};

inline ReplicationExample replication_example() {
  Hypergraph h = unit_graph(5, {{1, 0, {1}}, {1, 1, {2}}, {1, 1, {3}}, {1, 1, {4}}});
  MfsTopology t = path_topology(3, ResourceVector{10});
  Placement p({1, 1, 2, 2, 2});
  return {std::move(h), std::move(t), std::move(p)};
}

inline io::GeneratorConfig small_config(std::uint64_t seed, std::size_t n, std::size_t k) {
  io::GeneratorConfig g;
  g.seed = seed;
  g.vertices = n;
  g.edges = n;
  g.fpgas = k;
  g.types = 2;
  g.extra_links = k > 2 ? 1 : 0;
  return g;
}

}  // namespace hopart::testing
