#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hopart {

using VertexId = std::int32_t;
using EdgeId = std::int32_t;
using FpgaId = std::int32_t;
using Weight = std::int64_t;

/// Per-type resource amounts (usage of a vertex, or capacity/usage of an FPGA).
class ResourceVector {
 public:
  ResourceVector() = default;
  explicit ResourceVector(std::size_t types, Weight fill = 0) : values_(types, fill) {}
  explicit ResourceVector(std::vector<Weight> values) : values_(std::move(values)) {}
  ResourceVector(std::initializer_list<Weight> values) : values_(values) {}

  std::size_t size() const { return values_.size(); }
  Weight operator[](std::size_t i) const { return values_[i]; }
  Weight& operator[](std::size_t i) { return values_[i]; }
  std::span<const Weight> values() const { return values_; }

  ResourceVector& operator+=(const ResourceVector& other);
  ResourceVector& operator-=(const ResourceVector& other);

  // True when every entry is <= the matching entry of `limit`.
  bool fits_within(const ResourceVector& limit) const;
  bool is_zero() const;
  Weight sum_of_squares() const;

  friend bool operator==(const ResourceVector&, const ResourceVector&) = default;

 private:
  std::vector<Weight> values_;
};

ResourceVector operator+(ResourceVector lhs, const ResourceVector& rhs);

struct Hyperedge {
  Weight weight = 1;
  VertexId source = 0;
  std::vector<VertexId> drains;  // sorted, unique, never contains source

  std::size_t size() const { return 1 + drains.size(); }
};

/// Directed hypergraph: every net has a single source and a non-empty drain set.
/// Immutable after construction via HypergraphBuilder.
class Hypergraph {
 public:
  Hypergraph() = default;

  std::size_t num_vertices() const { return vertex_weights_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_types() const { return num_types_; }

  const ResourceVector& vertex_weight(VertexId v) const { return vertex_weights_[v]; }
  const Hyperedge& edge(EdgeId e) const { return edges_[e]; }
  const std::vector<Hyperedge>& edges() const { return edges_; }

  /// I(v): nets where v is source or drain, in ascending edge id. Throws
  /// std::out_of_range for an invalid vertex.
  std::span<const EdgeId> incident_edges(VertexId v) const;
  // Unchecked variant for hot loops.
  std::span<const EdgeId> incidence(VertexId v) const { return incidence_[v]; }

  ResourceVector total_weight() const;

 private:
  friend class HypergraphBuilder;

  std::size_t num_types_ = 0;
  std::vector<ResourceVector> vertex_weights_;
  std::vector<Hyperedge> edges_;
  std::vector<std::vector<EdgeId>> incidence_;
};

/// Validating constructor for Hypergraph. Nets with several sources are split
/// into one net per source sharing drain set and weight; repeated drains are
/// stored once.
class HypergraphBuilder {
 public:
  explicit HypergraphBuilder(std::size_t num_types) : num_types_(num_types) {}

  VertexId add_vertex(ResourceVector weight);
  void add_edge(Weight weight, VertexId source, std::span<const VertexId> drains);
  void add_net(Weight weight, std::span<const VertexId> sources, std::span<const VertexId> drains);

  std::size_t num_vertices() const { return weights_.size(); }

  /// Normalization notes (e.g. repeated drains dropped), one per event.
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

  /// Throws std::invalid_argument on dangling ids or invariant violations.
  Hypergraph build() &&;

 private:
  std::size_t num_types_;
  std::vector<ResourceVector> weights_;
  std::vector<Hyperedge> edges_;
  std::vector<std::string> diagnostics_;
};

/// Per-vertex FPGA hosts: one original plus zero or more replicas.
class Placement {
 public:
  Placement() = default;
  explicit Placement(std::vector<FpgaId> original);
  // Unchecked: malformed host sets are representable so validate() can report them.
  Placement(std::vector<FpgaId> original, std::vector<std::vector<FpgaId>> replicas);

  std::size_t num_vertices() const { return original_.size(); }

  FpgaId original(VertexId v) const { return original_[v]; }
  const std::vector<FpgaId>& replicas(VertexId v) const { return replicas_[v]; }
  std::vector<FpgaId> hosts(VertexId v) const;
  bool hosted_on(VertexId v, FpgaId f) const;
  std::size_t replica_count() const;

  // Moving onto a replica host is rejected; use remove_replica first.
  void set_original(VertexId v, FpgaId f);
  void add_replica(VertexId v, FpgaId f);
  void remove_replica(VertexId v, FpgaId f);

  const std::vector<FpgaId>& originals() const { return original_; }

  friend bool operator==(const Placement&, const Placement&) = default;

 private:
  std::vector<FpgaId> original_;
  std::vector<std::vector<FpgaId>> replicas_;  // each sorted ascending
};

/// N(e): union of host FPGAs over the drains of `e`, ascending.
std::vector<FpgaId> drain_fpgas(const Hypergraph& h, EdgeId e, const Placement& p);

}  // namespace hopart
