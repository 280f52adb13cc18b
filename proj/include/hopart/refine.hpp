#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hopart/coarsen.hpp"
#include "hopart/model.hpp"
#include "hopart/rng.hpp"
#include "hopart/topology.hpp"

namespace hopart::refine {

enum class OpKind { move = 0, exchange = 1, replicate = 2, remove = 3 };

std::string_view to_string(OpKind kind);

/// One refinement operation. `destination` is the new original for move, the
/// new replica host for replicate and the dropped replica host for remove. An
/// exchange swaps the originals of `vertex` and `partner`.
struct Op {
  OpKind kind = OpKind::move;
  VertexId vertex = -1;
  FpgaId destination = -1;
  VertexId partner = -1;
  // Hop-distance decrease; positive is an improvement.
  Weight gain = 0;

  friend bool operator==(const Op&, const Op&) = default;
};

struct OpSet {
  bool move = true;
  bool exchange = true;
  bool replicate = true;
  bool remove = true;

  bool enabled(OpKind kind) const;
  static OpSet all() { return {}; }
  static OpSet none() { return {false, false, false, false}; }
  /// Comma-separated subset of mv, ex, rep, del, or "none". Throws
  /// std::invalid_argument.
  static OpSet parse(std::string_view text);
  std::string to_string() const;
};

struct RefineConfig {
  OpSet ops;
  // Cap on applied replicates per refine_level call.
  std::size_t max_replicas = std::numeric_limits<std::size_t>::max();
  // Cap on applied operations per refine_level call.
  std::size_t max_ops = std::numeric_limits<std::size_t>::max();
  // Recompute every gain after each operation instead of only the neighbourhood.
  bool full_recompute = false;
  // Accept zero-gain move/exchange/replicate, at most this many times per call.
  bool allow_zero_gain = false;
  std::size_t zero_gain_budget = 0;
};

struct RefineStats {
  Weight initial_hop_distance = 0;
  Weight final_hop_distance = 0;
  std::size_t applied[4] = {0, 0, 0, 0};
  std::size_t rejected = 0;

  std::size_t applied_total() const { return applied[0] + applied[1] + applied[2] + applied[3]; }
};

/// Called after every applied operation with the operation and the refiner.
class Refiner;
using Observer = std::function<void(const Op&, const Refiner&)>;

/// Placement under refinement with incremental objective/constraint state and
/// a bank of 1 + 3K addressable max-heaps of operation gains: one exchange
/// heap plus a move, a replicate and a remove heap per destination FPGA.
/// Only boundary vertices (a replica, or an incident net touching two or more
/// FPGAs) hold entries; every stored gain is exact for the current placement.
class Refiner {
 public:
  Refiner(const Hypergraph& h, const MfsTopology& t, Placement start, RefineConfig config = {});
  ~Refiner();
  Refiner(const Refiner&) = delete;
  Refiner& operator=(const Refiner&) = delete;

  const Placement& placement() const;
  Placement take_placement() &&;
  Weight total_hop_distance() const;
  const std::vector<ResourceVector>& resource_usage() const;
  const std::vector<Weight>& io_usage() const;

  /// Structural legality of `op` for the current host sets.
  bool is_legal(const Op& op) const;
  /// Hop-distance decrease of a legal op, computed from the nets it touches.
  Weight gain(const Op& op) const;
  /// Capacity, I/O and hop-limit check for the state after a legal op.
  bool feasible(const Op& op) const;

  /// Applies a legal op. With `propagate` false the heap bank is left stale
  /// (used to exercise the gain checker).
  void apply(const Op& op, bool propagate = true);

  /// Every heap entry with its stored gain.
  std::vector<Op> heap_entries() const;
  std::size_t heap_count() const;

  /// Highest-gain loop until no applicable entry remains.
  RefineStats run(const Observer& observer = {});

  /// A uniformly drawn legal op of an enabled kind, if any exists for the
  /// drawn vertex.
  std::optional<Op> random_op(Rng& rng) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// THD(p) - THD(p with original[v] := f); local evaluation over I(v).
Weight gain_move(const Hypergraph& h, const Placement& p, const HopMatrix& hm, VertexId v, FpgaId f);
/// Joint THD decrease of swapping the originals of u and v.
Weight gain_exchange(const Hypergraph& h, const Placement& p, const HopMatrix& hm, VertexId u, VertexId v);
/// THD decrease of adding a replica of v on f.
Weight gain_replicate(const Hypergraph& h, const Placement& p, const HopMatrix& hm, VertexId v, FpgaId f);
/// THD decrease of dropping the replica of v on f.
Weight gain_delete(const Hypergraph& h, const Placement& p, const HopMatrix& hm, VertexId v, FpgaId f);

/// Apply `op` to a bare placement (no legality checks beyond Placement's own).
void apply_to_placement(Placement& p, const Op& op);

struct LevelResult {
  Placement placement;
  RefineStats stats;
};

LevelResult refine_level(const Hypergraph& h, const MfsTopology& t, Placement start,
                         const RefineConfig& config = {}, const Observer& observer = {});

/// Fine placement from a coarse one: every constituent inherits its
/// hypernode's original and replicas.
Placement project_to_finer(const coarsen::Level& level, const Placement& coarse);

/// Applies `num_ops` random legal ops (seeded) and after each compares every
/// heap entry with a from-scratch recomputation via the metrics module.
/// `inject_stale_after` applies that op index without gain propagation.
bool incremental_vs_full_check(const Hypergraph& h, const MfsTopology& t, Placement start,
                               std::size_t num_ops, std::uint64_t seed,
                               std::optional<std::size_t> inject_stale_after = std::nullopt);

}  // namespace hopart::refine
