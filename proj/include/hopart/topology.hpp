#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hopart/model.hpp"

namespace hopart {

/// K x K shortest-path link counts between FPGAs.
class HopMatrix {
 public:
  HopMatrix() = default;
  explicit HopMatrix(std::size_t k, int fill = 0) : k_(k), hops_(k * k, fill) {}

  std::size_t size() const { return k_; }
  int operator()(FpgaId a, FpgaId b) const { return hops_[a * k_ + b]; }
  int& at(FpgaId a, FpgaId b) { return hops_[a * k_ + b]; }

  friend bool operator==(const HopMatrix&, const HopMatrix&) = default;

 private:
  std::size_t k_ = 0;
  std::vector<int> hops_;
};

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr Weight kUnlimited = std::numeric_limits<Weight>::max();

struct FpgaSpec {
  ResourceVector capacity;
  Weight io_limit = kUnlimited;
};

/// Multi-FPGA system: per-FPGA capacities and I/O limits plus an undirected,
/// unit-cost link graph. The constructor rejects self-links, duplicate links
/// and disconnected systems, and precomputes the hop matrix.
class MfsTopology {
 public:
  MfsTopology() = default;
  MfsTopology(std::vector<FpgaSpec> fpgas, std::vector<std::pair<FpgaId, FpgaId>> links,
              std::optional<int> hop_max = std::nullopt);

  std::size_t num_fpgas() const { return fpgas_.size(); }
  std::size_t num_types() const { return fpgas_.empty() ? 0 : fpgas_[0].capacity.size(); }
  const ResourceVector& capacity(FpgaId f) const { return fpgas_[f].capacity; }
  Weight io_limit(FpgaId f) const { return fpgas_[f].io_limit; }
  const std::vector<FpgaSpec>& fpgas() const { return fpgas_; }
  const std::vector<std::pair<FpgaId, FpgaId>>& links() const { return links_; }
  const std::vector<std::vector<FpgaId>>& neighbors() const { return adjacency_; }

  /// Unset means no maximum-hop constraint.
  std::optional<int> hop_max() const { return hop_max_; }
  bool hop_allowed(int hops) const { return !hop_max_ || hops <= *hop_max_; }

  const HopMatrix& hops() const { return hops_; }

  /// Per-type maximum over FPGAs; the largest thing that could ever be placed.
  ResourceVector max_capacity() const;

  /// Replace every capacity by the ε-imbalance limit floor((1+ε)·ceil(W_i/K)).
  MfsTopology with_imbalance_capacities(const ResourceVector& total_weight, double epsilon) const;

 private:
  std::vector<FpgaSpec> fpgas_;
  std::vector<std::pair<FpgaId, FpgaId>> links_;
  std::vector<std::vector<FpgaId>> adjacency_;
  std::optional<int> hop_max_;
  HopMatrix hops_;
};

/// One BFS per FPGA. Throws TopologyError naming the first unreachable pair.
HopMatrix compute_hop_matrix(std::size_t num_fpgas, const std::vector<std::vector<FpgaId>>& adjacency);
inline HopMatrix compute_hop_matrix(const MfsTopology& t) {
  return compute_hop_matrix(t.num_fpgas(), t.neighbors());
}

/// C̄: per-type arithmetic mean of FPGA capacities.
std::vector<double> mean_capacity(const MfsTopology& t);

inline constexpr int kHopPenalty = 2;

/// Topological centrality denominator: sum of hops to all other FPGAs, with
/// hops beyond hop_max charged kHopPenalty * hop_max.
long hop_sum(const MfsTopology& t, const HopMatrix& hm, FpgaId f);

}  // namespace hopart
