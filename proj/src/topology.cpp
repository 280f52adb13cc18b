#include "hopart/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <string>

namespace hopart {

MfsTopology::MfsTopology(std::vector<FpgaSpec> fpgas, std::vector<std::pair<FpgaId, FpgaId>> links,
                         std::optional<int> hop_max)
    : fpgas_(std::move(fpgas)), hop_max_(hop_max) {
  const auto k = static_cast<FpgaId>(fpgas_.size());
  if (k == 0) throw TopologyError("topology has no FPGAs");
  for (const auto& spec : fpgas_) {
    if (spec.capacity.size() != fpgas_[0].capacity.size()) {
      throw TopologyError("FPGAs disagree on resource type count");
    }
    for (std::size_t i = 0; i < spec.capacity.size(); ++i) {
      if (spec.capacity[i] < 0) throw TopologyError("negative capacity");
    }
    if (spec.io_limit < 0) throw TopologyError("negative io limit");
  }
  if (hop_max_ && *hop_max_ < 1) throw TopologyError("hop_max must be positive");

  std::set<std::pair<FpgaId, FpgaId>> seen;
  adjacency_.resize(k);
  for (auto [a, b] : links) {
    if (a < 0 || b < 0 || a >= k || b >= k) {
      throw TopologyError("link (" + std::to_string(a) + "," + std::to_string(b) +
                          ") references a missing FPGA");
    }
    if (a == b) throw TopologyError("self-link on FPGA " + std::to_string(a));
    if (!seen.insert(std::minmax(a, b)).second) {
      throw TopologyError("duplicate link (" + std::to_string(a) + "," + std::to_string(b) + ")");
    }
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
    links_.emplace_back(a, b);
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
  hops_ = compute_hop_matrix(fpgas_.size(), adjacency_);
}

ResourceVector MfsTopology::max_capacity() const {
  ResourceVector result(num_types());
  for (const auto& spec : fpgas_) {
    for (std::size_t i = 0; i < result.size(); ++i) result[i] = std::max(result[i], spec.capacity[i]);
  }
  return result;
}

MfsTopology MfsTopology::with_imbalance_capacities(const ResourceVector& total_weight,
                                                   double epsilon) const {
  const auto k = static_cast<Weight>(num_fpgas());
  ResourceVector limit(total_weight.size());
  for (std::size_t i = 0; i < limit.size(); ++i) {
    const Weight per_part = (total_weight[i] + k - 1) / k;
    limit[i] = static_cast<Weight>(std::floor((1.0 + epsilon) * static_cast<double>(per_part)));
  }
  auto fpgas = fpgas_;
  for (auto& spec : fpgas) spec.capacity = limit;
  return MfsTopology(std::move(fpgas), links_, hop_max_);
}

HopMatrix compute_hop_matrix(std::size_t num_fpgas,
                             const std::vector<std::vector<FpgaId>>& adjacency) {
  HopMatrix hm(num_fpgas, -1);
  std::deque<FpgaId> queue;
  for (FpgaId root = 0; root < static_cast<FpgaId>(num_fpgas); ++root) {
    hm.at(root, root) = 0;
    queue.assign(1, root);
    while (!queue.empty()) {
      const FpgaId u = queue.front();
      queue.pop_front();
      for (FpgaId v : adjacency[u]) {
        if (hm(root, v) < 0) {
          hm.at(root, v) = hm(root, u) + 1;
          queue.push_back(v);
        }
      }
    }
    for (FpgaId v = 0; v < static_cast<FpgaId>(num_fpgas); ++v) {
      if (hm(root, v) < 0) {
        throw TopologyError("disconnected topology: unreachable pair (" + std::to_string(root) +
                            "," + std::to_string(v) + ")");
      }
    }
  }
  return hm;
}

std::vector<double> mean_capacity(const MfsTopology& t) {
  std::vector<double> mean(t.num_types(), 0.0);
  for (const auto& spec : t.fpgas()) {
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += static_cast<double>(spec.capacity[i]);
  }
  for (double& m : mean) m /= static_cast<double>(t.num_fpgas());
  return mean;
}

long hop_sum(const MfsTopology& t, const HopMatrix& hm, FpgaId f) {
  long sum = 0;
  for (FpgaId u = 0; u < static_cast<FpgaId>(t.num_fpgas()); ++u) {
    if (u == f) continue;
    const int hops = hm(f, u);
    sum += t.hop_allowed(hops) ? hops : kHopPenalty * *t.hop_max();
  }
  return sum;
}

}  // namespace hopart
