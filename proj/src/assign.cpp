#include "hopart/assign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "hopart/rng.hpp"

namespace hopart::assign {

double fpga_heat(const MfsTopology& t, const HopMatrix& hm, FpgaId f) {
  if (t.num_fpgas() < 2) return 1.0;
  return static_cast<double>(t.capacity(f).sum_of_squares()) / static_cast<double>(hop_sum(t, hm, f));
}

double node_heat(const Hypergraph& h, VertexId v) {
  Weight incident = 0;
  for (EdgeId e : h.incident_edges(v)) incident += h.edge(e).weight;
  return static_cast<double>(incident) * static_cast<double>(h.vertex_weight(v).sum_of_squares());
}

HeatScores compute_heats(const Hypergraph& h, const MfsTopology& t) {
  HeatScores heats;
  for (FpgaId f = 0; f < static_cast<FpgaId>(t.num_fpgas()); ++f) {
    heats.fpga_heat.push_back(fpga_heat(t, t.hops(), f));
  }
  for (VertexId v = 0; v < static_cast<VertexId>(h.num_vertices()); ++v) {
    heats.node_heat.push_back(node_heat(h, v));
  }
  return heats;
}

std::size_t resume_depth(std::size_t depth, double rho) {
  return static_cast<std::size_t>(std::floor(rho * static_cast<double>(depth)));
}

bool stall_detected(Weight previous, Weight current, double delta) {
  if (previous <= 0) return false;
  const double change = std::abs(static_cast<double>(current - previous)) / static_cast<double>(previous);
  return change < delta;
}

namespace {

template <typename Id>
std::vector<Id> descending_order(const std::vector<double>& keys) {
  std::vector<Id> order(keys.size());
  std::iota(order.begin(), order.end(), Id{0});
  std::stable_sort(order.begin(), order.end(), [&](Id a, Id b) { return keys[a] > keys[b]; });
  return order;
}

void apply_jitter(std::vector<double>& keys, Rng& rng) {
  for (double& k : keys) k *= 0.9 + 0.2 * rng.unit();
}

// Incremental bookkeeping for a partial unreplicated assignment.
class PartialAssignment {
 public:
  PartialAssignment(const Hypergraph& h, const MfsTopology& t)
      : h_(h),
        t_(t),
        hm_(t.hops()),
        part_(h.num_vertices(), -1),
        usage_(t.num_fpgas(), ResourceVector(h.num_types())),
        io_(t.num_fpgas(), 0),
        source_part_(h.num_edges(), -1),
        drain_counts_(h.num_edges()),
        unplaced_(h.num_edges()) {
    for (EdgeId e = 0; e < static_cast<EdgeId>(h.num_edges()); ++e) {
      unplaced_[e] = static_cast<int>(h.edge(e).size());
    }
  }

  Weight partial_cost() const { return partial_; }
  const std::vector<FpgaId>& parts() const { return part_; }

  // Places u on f and reports whether every constraint still holds.
  bool place(VertexId u, FpgaId f) {
    part_[u] = f;
    usage_[f] += h_.vertex_weight(u);
    touched_io_.clear();
    for (EdgeId eid : h_.incidence(u)) {
      const auto& e = h_.edge(eid);
      auto& counts = drain_counts_[eid];
      if (e.source == u) {
        source_part_[eid] = f;
        for (auto [g, c] : counts) add_pair(e.weight, f, g, +1);
      } else {
        auto it = std::find_if(counts.begin(), counts.end(), [f](auto& p) { return p.first == f; });
        if (it != counts.end()) {
          ++it->second;
        } else {
          counts.emplace_back(f, 1);
          if (source_part_[eid] >= 0) add_pair(e.weight, source_part_[eid], f, +1);
        }
      }
      if (--unplaced_[eid] == 0) net_io(eid, +1);
    }
    if (!usage_[f].fits_within(t_.capacity(f)) || hop_violations_ > 0) return false;
    return std::all_of(touched_io_.begin(), touched_io_.end(),
                       [&](FpgaId g) { return io_[g] <= t_.io_limit(g); });
  }

  void unplace(VertexId u) {
    const FpgaId f = part_[u];
    for (EdgeId eid : h_.incidence(u)) {
      const auto& e = h_.edge(eid);
      auto& counts = drain_counts_[eid];
      if (unplaced_[eid]++ == 0) net_io(eid, -1);
      if (e.source == u) {
        for (auto [g, c] : counts) add_pair(e.weight, f, g, -1);
        source_part_[eid] = -1;
      } else {
        auto it = std::find_if(counts.begin(), counts.end(), [f](auto& p) { return p.first == f; });
        if (--it->second == 0) {
          counts.erase(it);
          if (source_part_[eid] >= 0) add_pair(e.weight, source_part_[eid], f, -1);
        }
      }
    }
    usage_[f] -= h_.vertex_weight(u);
    part_[u] = -1;
  }

 private:
  void add_pair(Weight w, FpgaId src, FpgaId drain, int sign) {
    const int hops = hm_(src, drain);
    partial_ += sign * w * hops;
    if (!t_.hop_allowed(hops)) hop_violations_ += sign;
  }

  void net_io(EdgeId eid, int sign) {
    const auto& e = h_.edge(eid);
    const FpgaId s = source_part_[eid];
    bool external = false;
    for (auto [g, c] : drain_counts_[eid]) {
      if (g == s) continue;
      io_[g] += sign * e.weight;
      touched_io_.push_back(g);
      external = true;
    }
    if (external) {
      io_[s] += sign * e.weight;
      touched_io_.push_back(s);
    }
  }

  const Hypergraph& h_;
  const MfsTopology& t_;
  const HopMatrix& hm_;
  std::vector<FpgaId> part_;
  std::vector<ResourceVector> usage_;
  std::vector<Weight> io_;
  std::vector<FpgaId> source_part_;
  std::vector<std::vector<std::pair<FpgaId, int>>> drain_counts_;
  std::vector<int> unplaced_;
  std::vector<FpgaId> touched_io_;
  Weight partial_ = 0;
  long hop_violations_ = 0;
};

}  // namespace

AssignResult dfs_assign(const Hypergraph& h, const MfsTopology& t, const SearchBudget& budget,
                        const AssignOptions& options) {
  HeatScores heats = compute_heats(h, t);
  Rng rng(options.seed);
  if (options.jitter == Jitter::nodes) apply_jitter(heats.node_heat, rng);
  if (options.jitter == Jitter::fpgas) apply_jitter(heats.fpga_heat, rng);
  const auto node_order = descending_order<VertexId>(heats.node_heat);
  const auto fpga_order = descending_order<FpgaId>(heats.fpga_heat);

  const std::size_t n = node_order.size();
  const std::size_t k = fpga_order.size();
  const auto start = std::chrono::steady_clock::now();

  AssignResult result;
  result.seed = options.seed;
  PartialAssignment state(h, t);
  Weight best = std::numeric_limits<Weight>::max();
  Weight previous = -1;
  std::vector<std::size_t> next_candidate(n + 1, 0);
  std::size_t depth = 0;
  bool out_of_budget = false;

  auto budget_left = [&] {
    if (result.nodes >= budget.max_nodes || result.solutions >= budget.max_solutions) return false;
    if (budget.wall_clock.count() > 0 && result.nodes % 1000 == 0 &&
        std::chrono::steady_clock::now() - start >= budget.wall_clock) {
      return false;
    }
    return true;
  };

  while (true) {
    if (depth == n) {
      best = state.partial_cost();
      result.placement = Placement(state.parts());
      result.total_hop_distance = best;
      ++result.solutions;
      if (best == 0 || n == 0) break;
      std::size_t target = n - 1;
      if (budget.deep_backtracking && previous >= 0 && stall_detected(previous, best, budget.stall_delta)) {
        target = resume_depth(n, budget.rho);
        ++result.deep_backtracks;
      }
      previous = best;
      for (std::size_t d = n; d-- > target;) state.unplace(node_order[d]);
      depth = target;
      continue;
    }

    const VertexId u = node_order[depth];
    bool advanced = false;
    while (next_candidate[depth] < k) {
      if (!budget_left()) {
        out_of_budget = true;
        break;
      }
      const FpgaId f = fpga_order[next_candidate[depth]++];
      ++result.nodes;
      if (state.place(u, f) && state.partial_cost() < best) {
        advanced = true;
        break;
      }
      state.unplace(u);
    }
    if (out_of_budget) break;
    if (advanced) {
      next_candidate[++depth] = 0;
      continue;
    }
    next_candidate[depth] = 0;
    if (depth == 0) break;
    state.unplace(node_order[--depth]);
  }

  const bool found = result.solutions > 0;
  if (found) {
    result.status = out_of_budget ? AssignStatus::budget_exhausted : AssignStatus::complete;
  } else {
    result.status = out_of_budget ? AssignStatus::budget_exhausted_no_solution : AssignStatus::no_solution;
  }
  return result;
}

AssignResult parallel_assign(const Hypergraph& h, const MfsTopology& t, const SearchBudget& budget,
                             const std::vector<std::uint64_t>& seeds, Jitter jitter) {
  if (seeds.empty()) return dfs_assign(h, t, budget);
  std::vector<AssignResult> results(seeds.size());
  {
    std::vector<std::jthread> workers;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      workers.emplace_back([&, i] { results[i] = dfs_assign(h, t, budget, {jitter, seeds[i]}); });
    }
  }
  const AssignResult* best = nullptr;
  for (const auto& r : results) {
    if (!r.has_solution()) continue;
    if (!best || r.total_hop_distance < best->total_hop_distance ||
        (r.total_hop_distance == best->total_hop_distance && r.seed < best->seed)) {
      best = &r;
    }
  }
  if (best) return *best;
  // No run found a placement; report budget exhaustion if any run ran out.
  for (const auto& r : results) {
    if (r.status == AssignStatus::budget_exhausted_no_solution) return r;
  }
  return results.front();
}

}  // namespace hopart::assign
