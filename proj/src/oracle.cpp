#include "hopart/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hopart/metrics.hpp"

namespace hopart::oracle {

ExhaustiveResult exhaustive_partition(const Hypergraph& h, const MfsTopology& t) {
  const std::size_t n = h.num_vertices();
  const std::size_t k = t.num_fpgas();
  if (static_cast<double>(n) * std::log(static_cast<double>(k)) > std::log(kEnumerationLimit) + 1e-9) {
    throw std::invalid_argument("instance too large for exhaustive enumeration (K^|V| > 1e7)");
  }
  ExhaustiveResult result;
  Weight best = std::numeric_limits<Weight>::max();
  std::vector<FpgaId> parts(n, 0);
  // Odometer over assignments in lexicographic order; strict improvement
  // keeps the lexicographically smallest optimum.
  while (true) {
    Placement p(parts);
    ++result.evaluated;
    if (validate(h, t, p).empty()) {
      const Weight thd = total_hop_distance(h, p, t.hops());
      if (thd < best) {
        best = thd;
        result.placement = std::move(p);
        result.total_hop_distance = thd;
      }
    }
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++parts[i] < static_cast<FpgaId>(k)) break;
      parts[i] = 0;
      if (i == 0) return result;
    }
    if (n == 0) return result;
  }
}

std::optional<Replication> best_single_replication(const Hypergraph& h, const MfsTopology& t,
                                                   const Placement& p) {
  const Weight base = total_hop_distance(h, p, t.hops());
  std::optional<Replication> best;
  for (VertexId v = 0; v < static_cast<VertexId>(h.num_vertices()); ++v) {
    for (FpgaId f = 0; f < static_cast<FpgaId>(t.num_fpgas()); ++f) {
      if (p.hosted_on(v, f)) continue;
      Placement next = p;
      next.add_replica(v, f);
      if (!validate(h, t, next).empty()) continue;
      const Weight gain = base - total_hop_distance(h, next, t.hops());
      if (!best || gain > best->gain) best = Replication{v, f, gain};
    }
  }
  return best;
}

Weight full_gain_recompute(const Hypergraph& h, const Placement& p, const HopMatrix& hm,
                           const refine::Op& op) {
  Placement after = p;
  refine::apply_to_placement(after, op);
  return total_hop_distance(h, p, hm) - total_hop_distance(h, after, hm);
}

}  // namespace hopart::oracle
