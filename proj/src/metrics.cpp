#include "hopart/metrics.hpp"

#include <algorithm>
#include <ostream>

#include "json.hpp"

namespace hopart {

FpgaId serving_host(const Placement& p, VertexId source, const HopMatrix& hm, FpgaId target) {
  FpgaId best = p.original(source);
  int best_hops = hm(best, target);
  for (FpgaId r : p.replicas(source)) {
    const int hops = hm(r, target);
    if (hops < best_hops || (hops == best_hops && r < best)) {
      best = r;
      best_hops = hops;
    }
  }
  return best;
}

long net_hop_distance(const Hypergraph& h, EdgeId e, const Placement& p, const HopMatrix& hm) {
  const VertexId src = h.edge(e).source;
  long cost = 0;
  for (FpgaId f : drain_fpgas(h, e, p)) {
    cost += hm(serving_host(p, src, hm, f), f);
  }
  return cost;
}

Weight total_hop_distance(const Hypergraph& h, const Placement& p, const HopMatrix& hm) {
  Weight total = 0;
  for (EdgeId e = 0; e < static_cast<EdgeId>(h.num_edges()); ++e) {
    total += h.edge(e).weight * net_hop_distance(h, e, p, hm);
  }
  return total;
}

std::size_t cut_size(const Hypergraph& h, const Placement& p) {
  std::size_t cut = 0;
  for (EdgeId e = 0; e < static_cast<EdgeId>(h.num_edges()); ++e) {
    const VertexId src = h.edge(e).source;
    const auto drains = drain_fpgas(h, e, p);
    if (std::any_of(drains.begin(), drains.end(), [&](FpgaId f) { return !p.hosted_on(src, f); })) ++cut;
  }
  return cut;
}

namespace {

// Adds the I/O contribution of net `e` to `io`.
void accumulate_net_io(const Hypergraph& h, EdgeId e, const Placement& p, const HopMatrix& hm,
                       std::vector<Weight>& io) {
  const auto& edge = h.edge(e);
  std::vector<FpgaId> exporters;
  for (FpgaId f : drain_fpgas(h, e, p)) {
    if (p.hosted_on(edge.source, f)) continue;
    io[f] += edge.weight;
    exporters.push_back(serving_host(p, edge.source, hm, f));
  }
  std::sort(exporters.begin(), exporters.end());
  exporters.erase(std::unique(exporters.begin(), exporters.end()), exporters.end());
  for (FpgaId f : exporters) io[f] += edge.weight;
}

}  // namespace

std::vector<Weight> io_usages(const Hypergraph& h, const Placement& p, const HopMatrix& hm,
                              std::size_t num_fpgas) {
  std::vector<Weight> io(num_fpgas, 0);
  for (EdgeId e = 0; e < static_cast<EdgeId>(h.num_edges()); ++e) accumulate_net_io(h, e, p, hm, io);
  return io;
}

Weight io_usage(const Hypergraph& h, const Placement& p, const HopMatrix& hm, FpgaId f) {
  return io_usages(h, p, hm, hm.size()).at(f);
}

std::vector<ResourceVector> resource_usages(const Hypergraph& h, const Placement& p,
                                            std::size_t num_fpgas) {
  std::vector<ResourceVector> usage(num_fpgas, ResourceVector(h.num_types()));
  for (VertexId v = 0; v < static_cast<VertexId>(h.num_vertices()); ++v) {
    usage[p.original(v)] += h.vertex_weight(v);
    for (FpgaId r : p.replicas(v)) usage[r] += h.vertex_weight(v);
  }
  return usage;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::resource: return "resource";
    case ViolationKind::io: return "io";
    case ViolationKind::hop: return "hop";
    case ViolationKind::placement: return "placement";
  }
  return "unknown";
}

namespace {

void check_placement(const Hypergraph& h, std::size_t num_fpgas, const Placement& p,
                     std::vector<Violation>& out) {
  const long n = static_cast<long>(h.num_vertices());
  const long m = static_cast<long>(p.num_vertices());
  if (n != m) {
    out.push_back({ViolationKind::placement, -1, std::max(n, m), std::min(n, m)});
    return;
  }
  const long k = static_cast<long>(num_fpgas);
  auto check_range = [&](VertexId v, FpgaId f) {
    if (f >= k) {
      out.push_back({ViolationKind::placement, v, f, k - 1});
    } else if (f < 0) {
      out.push_back({ViolationKind::placement, v, -static_cast<long>(f), 0});
    }
  };
  for (VertexId v = 0; v < static_cast<VertexId>(n); ++v) {
    check_range(v, p.original(v));
    const auto& reps = p.replicas(v);
    for (std::size_t i = 0; i < reps.size(); ++i) {
      check_range(v, reps[i]);
      // Two copies of the same vertex on one FPGA.
      const bool duplicate = reps[i] == p.original(v) || (i > 0 && reps[i] == reps[i - 1]);
      if (duplicate) out.push_back({ViolationKind::placement, v, 2, 1});
    }
  }
}

}  // namespace

std::vector<Violation> validate(const Hypergraph& h, const MfsTopology& t, const Placement& p) {
  std::vector<Violation> out;
  const std::size_t k = t.num_fpgas();
  check_placement(h, k, p, out);
  if (!out.empty()) return out;

  const auto usage = resource_usages(h, p, k);
  for (FpgaId f = 0; f < static_cast<FpgaId>(k); ++f) {
    for (std::size_t i = 0; i < h.num_types(); ++i) {
      if (usage[f][i] > t.capacity(f)[i]) {
        out.push_back({ViolationKind::resource, f, static_cast<long>(usage[f][i]),
                       static_cast<long>(t.capacity(f)[i]), static_cast<int>(i)});
      }
    }
  }
  const auto& hm = t.hops();
  const auto io = io_usages(h, p, hm, k);
  for (FpgaId f = 0; f < static_cast<FpgaId>(k); ++f) {
    if (io[f] > t.io_limit(f)) {
      out.push_back({ViolationKind::io, f, static_cast<long>(io[f]), static_cast<long>(t.io_limit(f))});
    }
  }
  if (t.hop_max()) {
    for (EdgeId e = 0; e < static_cast<EdgeId>(h.num_edges()); ++e) {
      int worst = 0;
      for (FpgaId f : drain_fpgas(h, e, p)) {
        worst = std::max(worst, hm(serving_host(p, h.edge(e).source, hm, f), f));
      }
      if (!t.hop_allowed(worst)) out.push_back({ViolationKind::hop, e, worst, *t.hop_max()});
    }
  }
  return out;
}

MetricsReport evaluate(const Hypergraph& h, const MfsTopology& t, const Placement& p) {
  MetricsReport report;
  const auto violations = validate(h, t, p);
  report.violation_count = violations.size();
  if (!violations.empty() && violations.front().kind == ViolationKind::placement) {
    return report;
  }
  const auto& hm = t.hops();
  report.total_hop_distance = total_hop_distance(h, p, hm);
  report.cut_size = cut_size(h, p);
  report.fpga_usage = resource_usages(h, p, t.num_fpgas());
  report.io_usage = io_usages(h, p, hm, t.num_fpgas());
  report.replica_count = p.replica_count();
  for (EdgeId e = 0; e < static_cast<EdgeId>(h.num_edges()); ++e) {
    for (FpgaId f : drain_fpgas(h, e, p)) {
      report.max_hop = std::max(report.max_hop, hm(serving_host(p, h.edge(e).source, hm, f), f));
    }
  }
  return report;
}

void write_report(std::ostream& out, const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["total_hop_distance"] = report.total_hop_distance;
  j["cut_size"] = report.cut_size;
  j["max_hop"] = report.max_hop;
  j["replica_count"] = report.replica_count;
  j["violations"] = report.violation_count;
  j["io_usage"] = report.io_usage;
  auto usage = nlohmann::ordered_json::array();
  for (const auto& u : report.fpga_usage) {
    usage.push_back(std::vector<Weight>(u.values().begin(), u.values().end()));
  }
  j["fpga_usage"] = std::move(usage);
  out << j.dump() << '\n';
}

void write_violations(std::ostream& out, const std::vector<Violation>& violations) {
  for (const auto& v : violations) {
    out << to_string(v.kind) << " id=" << v.id;
    if (v.type >= 0) out << " type=" << v.type;
    out << " observed=" << v.observed << " limit=" << v.limit << '\n';
  }
}

}  // namespace hopart
