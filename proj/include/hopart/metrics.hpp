#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "hopart/model.hpp"
#include "hopart/topology.hpp"

namespace hopart {

// Objective and constraint evaluation from scratch. Every incremental
// structure elsewhere must agree with these functions.

/// Nearest source copy serving drain FPGA `target`; ties go to the lower FPGA id.
FpgaId serving_host(const Placement& p, VertexId source, const HopMatrix& hm, FpgaId target);

/// Unweighted hop cost of one net: for every drain FPGA, hops from its
/// nearest source copy.
long net_hop_distance(const Hypergraph& h, EdgeId e, const Placement& p, const HopMatrix& hm);

Weight total_hop_distance(const Hypergraph& h, const Placement& p, const HopMatrix& hm);

/// Nets that need inter-FPGA communication: some FPGA hosting a drain copy
/// has no copy of the source.
std::size_t cut_size(const Hypergraph& h, const Placement& p);

/// Signal units leaving plus entering FPGA `f`.
Weight io_usage(const Hypergraph& h, const Placement& p, const HopMatrix& hm, FpgaId f);
std::vector<Weight> io_usages(const Hypergraph& h, const Placement& p, const HopMatrix& hm,
                              std::size_t num_fpgas);

/// Summed weight of every hosted copy (originals and replicas) per FPGA.
std::vector<ResourceVector> resource_usages(const Hypergraph& h, const Placement& p,
                                            std::size_t num_fpgas);

enum class ViolationKind { resource, io, hop, placement };

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  // FPGA id for resource/io, edge id for hop, vertex id for placement (-1 when
  // the placement does not match the hypergraph size).
  long id;
  long observed;
  long limit;
  // Resource type for resource violations, -1 otherwise.
  int type = -1;
};

/// Empty iff the placement is well-formed and respects capacities, I/O limits
/// and the maximum hop constraint.
std::vector<Violation> validate(const Hypergraph& h, const MfsTopology& t, const Placement& p);

struct MetricsReport {
  Weight total_hop_distance = 0;
  std::size_t cut_size = 0;
  std::vector<ResourceVector> fpga_usage;
  std::vector<Weight> io_usage;
  int max_hop = 0;
  std::size_t replica_count = 0;
  std::size_t violation_count = 0;
};

MetricsReport evaluate(const Hypergraph& h, const MfsTopology& t, const Placement& p);

/// Flat JSON object with keys total_hop_distance, cut_size, max_hop,
/// replica_count, violations, io_usage, fpga_usage (in that order).
void write_report(std::ostream& out, const MetricsReport& report);
void write_violations(std::ostream& out, const std::vector<Violation>& violations);

}  // namespace hopart
