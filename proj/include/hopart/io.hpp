#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hopart/model.hpp"
#include "hopart/topology.hpp"

namespace hopart::io {

/// Malformed input; carries the 1-based position of the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  // Message without the position prefix.
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string reason_;
};

// Hypergraph format ('#' starts a comment, blank lines ignored):
//   V E k
//   V lines of k non-negative integers        (resource usage per vertex)
//   E lines "w src d1 d2 ..."                 (weight, source, drains)
Hypergraph parse_hypergraph(std::string_view text, std::vector<std::string>* diagnostics = nullptr);
std::string write_hypergraph(const Hypergraph& h);

// Topology format:
//   K L k [hop_max]
//   K lines "cap_1 ... cap_k [io_limit]"      (no io_limit: unconstrained)
//   L lines "a b"
MfsTopology parse_topology(std::string_view text);
std::string write_topology(const MfsTopology& t);

// Solution format: one line per vertex, original FPGA followed by replica FPGAs.
std::string write_solution(const Placement& p);
Placement parse_solution(std::string_view text, std::optional<std::size_t> num_vertices = std::nullopt);

/// hMETIS .hgr reader (fmt 0/1/10/11, 1-based pins, '%' comments). The first
/// pin of each net becomes its source; single-pin nets are dropped and repeated
/// pins collapse, so the conversion is lossy. One resource type.
Hypergraph parse_hmetis(std::string_view text, std::vector<std::string>* diagnostics = nullptr);

struct InstanceBundle {
  Hypergraph hypergraph;
  MfsTopology topology;
  std::vector<std::string> names;  // optional, reporting only
};

/// Throws std::invalid_argument when resource type counts disagree.
InstanceBundle make_bundle(Hypergraph h, MfsTopology t);

struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::size_t vertices = 1000;
  std::size_t edges = 1000;
  std::size_t fpgas = 8;
  std::size_t types = 2;
  // Links beyond a random spanning tree.
  std::size_t extra_links = 4;
  std::size_t max_fanout = 12;
  // Probability a net is driven by a hub vertex (hubs are 5% of vertices).
  double hub_share = 0.3;
  // Probability a drain is drawn near its source in id order.
  double locality = 0.9;
  // Total capacity per type = (1 + spare) * total vertex weight.
  double spare = 0.3;
  // Per-FPGA capacity spread: multipliers uniform in [1-h, 1+h].
  double heterogeneity = 0.2;
  std::optional<int> hop_max;
  // I/O limit per FPGA as a multiple of total net weight / K; unset = unconstrained.
  std::optional<double> io_factor;
};

/// Deterministic random instance. Throws std::invalid_argument for knob
/// combinations that cannot produce a valid instance.
InstanceBundle gen_instance(const GeneratorConfig& config);

/// Throws std::ios_base::failure when the file cannot be opened.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace hopart::io
