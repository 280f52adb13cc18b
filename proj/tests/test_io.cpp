#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "hopart/io.hpp"
#include "hopart/metrics.hpp"
#include "hopart/rng.hpp"

using namespace hopart;

TEST_CASE("parse a three-vertex hypergraph") {
  const auto h = io::parse_hypergraph("3 1 1\n1\n1\n1\n2 0 1 2\n");
  CHECK(h.num_vertices() == 3);
  REQUIRE(h.num_edges() == 1);
  CHECK(h.edge(0).weight == 2);
  CHECK(h.edge(0).source == 0);
  CHECK(h.edge(0).drains == std::vector<VertexId>{1, 2});
}

TEST_CASE("hypergraph parse errors carry position and reason") {
  auto reason_of = [](const std::string& text) {
    try {
      io::parse_hypergraph(text);
    } catch (const io::ParseError& e) {
      return e.reason();
    }
    return std::string("no error");
  };
  CHECK(reason_of("2 1 1\n1\n1\n1 0 0\n").find("source repeated in drains") != std::string::npos);
  CHECK(reason_of("2 1\n").find("malformed header") != std::string::npos);
  CHECK(reason_of("x 1 1\n").find("vertex count") != std::string::npos);
  CHECK(reason_of("2 1 1\n-1\n1\n1 0 1\n").find("negative weight") != std::string::npos);
  CHECK(reason_of("2 1 1\n1\n1\n1 0 7\n").find("dangling vertex id 7") != std::string::npos);
  CHECK(reason_of("2 1 1\n1\n1\n0 0 1\n").find("non-positive net weight") != std::string::npos);
  CHECK(reason_of("2 1 1\n1\n1\n1 0 1\n5\n").find("trailing") != std::string::npos);
  try {
    io::parse_hypergraph("# comment\n2 1 1\n1\n1\n1 0 0\n");
    FAIL("expected a parse error");
  } catch (const io::ParseError& e) {
    CHECK(e.line() == 5);
  }
}

TEST_CASE("sixteen-vertex thirteen-net file") {
  std::string text = "16 13 2\n";
  for (int v = 0; v < 16; ++v) text += std::to_string(1 + v % 3) + " " + std::to_string(v % 2) + "\n";
  for (int e = 0; e < 13; ++e) {
    text += "1 " + std::to_string(e) + " " + std::to_string(e + 1) + " " + std::to_string((e + 3) % 16) + "\n";
  }
  const auto h = io::parse_hypergraph(text);
  CHECK(h.num_vertices() == 16);
  CHECK(h.num_edges() == 13);
}

TEST_CASE("parse topologies") {
  const auto t = io::parse_topology("4 3 1\n5\n5\n5\n5\n0 1\n1 2\n2 3\n");
  CHECK(t.num_fpgas() == 4);
  CHECK(t.hops()(0, 3) == 3);
  CHECK(t.io_limit(0) == kUnlimited);
  CHECK_THROWS_WITH_AS(io::parse_topology("3 2 1\n5\n5\n5\n0 1\n2 2\n"), doctest::Contains("self-link"),
                       io::ParseError);
  CHECK_THROWS_WITH_AS(io::parse_topology("3 2 1\n5\n5\n5\n0 1\n1 0\n"), doctest::Contains("duplicate link"),
                       io::ParseError);

  // Eight FPGAs, eleven links: a ring plus three chords.
  std::string text = "8 11 1 3\n";
  for (int f = 0; f < 8; ++f) text += "100 40\n";
  for (int f = 0; f < 8; ++f) text += std::to_string(f) + " " + std::to_string((f + 1) % 8) + "\n";
  text += "0 4\n1 5\n2 6\n";
  const auto sample = io::parse_topology(text);
  CHECK(sample.num_fpgas() == 8);
  CHECK(sample.links().size() == 11);
  CHECK(sample.io_limit(3) == 40);
  CHECK(sample.hop_max() == 3);
}

TEST_CASE("solution lines") {
  Placement p({1, 0});
  p.add_replica(0, 3);
  CHECK(io::write_solution(p) == "1 3\n0\n");
  CHECK(io::parse_solution("1 3\n0\n") == p);
  CHECK_THROWS_WITH_AS(io::parse_solution("1 1\n"), doctest::Contains("replica equal to original"), io::ParseError);
  CHECK_THROWS_AS(io::parse_solution("1\n", 2), io::ParseError);
}

TEST_CASE("round trips") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto bundle = io::gen_instance(hopart::testing::small_config(seed, 40, 4));
    const auto text = io::write_hypergraph(bundle.hypergraph);
    const auto again = io::parse_hypergraph(text);
    CHECK(io::write_hypergraph(again) == text);
    for (VertexId v = 0; v < 40; ++v) {
      const auto a = bundle.hypergraph.incident_edges(v);
      const auto b = again.incident_edges(v);
      CHECK(std::vector<EdgeId>(a.begin(), a.end()) == std::vector<EdgeId>(b.begin(), b.end()));
    }
    const auto topo = io::write_topology(bundle.topology);
    CHECK(io::write_topology(io::parse_topology(topo)) == topo);

    Rng rng(seed);
    std::vector<FpgaId> orig(40);
    for (auto& f : orig) f = static_cast<FpgaId>(rng.below(4));
    Placement p(orig);
    for (int i = 0; i < 10; ++i) {
      const auto v = static_cast<VertexId>(rng.below(40));
      const auto f = static_cast<FpgaId>(rng.below(4));
      if (!p.hosted_on(v, f)) p.add_replica(v, f);
    }
    CHECK(io::parse_solution(io::write_solution(p), 40) == p);
  }
}

TEST_CASE("hMETIS reader") {
  std::vector<std::string> notes;
  const auto h = io::parse_hmetis("% netlist\n3 4\n1 2\n2 3 4\n4\n", &notes);
  CHECK(h.num_vertices() == 4);
  REQUIRE(h.num_edges() == 2);
  CHECK(h.edge(1).source == 1);
  CHECK(h.edge(1).drains == std::vector<VertexId>{2, 3});
  CHECK_FALSE(notes.empty());
  const auto weighted = io::parse_hmetis("1 2 11\n5 1 2\n3\n4\n");
  CHECK(weighted.edge(0).weight == 5);
  CHECK(weighted.vertex_weight(1) == ResourceVector{4});
}

TEST_CASE("generator") {
  const auto cfg = hopart::testing::small_config(11, 200, 4);
  const auto a = io::gen_instance(cfg);
  const auto b = io::gen_instance(cfg);
  CHECK(io::write_hypergraph(a.hypergraph) == io::write_hypergraph(b.hypergraph));
  CHECK(io::write_topology(a.topology) == io::write_topology(b.topology));

  auto empty = cfg;
  empty.vertices = 0;
  CHECK_THROWS_AS(io::gen_instance(empty), std::invalid_argument);

  // All-on-one-FPGA placements are clean exactly when that FPGA holds the total weight.
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto small = hopart::testing::small_config(seed, 10, 3);
    small.spare = seed % 2 ? 3.0 : 0.3;
    const auto inst = io::gen_instance(small);
    const auto total = inst.hypergraph.total_weight();
    for (FpgaId f = 0; f < 3; ++f) {
      const Placement p(std::vector<FpgaId>(10, f));
      CHECK(validate(inst.hypergraph, inst.topology, p).empty() == total.fits_within(inst.topology.capacity(f)));
    }
  }
}

TEST_CASE("bundles check resource type counts") {
  const auto h = hopart::testing::unit_graph(2, {{1, 0, {1}}});
  CHECK_THROWS_AS(io::make_bundle(h, hopart::testing::path_topology(2, ResourceVector{1, 1})), std::invalid_argument);
}
