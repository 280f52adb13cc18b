#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "hopart/model.hpp"
#include "hopart/rng.hpp"

using namespace hopart;
using hopart::testing::unit_graph;

TEST_CASE("incident edges of a single net") {
  const auto h = unit_graph(3, {{1, 0, {1, 2}}});
  const auto i0 = h.incident_edges(0);
  CHECK(std::vector<EdgeId>(i0.begin(), i0.end()) == std::vector<EdgeId>{0});
  CHECK(h.incident_edges(2).size() == 1);
  CHECK_THROWS_AS(h.incident_edges(3), std::out_of_range);
}

TEST_CASE("star of four nets sourced at one vertex") {
  const auto h = unit_graph(5, {{1, 0, {1}}, {1, 0, {2}}, {1, 0, {3}}, {1, 0, {4}}});
  CHECK(h.incident_edges(0).size() == 4);
  CHECK(h.incident_edges(3).size() == 1);
}

TEST_CASE("edge validation") {
  HypergraphBuilder b(1);
  for (int i = 0; i < 3; ++i) b.add_vertex(ResourceVector{1});
  const std::vector<VertexId> self{0, 1};
  CHECK_THROWS_WITH_AS(b.add_edge(1, 0, self), doctest::Contains("source repeated in drains"), std::invalid_argument);
  CHECK_THROWS_AS(b.add_edge(0, 0, std::vector<VertexId>{1}), std::invalid_argument);
  CHECK_THROWS_AS(b.add_edge(1, 0, std::vector<VertexId>{}), std::invalid_argument);
  CHECK_THROWS_AS(b.add_vertex(ResourceVector{1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(b.add_vertex(ResourceVector{-1}), std::invalid_argument);
}

TEST_CASE("repeated drains are stored once") {
  HypergraphBuilder b(1);
  for (int i = 0; i < 3; ++i) b.add_vertex(ResourceVector{1});
  b.add_edge(2, 0, std::vector<VertexId>{2, 1, 2});
  CHECK(b.diagnostics().size() == 1);
  const auto h = std::move(b).build();
  CHECK(h.edge(0).drains == std::vector<VertexId>{1, 2});
  CHECK(h.edge(0).weight == 2);
}

TEST_CASE("multi-source nets split per source") {
  HypergraphBuilder b(1);
  for (int i = 0; i < 4; ++i) b.add_vertex(ResourceVector{1});
  b.add_net(3, std::vector<VertexId>{0, 1}, std::vector<VertexId>{2, 3});
  const auto h = std::move(b).build();
  REQUIRE(h.num_edges() == 2);
  CHECK(h.edge(0).source == 0);
  CHECK(h.edge(1).source == 1);
  CHECK(h.edge(1).drains == std::vector<VertexId>{2, 3});
  CHECK(h.edge(1).weight == 3);
}

TEST_CASE("dangling ids rejected at build") {
  HypergraphBuilder b(1);
  b.add_vertex(ResourceVector{1});
  b.add_edge(1, 0, std::vector<VertexId>{5});
  CHECK_THROWS_AS(std::move(b).build(), std::invalid_argument);
}

TEST_CASE("drain FPGA sets") {
  const auto h = unit_graph(4, {{1, 0, {1, 2}}, {1, 3, {0}}});
  Placement p({0, 2, 2, 0});
  CHECK(drain_fpgas(h, 0, p) == std::vector<FpgaId>{2});
  p.add_replica(1, 3);
  p.set_original(1, 1);
  CHECK(drain_fpgas(h, 0, p) == std::vector<FpgaId>{1, 2, 3});
}

TEST_CASE("replication example drain sets") {
  auto ex = hopart::testing::replication_example();
  CHECK(drain_fpgas(ex.h, 1, ex.p) == std::vector<FpgaId>{2});
  CHECK(drain_fpgas(ex.h, 0, ex.p) == std::vector<FpgaId>{1});
  ex.p.add_replica(1, 2);
  CHECK(drain_fpgas(ex.h, 0, ex.p) == std::vector<FpgaId>{1, 2});
}

TEST_CASE("placement host sets") {
  Placement p({1, 0});
  p.add_replica(0, 3);
  p.add_replica(0, 2);
  CHECK(p.hosts(0) == std::vector<FpgaId>{1, 2, 3});
  CHECK(p.replicas(0) == std::vector<FpgaId>{2, 3});
  CHECK(p.replica_count() == 2);
  CHECK_THROWS(p.add_replica(0, 1));
  CHECK_THROWS(p.remove_replica(0, 1));
  CHECK_THROWS(p.set_original(0, 2));
  p.remove_replica(0, 2);
  CHECK(p.hosts(0) == std::vector<FpgaId>{1, 3});
}

TEST_CASE("incidence is the inverse of net membership") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto h = io::gen_instance(hopart::testing::small_config(seed, 60, 3)).hypergraph;
    for (EdgeId e = 0; e < static_cast<EdgeId>(h.num_edges()); ++e) {
      std::vector<VertexId> pins = h.edge(e).drains;
      pins.push_back(h.edge(e).source);
      for (VertexId v : pins) {
        const auto inc = h.incident_edges(v);
        CHECK(std::find(inc.begin(), inc.end(), e) != inc.end());
      }
    }
    std::size_t total = 0;
    for (VertexId v = 0; v < static_cast<VertexId>(h.num_vertices()); ++v) {
      total += h.incident_edges(v).size();
      for (EdgeId e : h.incident_edges(v)) {
        const auto& edge = h.edge(e);
        CHECK((edge.source == v || std::binary_search(edge.drains.begin(), edge.drains.end(), v)));
      }
    }
    std::size_t pins = 0;
    for (const auto& e : h.edges()) pins += e.size();
    CHECK(total == pins);
  }
}

TEST_CASE("resource vector arithmetic") {
  ResourceVector a{1, 2};
  a += ResourceVector{3, 4};
  CHECK(a == ResourceVector{4, 6});
  CHECK(a.fits_within(ResourceVector{4, 6}));
  CHECK_FALSE(a.fits_within(ResourceVector{4, 5}));
  CHECK(a.sum_of_squares() == 52);
  CHECK_THROWS(a += ResourceVector{1});
}

TEST_CASE("seed derivation is stable") {
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
  CHECK(derive_seed(1, SeedStream::coarsen) != derive_seed(1, SeedStream::assign));
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(a.below(13) == b.below(13));
}
