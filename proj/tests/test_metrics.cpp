#include <sstream>
#include "doctest.h"
#include "helpers.hpp"
#include "hopart/metrics.hpp"
#include "hopart/rng.hpp"

using namespace hopart;
using hopart::testing::path_topology;
using hopart::testing::unit_graph;

TEST_CASE("local nets cost nothing") {
  const auto h = unit_graph(3, {{2, 0, {1, 2}}});
  const auto t = path_topology(2, ResourceVector{5});
  const Placement p({1, 1, 1});
  CHECK(net_hop_distance(h, 0, p, t.hops()) == 0);
  CHECK(total_hop_distance(h, p, t.hops()) == 0);
  CHECK(cut_size(h, p) == 0);
  CHECK(io_usage(h, p, t.hops(), 1) == 0);
}

TEST_CASE("weighted crossing net") {
  const auto h = unit_graph(2, {{3, 0, {1}}});
  const auto t = path_topology(2, ResourceVector{5});
  const Placement p({0, 1});
  CHECK(total_hop_distance(h, p, t.hops()) == 3);
}

TEST_CASE("io of a crossing net") {
  const auto h = unit_graph(2, {{2, 0, {1}}});
  const auto t = path_topology(2, ResourceVector{5});
  const Placement p({0, 1});
  CHECK(io_usage(h, p, t.hops(), 0) == 2);
  CHECK(io_usage(h, p, t.hops(), 1) == 2);
}

TEST_CASE("nearest source copy serves each drain FPGA") {
  const auto h = unit_graph(2, {{1, 0, {1}}});
  const auto t = path_topology(3, ResourceVector{5});
  Placement p({0, 1});
  p.add_replica(0, 2);
  CHECK(net_hop_distance(h, 0, p, t.hops()) == 1);
  CHECK(serving_host(p, 0, t.hops(), 1) == 0);  // tie between 0 and 2
}

TEST_CASE("replication example") {
  auto ex = hopart::testing::replication_example();
  const auto& hm = ex.t.hops();
  CHECK(total_hop_distance(ex.h, ex.p, hm) == 3);
  CHECK(cut_size(ex.h, ex.p) == 3);
  ex.p.add_replica(1, 2);
  CHECK(total_hop_distance(ex.h, ex.p, hm) == 1);
  CHECK(net_hop_distance(ex.h, 0, ex.p, hm) == 1);
  CHECK(cut_size(ex.h, ex.p) == 1);
  CHECK(io_usage(ex.h, ex.p, hm, 2) == 1);
  CHECK(io_usage(ex.h, ex.p, hm, 1) == 1);
}

TEST_CASE("resource violation") {
  const auto h = hopart::testing::make_graph({ResourceVector{5}}, {});
  const auto t = path_topology(2, ResourceVector{4});
  const auto v = validate(h, t, Placement({0}));
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::resource);
  CHECK(v[0].observed == 5);
  CHECK(v[0].limit == 4);
}

TEST_CASE("hop violation") {
  const auto h = unit_graph(2, {{1, 0, {1}}});
  const auto t = path_topology(4, ResourceVector{4}, 2);
  const auto v = validate(h, t, Placement({0, 3}));
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::hop);
  CHECK(v[0].observed == 3);
  CHECK(v[0].limit == 2);
  CHECK(validate(h, t, Placement({0, 2})).empty());
}

TEST_CASE("io violation and malformed placements") {
  const auto h = unit_graph(2, {{3, 0, {1}}});
  const auto t = path_topology(2, ResourceVector{4}, std::nullopt, 2);
  const auto v = validate(h, t, Placement({0, 1}));
  REQUIRE(v.size() == 2);
  CHECK(v[0].kind == ViolationKind::io);
  CHECK(validate(h, t, Placement({0})).at(0).kind == ViolationKind::placement);
  CHECK(validate(h, t, Placement({0, 2})).at(0).kind == ViolationKind::placement);
  CHECK(validate(h, t, Placement({0, 1}, {{0}, {}})).at(0).kind == ViolationKind::placement);
}

TEST_CASE("report keys") {
  auto ex = hopart::testing::replication_example();
  std::ostringstream out;
  write_report(out, evaluate(ex.h, ex.t, ex.p));
  CHECK(out.str().rfind("{\"total_hop_distance\":3,\"cut_size\":3,\"max_hop\":1,\"replica_count\":0", 0) == 0);
}

namespace {

// Cut by definition: a drain copy sits on an FPGA without a source copy.
std::size_t brute_cut(const Hypergraph& h, const Placement& p, std::size_t k) {
  std::size_t cut = 0;
  for (const auto& e : h.edges()) {
    bool needs_link = false;
    for (FpgaId f = 0; f < static_cast<FpgaId>(k); ++f) {
      bool drain_here = false;
      for (VertexId d : e.drains) drain_here = drain_here || p.hosted_on(d, f);
      needs_link = needs_link || (drain_here && !p.hosted_on(e.source, f));
    }
    cut += needs_link ? 1 : 0;
  }
  return cut;
}

}  // namespace

TEST_CASE("metric properties on random placements") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto inst = io::gen_instance(hopart::testing::small_config(seed, 8, 3));
    const auto& h = inst.hypergraph;
    const auto& t = inst.topology;
    Rng rng(seed * 7);
    std::vector<FpgaId> orig(8);
    for (auto& f : orig) f = static_cast<FpgaId>(rng.below(3));
    Placement p(orig);
    for (int i = 0; i < 4; ++i) {
      const auto v = static_cast<VertexId>(rng.below(8));
      const auto f = static_cast<FpgaId>(rng.below(3));
      if (!p.hosted_on(v, f)) p.add_replica(v, f);
    }
    CHECK(cut_size(h, p) == brute_cut(h, p, 3));
    std::size_t costly = 0;
    for (EdgeId e = 0; e < static_cast<EdgeId>(h.num_edges()); ++e) costly += net_hop_distance(h, e, p, t.hops()) > 0;
    CHECK(cut_size(h, p) == costly);

    // Relabel FPGAs consistently: 0 -> 2, 1 -> 0, 2 -> 1.
    const std::vector<FpgaId> perm{2, 0, 1};
    std::vector<FpgaSpec> fpgas(3);
    for (FpgaId f = 0; f < 3; ++f) fpgas[perm[f]] = t.fpgas()[f];
    std::vector<std::pair<FpgaId, FpgaId>> links;
    for (auto [a, b] : t.links()) links.emplace_back(perm[a], perm[b]);
    const MfsTopology relabeled(fpgas, links);
    std::vector<FpgaId> orig2(8);
    std::vector<std::vector<FpgaId>> reps2(8);
    for (VertexId v = 0; v < 8; ++v) {
      orig2[v] = perm[p.original(v)];
      for (FpgaId r : p.replicas(v)) reps2[v].push_back(perm[r]);
    }
    const Placement q(orig2, reps2);
    CHECK(total_hop_distance(h, p, t.hops()) == total_hop_distance(h, q, relabeled.hops()));
  }
}
