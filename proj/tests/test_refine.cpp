#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "hopart/assign.hpp"
#include "hopart/metrics.hpp"
#include "hopart/oracle.hpp"
#include "hopart/refine.hpp"

using namespace hopart;
using namespace hopart::refine;
using hopart::testing::make_graph;
using hopart::testing::path_topology;
using hopart::testing::replication_example;
using hopart::testing::unit_graph;

namespace {

RefineConfig with_ops(std::string_view ops) {
  RefineConfig c;
  c.ops = OpSet::parse(ops);
  return c;
}

}  // namespace

TEST_CASE("op set parsing") {
  CHECK(OpSet::parse("mv,ex").to_string() == "mv,ex");
  CHECK(OpSet::parse("none").to_string() == "none");
  CHECK(OpSet::parse("del,rep").enabled(OpKind::remove));
  CHECK_FALSE(OpSet::parse("del,rep").enabled(OpKind::move));
  CHECK_THROWS_AS(OpSet::parse("mv,jump"), std::invalid_argument);
}

TEST_CASE("move gain equals the net weight and its mirror") {
  const auto h = unit_graph(2, {{5, 0, {1}}});
  const auto t = path_topology(2, ResourceVector{4});
  const Placement apart({0, 1});
  CHECK(gain_move(h, apart, t.hops(), 0, 1) == 5);
  const Placement together({1, 1});
  CHECK(gain_move(h, together, t.hops(), 0, 0) == -5);
}

TEST_CASE("exchange gain on disjoint nets is the sum of move gains") {
  const auto h = unit_graph(4, {{2, 0, {2}}, {3, 1, {3}}});
  const auto t = path_topology(2, ResourceVector{4});
  const Placement p({0, 1, 1, 0});
  const auto& hm = t.hops();
  CHECK(gain_exchange(h, p, hm, 0, 1) == gain_move(h, p, hm, 0, 1) + gain_move(h, p, hm, 1, 0));
  CHECK(gain_exchange(h, p, hm, 0, 1) == 5);
}

TEST_CASE("exchange gain on shared nets matches full recompute") {
  const auto h = unit_graph(4, {{2, 0, {1, 2}}, {1, 1, {3}}, {4, 3, {0}}});
  const auto t = path_topology(3, ResourceVector{4});
  const Placement p({0, 2, 1, 1});
  const Op op{OpKind::exchange, 0, -1, 1, 0};
  CHECK(gain_exchange(h, p, t.hops(), 0, 1) == oracle::full_gain_recompute(h, p, t.hops(), op));
}

TEST_CASE("swapping symmetric twins gains nothing") {
  const auto h = unit_graph(3, {{1, 0, {2}}, {1, 1, {2}}});
  const auto t = path_topology(2, ResourceVector{4});
  const Placement p({0, 1, 0});
  CHECK(gain_exchange(h, p, t.hops(), 0, 1) == 0);
  const Placement q({0, 1, 1, 0});
  const auto h2 = unit_graph(4, {{1, 0, {2}}, {1, 1, {3}}});
  CHECK(gain_exchange(h2, q, t.hops(), 0, 1) == 2);
}

TEST_CASE("replicating the shared driver") {
  const auto ex = replication_example();
  const auto& hm = ex.t.hops();
  CHECK(gain_replicate(ex.h, ex.p, hm, 1, 2) == 2);
  CHECK(gain_replicate(ex.h, ex.p, hm, 0, 2) == 0);

  std::vector<Op> applied;
  const auto result = refine_level(ex.h, ex.t, ex.p, with_ops("rep,del"),
                                   [&](const Op& op, const Refiner&) { applied.push_back(op); });
  REQUIRE_FALSE(applied.empty());
  CHECK(applied[0] == Op{OpKind::replicate, 1, 2, -1, 2});
  CHECK(result.placement.replicas(1) == std::vector<FpgaId>{2});
  CHECK(result.stats.final_hop_distance <= 1);
  CHECK(total_hop_distance(ex.h, result.placement, hm) == result.stats.final_hop_distance);

  RefineConfig one = with_ops("rep");
  one.max_replicas = 1;
  const auto capped = refine_level(ex.h, ex.t, ex.p, one);
  CHECK(capped.stats.final_hop_distance == 1);
}

TEST_CASE("replicate then delete restores everything") {
  const auto ex = replication_example();
  Refiner r(ex.h, ex.t, ex.p);
  const auto thd = r.total_hop_distance();
  const auto usage = r.resource_usage();
  const auto io_before = r.io_usage();
  const Op rep{OpKind::replicate, 1, 2, -1, 2};
  REQUIRE(r.is_legal(rep));
  CHECK(r.gain(rep) == 2);
  r.apply(rep);
  CHECK(r.total_hop_distance() == thd - 2);
  const Op del{OpKind::remove, 1, 2, -1, 0};
  CHECK(r.gain(del) == -2);
  r.apply(del);
  CHECK(r.total_hop_distance() == thd);
  CHECK(r.resource_usage() == usage);
  CHECK(r.io_usage() == io_before);
  CHECK(r.placement() == ex.p);
}

TEST_CASE("a useless replica is deleted before anything else") {
  // Replica of vertex 0 on FPGA 1 serves nothing; FPGA 1 is full so the
  // profitable move of vertex 2 only fits after the delete.
  const auto h = unit_graph(3, {{1, 1, {2}}});
  const auto t = path_topology(2, ResourceVector{2});
  const Placement p({0, 1, 0}, {{1}, {}, {}});
  std::vector<Op> applied;
  const auto result = refine_level(h, t, p, RefineConfig{}, [&](const Op& op, const Refiner&) {
    applied.push_back(op);
  });
  REQUIRE(applied.size() >= 2);
  CHECK(applied[0].kind == OpKind::remove);
  CHECK(result.stats.final_hop_distance == 0);
}

TEST_CASE("infeasible ops are rejected") {
  const auto h = unit_graph(2, {{1, 0, {1}}});
  const auto t = path_topology(2, ResourceVector{1});
  Refiner r(h, t, Placement({0, 1}));
  const Op mv{OpKind::move, 0, 1, -1, 0};
  CHECK(r.is_legal(mv));
  CHECK_FALSE(r.feasible(mv));
  CHECK_FALSE(r.is_legal(Op{OpKind::move, 0, 0, -1, 0}));
  CHECK_FALSE(r.is_legal(Op{OpKind::remove, 0, 1, -1, 0}));
  const auto stats = r.run();
  CHECK(stats.applied_total() == 0);
}

TEST_CASE("free gains agree with full recompute on random placements") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto inst = io::gen_instance(hopart::testing::small_config(seed, 30, 4));
    Rng rng(seed);
    std::vector<FpgaId> orig(30);
    for (auto& f : orig) f = static_cast<FpgaId>(rng.below(4));
    const Placement p(orig);
    const auto& hm = inst.topology.hops();
    for (VertexId v = 0; v < 30; ++v) {
      for (FpgaId f = 0; f < 4; ++f) {
        if (f == orig[v]) continue;
        CHECK(gain_move(inst.hypergraph, p, hm, v, f) ==
              oracle::full_gain_recompute(inst.hypergraph, p, hm, Op{OpKind::move, v, f, -1, 0}));
        CHECK(gain_replicate(inst.hypergraph, p, hm, v, f) ==
              oracle::full_gain_recompute(inst.hypergraph, p, hm, Op{OpKind::replicate, v, f, -1, 0}));
      }
    }
  }
}

TEST_CASE("incremental gains stay exact") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto inst = io::gen_instance(hopart::testing::small_config(seed, 80, 4));
    const auto start = assign::dfs_assign(inst.hypergraph, inst.topology, assign::SearchBudget{});
    REQUIRE(start.has_solution());
    CHECK(incremental_vs_full_check(inst.hypergraph, inst.topology, start.placement, 1000, seed));
    CHECK(incremental_vs_full_check(inst.hypergraph, inst.topology, start.placement, 0, seed));
  }
}

TEST_CASE("a stale update is caught") {
  const auto inst = io::gen_instance(hopart::testing::small_config(2, 80, 4));
  const auto start = assign::dfs_assign(inst.hypergraph, inst.topology, assign::SearchBudget{});
  REQUIRE(start.has_solution());
  CHECK_FALSE(incremental_vs_full_check(inst.hypergraph, inst.topology, start.placement, 50, 2, 10));
}

TEST_CASE("refinement never increases hop distance and stays valid") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto inst = io::gen_instance(hopart::testing::small_config(seed, 200, 4));
    const auto start = assign::dfs_assign(inst.hypergraph, inst.topology, assign::SearchBudget{});
    REQUIRE(start.has_solution());
    Weight last = start.total_hop_distance;
    const auto result = refine_level(inst.hypergraph, inst.topology, start.placement, RefineConfig{},
                                     [&](const Op&, const Refiner& r) {
                                       CHECK(r.total_hop_distance() <= last);
                                       last = r.total_hop_distance();
                                       CHECK(validate(inst.hypergraph, inst.topology, r.placement()).empty());
                                     });
    CHECK(result.stats.final_hop_distance ==
          total_hop_distance(inst.hypergraph, result.placement, inst.topology.hops()));
    // Refining a local optimum again changes nothing.
    const auto again = refine_level(inst.hypergraph, inst.topology, result.placement);
    CHECK(again.stats.applied_total() == 0);
    CHECK(again.placement == result.placement);
  }
}

TEST_CASE("full recompute mode reaches the same placement") {
  const auto inst = io::gen_instance(hopart::testing::small_config(7, 150, 4));
  const auto start = assign::dfs_assign(inst.hypergraph, inst.topology, assign::SearchBudget{});
  REQUIRE(start.has_solution());
  RefineConfig full;
  full.full_recompute = true;
  const auto a = refine_level(inst.hypergraph, inst.topology, start.placement);
  const auto b = refine_level(inst.hypergraph, inst.topology, start.placement, full);
  CHECK(a.placement == b.placement);
}

TEST_CASE("projection preserves hop distance") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto inst = io::gen_instance(hopart::testing::small_config(seed, 1500, 4));
    coarsen::CoarseningConfig cfg;
    cfg.seed = seed;
    const auto level = coarsen::coarsen_level(inst.hypergraph, inst.topology, cfg, 0, 0.5);
    Rng rng(seed);
    std::vector<FpgaId> orig(level.graph.num_vertices());
    std::vector<std::vector<FpgaId>> reps(orig.size());
    for (std::size_t i = 0; i < orig.size(); ++i) {
      orig[i] = static_cast<FpgaId>(rng.below(4));
      if (rng.below(10) == 0) reps[i].push_back(static_cast<FpgaId>((orig[i] + 1) % 4));
    }
    const Placement coarse(orig, reps);
    const auto fine = project_to_finer(level, coarse);
    const auto& hm = inst.topology.hops();
    CHECK(total_hop_distance(inst.hypergraph, fine, hm) == total_hop_distance(level.graph, coarse, hm));
  }
}
