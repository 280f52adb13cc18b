#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "hopart/rng.hpp"
#include "hopart/topology.hpp"

using namespace hopart;
using hopart::testing::path_topology;
using hopart::testing::ring_topology;
using hopart::testing::uniform_fpgas;

namespace {

HopMatrix floyd_warshall(std::size_t k, const std::vector<std::pair<FpgaId, FpgaId>>& links) {
  const int inf = 1 << 20;
  HopMatrix d(k, inf);
  for (std::size_t i = 0; i < k; ++i) d.at(i, i) = 0;
  for (auto [a, b] : links) {
    d.at(a, b) = 1;
    d.at(b, a) = 1;
  }
  for (std::size_t m = 0; m < k; ++m)
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) d.at(i, j) = std::min(d(i, j), d(i, m) + d(m, j));
  return d;
}

}  // namespace

TEST_CASE("path and ring hops") {
  const auto path = path_topology(3, ResourceVector{1});
  CHECK(path.hops()(0, 2) == 2);
  CHECK(path.hops()(1, 1) == 0);
  const auto ring = ring_topology(4, ResourceVector{1});
  CHECK(ring.hops()(0, 2) == 2);
  CHECK(ring.hops()(0, 3) == 1);
}

TEST_CASE("disconnected topology names the pair") {
  CHECK_THROWS_WITH_AS(MfsTopology(uniform_fpgas(2, ResourceVector{1}), {}),
                       doctest::Contains("unreachable pair (0,1)"), TopologyError);
}

TEST_CASE("link validation") {
  CHECK_THROWS_AS(MfsTopology(uniform_fpgas(2, ResourceVector{1}), {{1, 1}}), TopologyError);
  CHECK_THROWS_AS(MfsTopology(uniform_fpgas(2, ResourceVector{1}), {{0, 1}, {1, 0}}), TopologyError);
  CHECK_THROWS_AS(MfsTopology(uniform_fpgas(2, ResourceVector{1}), {{0, 2}}), TopologyError);
}

TEST_CASE("mean capacity") {
  MfsTopology two({{ResourceVector{10}}, {ResourceVector{30}}}, {{0, 1}});
  CHECK(mean_capacity(two) == std::vector<double>{20.0});
  MfsTopology three({{ResourceVector{2, 4}}, {ResourceVector{4, 8}}, {ResourceVector{6, 12}}}, {{0, 1}, {1, 2}});
  CHECK(mean_capacity(three) == std::vector<double>{4.0, 8.0});
  CHECK(mean_capacity(ring_topology(5, ResourceVector{7})) == std::vector<double>{7.0});
}

TEST_CASE("hop sums") {
  const auto path = path_topology(3, ResourceVector{1});
  CHECK(hop_sum(path, path.hops(), 1) == 2);
  CHECK(hop_sum(path, path.hops(), 0) == 3);
  const MfsTopology single(uniform_fpgas(1, ResourceVector{1}), {});
  CHECK(hop_sum(single, single.hops(), 0) == 0);
  const auto limited = path_topology(3, ResourceVector{1}, 1);
  CHECK(hop_sum(limited, limited.hops(), 0) == 3);
}

TEST_CASE("hop sum is equivariant under relabeling") {
  // Path 0-1-2-3 relabeled by the permutation (2 0 3 1).
  const std::vector<FpgaId> perm{2, 0, 3, 1};
  const auto a = path_topology(4, ResourceVector{1});
  std::vector<std::pair<FpgaId, FpgaId>> links;
  for (auto [x, y] : a.links()) links.emplace_back(perm[x], perm[y]);
  const MfsTopology b(uniform_fpgas(4, ResourceVector{1}), links);
  for (FpgaId f = 0; f < 4; ++f) CHECK(hop_sum(a, a.hops(), f) == hop_sum(b, b.hops(), perm[f]));
}

TEST_CASE("BFS hops match Floyd-Warshall on random graphs") {
  Rng rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t k = 2 + rng.below(20);
    std::vector<std::pair<FpgaId, FpgaId>> links;
    for (std::size_t i = 1; i < k; ++i) links.emplace_back(static_cast<FpgaId>(rng.below(i)), static_cast<FpgaId>(i));
    const MfsTopology t(uniform_fpgas(k, ResourceVector{1}), links);
    CHECK(t.hops() == floyd_warshall(k, links));
  }
}

TEST_CASE("imbalance capacities") {
  const auto t = path_topology(4, ResourceVector{100, 100});
  const auto limited = t.with_imbalance_capacities(ResourceVector{10, 3}, 0.2);
  // ceil(10/4) = 3 -> floor(3.6) = 3; ceil(3/4) = 1 -> floor(1.2) = 1.
  CHECK(limited.capacity(0) == ResourceVector{3, 1});
  CHECK(limited.hops() == t.hops());
}
