#include "hopart/pipeline.hpp"

#include "hopart/metrics.hpp"
#include "hopart/rng.hpp"

namespace hopart {

std::vector<std::uint64_t> assign_seeds(std::uint64_t seed, std::size_t count) {
  const std::uint64_t base = derive_seed(seed, static_cast<std::uint64_t>(SeedStream::assign));
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < count; ++i) seeds.push_back(derive_seed(base, i));
  return seeds;
}

PartitionResult partition(const Hypergraph& h, const MfsTopology& t, const PartitionConfig& config,
                          const LevelObserver& observer) {
  const auto start = std::chrono::steady_clock::now();
  auto out_of_time = [&] {
    return config.time_limit.count() > 0 && std::chrono::steady_clock::now() - start >= config.time_limit;
  };

  coarsen::CoarseningConfig coarsening = config.coarsening;
  coarsening.seed = derive_seed(config.seed, static_cast<std::uint64_t>(SeedStream::coarsen));
  const auto levels = coarsen::build_hierarchy(h, t, coarsening);

  PartitionResult result;
  result.num_levels = levels.size();
  const Hypergraph& coarsest = levels.empty() ? h : levels.back().graph;
  result.coarsest_vertices = coarsest.num_vertices();

  const auto assigned =
      assign::parallel_assign(coarsest, t, config.budget, assign_seeds(config.seed, config.num_seeds), config.jitter);
  result.assign_status = assigned.status;
  if (!assigned.has_solution()) {
    result.status = assigned.status == assign::AssignStatus::budget_exhausted_no_solution
                        ? PartitionStatus::budget_exhausted_no_solution
                        : PartitionStatus::no_solution;
    return result;
  }
  result.assigned_hop_distance = assigned.total_hop_distance;

  auto refine_on = [&](const Hypergraph& g, Placement p) {
    if (out_of_time()) return p;
    refine::Observer level_observer;
    if (observer) level_observer = [&](const refine::Op& op, const refine::Refiner& r) { observer(g, op, r); };
    auto refined = refine::refine_level(g, t, std::move(p), config.refinement, level_observer);
    result.refine_stats.push_back(refined.stats);
    return std::move(refined.placement);
  };

  Placement p = refine_on(coarsest, assigned.placement);
  for (std::size_t i = levels.size(); i-- > 0;) {
    const Hypergraph& finer = i == 0 ? h : levels[i - 1].graph;
    p = refine_on(finer, refine::project_to_finer(levels[i], p));
  }
  result.total_hop_distance = total_hop_distance(h, p, t.hops());
  result.placement = std::move(p);
  result.status = PartitionStatus::ok;
  return result;
}

}  // namespace hopart
