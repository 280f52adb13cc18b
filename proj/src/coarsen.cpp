#include "hopart/coarsen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hopart/rng.hpp"

namespace hopart::coarsen {

std::size_t default_n_final(std::size_t num_fpgas) { return std::max<std::size_t>(128, 16 * num_fpgas); }

std::size_t resolve_n_final(const CoarseningConfig& config, std::size_t num_fpgas) {
  return config.n_final.value_or(default_n_final(num_fpgas));
}

double heavy_edge_score(const Hypergraph& h, VertexId u, VertexId v) {
  const auto iu = h.incident_edges(u);
  const auto iv = h.incident_edges(v);
  double score = 0.0;
  std::size_t a = 0, b = 0;
  while (a < iu.size() && b < iv.size()) {
    if (iu[a] < iv[b]) {
      ++a;
    } else if (iv[b] < iu[a]) {
      ++b;
    } else {
      const auto& e = h.edge(iu[a]);
      score += static_cast<double>(e.weight) / static_cast<double>(e.size() - 1);
      ++a;
      ++b;
    }
  }
  return score;
}

double heavy_node_penalty(const ResourceVector& u, const ResourceVector& v, double alpha,
                          const std::vector<double>& mean_capacity) {
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double product = static_cast<double>(u[i]) * static_cast<double>(v[i]);
    if (product == 0.0) continue;
    if (mean_capacity[i] <= 0.0) {
      throw std::invalid_argument("zero mean capacity for used resource type " + std::to_string(i));
    }
    sum += product / (mean_capacity[i] * mean_capacity[i]);
  }
  return sum == 0.0 ? 0.0 : std::pow(sum, alpha);
}

double alpha_at_level(const CoarseningConfig& config, std::size_t n_init, std::size_t n_final, int level) {
  if (n_init + 1 <= n_final) {
    throw std::domain_error("degenerate instance: n_init + 1 <= n_final");
  }
  const double span = std::log(static_cast<double>(n_init + 1) / static_cast<double>(n_final));
  const double alpha = config.alpha0 + config.delta_alpha * std::log(2.0) / span * level;
  return std::clamp(alpha, config.alpha0, config.alpha0 + config.delta_alpha);
}

double rating(const Hypergraph& h, VertexId u, VertexId v, double alpha,
              const std::vector<double>& mean_capacity) {
  const double r = heavy_edge_score(h, u, v);
  const double p = heavy_node_penalty(h.vertex_weight(u), h.vertex_weight(v), alpha, mean_capacity);
  return p == 0.0 ? std::numeric_limits<double>::infinity() : r / p;
}

namespace {

// Zero-penalty candidates outrank every finite rating and compare by r.
struct Candidate {
  bool free = false;
  double value = -1.0;
  VertexId vertex = -1;

  bool better_than(const Candidate& other) const {
    if (other.vertex < 0) return true;
    if (free != other.free) return free;
    if (value != other.value) return value > other.value;
    return vertex < other.vertex;
  }
};

}  // namespace

Hypergraph contract(const Hypergraph& h, const std::vector<VertexId>& fine_to_coarse,
                    std::size_t num_coarse) {
  std::vector<ResourceVector> weights(num_coarse, ResourceVector(h.num_types()));
  for (VertexId v = 0; v < static_cast<VertexId>(h.num_vertices()); ++v) {
    weights[fine_to_coarse[v]] += h.vertex_weight(v);
  }

  struct CoarseNet {
    VertexId source;
    std::vector<VertexId> drains;
    Weight weight;
  };
  std::vector<CoarseNet> nets;
  nets.reserve(h.num_edges());
  for (const auto& e : h.edges()) {
    CoarseNet net{fine_to_coarse[e.source], {}, e.weight};
    net.drains.reserve(e.drains.size());
    for (VertexId d : e.drains) {
      const VertexId c = fine_to_coarse[d];
      if (c != net.source) net.drains.push_back(c);
    }
    if (net.drains.empty()) continue;
    std::sort(net.drains.begin(), net.drains.end());
    net.drains.erase(std::unique(net.drains.begin(), net.drains.end()), net.drains.end());
    nets.push_back(std::move(net));
  }
  std::vector<std::size_t> order(nets.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (nets[a].source != nets[b].source) return nets[a].source < nets[b].source;
    if (nets[a].drains != nets[b].drains) return nets[a].drains < nets[b].drains;
    return a < b;
  });

  HypergraphBuilder builder(h.num_types());
  for (auto& w : weights) builder.add_vertex(std::move(w));
  for (std::size_t i = 0; i < order.size();) {
    const auto& first = nets[order[i]];
    Weight weight = 0;
    std::size_t j = i;
    for (; j < order.size() && nets[order[j]].source == first.source &&
           nets[order[j]].drains == first.drains;
         ++j) {
      weight += nets[order[j]].weight;
    }
    builder.add_edge(weight, first.source, first.drains);
    i = j;
  }
  return std::move(builder).build();
}

Level coarsen_level(const Hypergraph& h, const MfsTopology& t, const CoarseningConfig& config,
                    int level, double alpha) {
  const auto n = static_cast<VertexId>(h.num_vertices());
  const auto mean_cap = mean_capacity(t);
  const auto max_cap = t.max_capacity();

  std::vector<VertexId> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(level)));
  rng.shuffle(order.begin(), order.end());

  std::vector<VertexId> partner(n, -1);
  std::vector<double> score(n, 0.0);
  std::vector<VertexId> touched;
  for (VertexId u : order) {
    if (partner[u] >= 0) continue;
    touched.clear();
    for (EdgeId eid : h.incidence(u)) {
      const auto& e = h.edge(eid);
      if (e.size() > config.max_rated_net_size) continue;
      const double contribution = static_cast<double>(e.weight) / static_cast<double>(e.size() - 1);
      auto visit = [&](VertexId v) {
        if (v == u || partner[v] >= 0) return;
        if (score[v] == 0.0) touched.push_back(v);
        score[v] += contribution;
      };
      visit(e.source);
      for (VertexId d : e.drains) visit(d);
    }
    Candidate best;
    for (VertexId v : touched) {
      const double r = score[v];
      score[v] = 0.0;
      if (!(h.vertex_weight(u) + h.vertex_weight(v)).fits_within(max_cap)) continue;
      const double p = heavy_node_penalty(h.vertex_weight(u), h.vertex_weight(v), alpha, mean_cap);
      const Candidate c = p == 0.0 ? Candidate{true, r, v} : Candidate{false, r / p, v};
      if (c.better_than(best)) best = c;
    }
    if (best.vertex >= 0) {
      partner[u] = best.vertex;
      partner[best.vertex] = u;
    }
  }

  Level result;
  result.index = level;
  result.fine_to_coarse.assign(n, -1);
  VertexId next = 0;
  for (VertexId v = 0; v < n; ++v) {
    if (result.fine_to_coarse[v] >= 0) continue;
    result.fine_to_coarse[v] = next;
    if (partner[v] >= 0) result.fine_to_coarse[partner[v]] = next;
    ++next;
  }
  result.graph = contract(h, result.fine_to_coarse, static_cast<std::size_t>(next));
  return result;
}

std::vector<Level> build_hierarchy(const Hypergraph& h, const MfsTopology& t,
                                   const CoarseningConfig& config) {
  std::vector<Level> levels;
  const std::size_t n_init = h.num_vertices();
  const std::size_t n_final = resolve_n_final(config, t.num_fpgas());
  if (n_init <= n_final) return levels;

  const auto mean_cap = mean_capacity(t);
  const auto total = h.total_weight();
  for (std::size_t i = 0; i < total.size(); ++i) {
    if (total[i] > 0 && mean_cap[i] <= 0.0) {
      throw std::invalid_argument("zero mean capacity for used resource type " + std::to_string(i));
    }
  }

  const Hypergraph* current = &h;
  for (int level = 0; current->num_vertices() > n_final; ++level) {
    const double alpha = alpha_at_level(config, n_init, n_final, level);
    Level next = coarsen_level(*current, t, config, level, alpha);
    const std::size_t before = current->num_vertices();
    const std::size_t after = next.graph.num_vertices();
    if (after == before) break;
    levels.push_back(std::move(next));
    current = &levels.back().graph;
    if (static_cast<double>(after) > config.min_reduction * static_cast<double>(before)) break;
  }
  return levels;
}

}  // namespace hopart::coarsen
