#include "hopart/refine.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

#include "hopart/metrics.hpp"

namespace hopart::refine {

std::string_view to_string(OpKind kind) {
  switch (kind) {
    case OpKind::move: return "mv";
    case OpKind::exchange: return "ex";
    case OpKind::replicate: return "rep";
    case OpKind::remove: return "del";
  }
  return "?";
}

bool OpSet::enabled(OpKind kind) const {
  switch (kind) {
    case OpKind::move: return move;
    case OpKind::exchange: return exchange;
    case OpKind::replicate: return replicate;
    case OpKind::remove: return remove;
  }
  return false;
}

OpSet OpSet::parse(std::string_view text) {
  OpSet set = none();
  if (text == "none") return set;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    if (item == "mv") {
      set.move = true;
    } else if (item == "ex") {
      set.exchange = true;
    } else if (item == "rep") {
      set.replicate = true;
    } else if (item == "del") {
      set.remove = true;
    } else if (!item.empty()) {
      throw std::invalid_argument("unknown operation '" + std::string(item) + "' (expected mv, ex, rep, del)");
    }
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return set;
}

std::string OpSet::to_string() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(move, "mv");
  add(exchange, "ex");
  add(replicate, "rep");
  add(remove, "del");
  return out.empty() ? "none" : out;
}

void apply_to_placement(Placement& p, const Op& op) {
  switch (op.kind) {
    case OpKind::move:
      p.set_original(op.vertex, op.destination);
      break;
    case OpKind::exchange: {
      const FpgaId a = p.original(op.vertex);
      const FpgaId b = p.original(op.partner);
      p.set_original(op.vertex, b);
      p.set_original(op.partner, a);
      break;
    }
    case OpKind::replicate:
      p.add_replica(op.vertex, op.destination);
      break;
    case OpKind::remove:
      p.remove_replica(op.vertex, op.destination);
      break;
  }
}

namespace {

// Nets touched by `op`, ascending and unique.
std::vector<EdgeId> touched_nets(const Hypergraph& h, const Op& op) {
  std::vector<EdgeId> nets(h.incidence(op.vertex).begin(), h.incidence(op.vertex).end());
  if (op.kind == OpKind::exchange) {
    nets.insert(nets.end(), h.incidence(op.partner).begin(), h.incidence(op.partner).end());
    std::sort(nets.begin(), nets.end());
    nets.erase(std::unique(nets.begin(), nets.end()), nets.end());
  }
  return nets;
}

// THD decrease of `op` from per-net metric evaluations before and after.
Weight local_gain(const Hypergraph& h, const Placement& p, const HopMatrix& hm, const Op& op) {
  const auto nets = touched_nets(h, op);
  Weight before = 0;
  for (EdgeId e : nets) before += h.edge(e).weight * net_hop_distance(h, e, p, hm);
  Placement after = p;
  apply_to_placement(after, op);
  Weight cost = 0;
  for (EdgeId e : nets) cost += h.edge(e).weight * net_hop_distance(h, e, after, hm);
  return before - cost;
}

constexpr int kPriority[4] = {2, 1, 0, 3};  // move, exchange, replicate, remove

// Max-heap of (gain, vertex) with one slot per vertex; ties favour lower ids.
class IndexedHeap {
 public:
  struct Item {
    Weight gain;
    VertexId vertex;
  };

  explicit IndexedHeap(std::size_t n) : pos_(n, -1) {}

  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }
  const Item& top() const { return items_.front(); }
  const std::vector<Item>& items() const { return items_; }
  bool contains(VertexId v) const { return pos_[v] >= 0; }

  void upsert(VertexId v, Weight gain) {
    if (pos_[v] < 0) {
      pos_[v] = static_cast<int>(items_.size());
      items_.push_back({gain, v});
      sift_up(items_.size() - 1);
      return;
    }
    const auto i = static_cast<std::size_t>(pos_[v]);
    const Weight old = items_[i].gain;
    items_[i].gain = gain;
    if (gain > old) {
      sift_up(i);
    } else if (gain < old) {
      sift_down(i);
    }
  }

  void remove(VertexId v) {
    if (pos_[v] < 0) return;
    const auto i = static_cast<std::size_t>(pos_[v]);
    pos_[v] = -1;
    if (i + 1 == items_.size()) {
      items_.pop_back();
      return;
    }
    items_[i] = items_.back();
    items_.pop_back();
    const VertexId moved = items_[i].vertex;
    pos_[moved] = static_cast<int>(i);
    sift_up(i);
    sift_down(static_cast<std::size_t>(pos_[moved]));
  }

 private:
  static bool higher(const Item& a, const Item& b) {
    return a.gain > b.gain || (a.gain == b.gain && a.vertex < b.vertex);
  }

  void place(std::size_t i, const Item& item) {
    items_[i] = item;
    pos_[item.vertex] = static_cast<int>(i);
  }

  void sift_up(std::size_t i) {
    const Item item = items_[i];
    while (i > 0) {
      const std::size_t parent = (i - 1) / 2;
      if (!higher(item, items_[parent])) break;
      place(i, items_[parent]);
      i = parent;
    }
    place(i, item);
  }

  void sift_down(std::size_t i) {
    const Item item = items_[i];
    const std::size_t n = items_.size();
    while (true) {
      std::size_t child = 2 * i + 1;
      if (child >= n) break;
      if (child + 1 < n && higher(items_[child + 1], items_[child])) ++child;
      if (!higher(items_[child], item)) break;
      place(i, items_[child]);
      i = child;
    }
    place(i, item);
  }

  std::vector<Item> items_;
  std::vector<int> pos_;
};

using NetCounts = std::vector<std::pair<FpgaId, int>>;

void add_count(NetCounts& counts, FpgaId f, int delta) {
  auto it = std::lower_bound(counts.begin(), counts.end(), f,
                             [](const auto& entry, FpgaId key) { return entry.first < key; });
  if (it != counts.end() && it->first == f) {
    it->second += delta;
    if (it->second == 0) counts.erase(it);
  } else {
    assert(delta > 0);
    counts.insert(it, {f, delta});
  }
}

}  // namespace

Weight gain_move(const Hypergraph& h, const Placement& p, const HopMatrix& hm, VertexId v, FpgaId f) {
  return local_gain(h, p, hm, {OpKind::move, v, f});
}

Weight gain_exchange(const Hypergraph& h, const Placement& p, const HopMatrix& hm, VertexId u, VertexId v) {
  return local_gain(h, p, hm, {OpKind::exchange, u, p.original(v), v});
}

Weight gain_replicate(const Hypergraph& h, const Placement& p, const HopMatrix& hm, VertexId v, FpgaId f) {
  return local_gain(h, p, hm, {OpKind::replicate, v, f});
}

Weight gain_delete(const Hypergraph& h, const Placement& p, const HopMatrix& hm, VertexId v, FpgaId f) {
  return local_gain(h, p, hm, {OpKind::remove, v, f});
}

struct Refiner::Impl {
  struct HostChange {
    VertexId vertex = -1;
    std::vector<FpgaId> before;
    std::vector<FpgaId> after;
  };

  enum class Block { none, resource, io, hop };

  struct Evaluation {
    Weight gain = 0;
    Block block = Block::none;
    FpgaId blocking_fpga = -1;
  };

  struct Parked {
    OpKind kind;
    VertexId vertex;
    FpgaId destination;
  };

  const Hypergraph& h;
  const MfsTopology& t;
  const HopMatrix& hm;
  RefineConfig config;
  Placement placement;
  Weight thd = 0;
  std::vector<ResourceVector> usage;
  std::vector<Weight> io;
  std::size_t k;

  std::vector<NetCounts> net_counts;  // drain copies per FPGA
  std::vector<long> net_cost;         // unweighted hop distance

  IndexedHeap exchange_heap;
  std::vector<IndexedHeap> move_heaps;
  std::vector<IndexedHeap> replicate_heaps;
  std::vector<IndexedHeap> remove_heaps;
  std::vector<VertexId> exchange_partner;
  std::vector<std::vector<VertexId>> partner_refs;
  std::vector<std::vector<Parked>> parked;  // per blocking FPGA
  // Move gain of every vertex to every FPGA not hosting it (0 otherwise).
  // Exchange gains are assembled from these plus a shared-net correction.
  std::vector<Weight> move_cache;
  std::vector<Weight> exchange_corr;
  std::vector<VertexId> candidates;

  // Scratch state reused across evaluations.
  mutable HostChange changes[2];
  mutable HostChange pair[2];
  mutable std::vector<std::pair<FpgaId, int>> delta_scratch;
  mutable std::vector<FpgaId> source_hosts;
  mutable NetCounts counts_scratch;
  mutable std::vector<std::uint32_t> net_stamp;
  mutable std::uint32_t stamp = 0;
  mutable std::vector<Weight> io_delta;
  mutable std::vector<FpgaId> io_touched;
  std::vector<std::uint32_t> vertex_stamp;
  std::uint32_t vstamp = 0;

  std::size_t replicas_applied = 0;
  std::size_t zero_gain_applied = 0;

  Impl(const Hypergraph& graph, const MfsTopology& topo, Placement start, RefineConfig cfg)
      : h(graph),
        t(topo),
        hm(topo.hops()),
        config(cfg),
        placement(std::move(start)),
        k(topo.num_fpgas()),
        exchange_heap(graph.num_vertices()),
        exchange_partner(graph.num_vertices(), -1),
        partner_refs(graph.num_vertices()),
        parked(topo.num_fpgas()),
        move_cache(graph.num_vertices() * topo.num_fpgas(), 0),
        exchange_corr(graph.num_vertices(), 0),
        net_stamp(graph.num_edges(), 0),
        io_delta(topo.num_fpgas(), 0),
        vertex_stamp(graph.num_vertices(), 0) {
    if (placement.num_vertices() != h.num_vertices()) {
      throw std::invalid_argument("placement does not cover the hypergraph");
    }
    for (std::size_t f = 0; f < k; ++f) {
      move_heaps.emplace_back(h.num_vertices());
      replicate_heaps.emplace_back(h.num_vertices());
      remove_heaps.emplace_back(h.num_vertices());
    }
    usage = resource_usages(h, placement, k);
    io.assign(k, 0);
    net_counts.resize(h.num_edges());
    net_cost.resize(h.num_edges());
    for (EdgeId e = 0; e < static_cast<EdgeId>(h.num_edges()); ++e) {
      auto& counts = net_counts[e];
      for (VertexId d : h.edge(e).drains) {
        add_count(counts, placement.original(d), 1);
        for (FpgaId r : placement.replicas(d)) add_count(counts, r, 1);
      }
      gather_hosts(h.edge(e).source, source_hosts);
      net_cost[e] = cost_of(source_hosts, counts);
      thd += h.edge(e).weight * net_cost[e];
      add_io(source_hosts, counts, h.edge(e).weight, io);
    }
    refresh_all();
  }

  void gather_hosts(VertexId v, std::vector<FpgaId>& out) const {
    out.clear();
    out.push_back(placement.original(v));
    out.insert(out.end(), placement.replicas(v).begin(), placement.replicas(v).end());
  }

  int nearest_hops(const std::vector<FpgaId>& sources, FpgaId target) const {
    int best = hm(sources[0], target);
    for (std::size_t i = 1; i < sources.size(); ++i) best = std::min(best, hm(sources[i], target));
    return best;
  }

  FpgaId nearest_host(const std::vector<FpgaId>& sources, FpgaId target) const {
    FpgaId best = sources[0];
    int best_hops = hm(best, target);
    for (std::size_t i = 1; i < sources.size(); ++i) {
      const int hops = hm(sources[i], target);
      if (hops < best_hops || (hops == best_hops && sources[i] < best)) {
        best = sources[i];
        best_hops = hops;
      }
    }
    return best;
  }

  long cost_of(const std::vector<FpgaId>& sources, const NetCounts& counts) const {
    long cost = 0;
    for (const auto& [g, c] : counts) cost += nearest_hops(sources, g);
    return cost;
  }

  // Adds (sign > 0) the I/O contribution of one net to `target`.
  template <typename Sink>
  void for_each_io(const std::vector<FpgaId>& sources, const NetCounts& counts, Sink&& sink) const {
    FpgaId exporters[64];
    std::size_t num_exporters = 0;
    std::vector<FpgaId> overflow;
    for (const auto& [g, c] : counts) {
      if (std::find(sources.begin(), sources.end(), g) != sources.end()) continue;
      sink(g);
      const FpgaId s = nearest_host(sources, g);
      if (std::find(exporters, exporters + num_exporters, s) != exporters + num_exporters) continue;
      if (std::find(overflow.begin(), overflow.end(), s) != overflow.end()) continue;
      if (num_exporters < 64) {
        exporters[num_exporters++] = s;
      } else {
        overflow.push_back(s);
      }
      sink(s);
    }
  }

  void add_io(const std::vector<FpgaId>& sources, const NetCounts& counts, Weight w,
              std::vector<Weight>& target) const {
    for_each_io(sources, counts, [&](FpgaId f) { target[f] += w; });
  }

  // Fills `changes` for op; returns the number of changed vertices.
  int describe(const Op& op) const {
    auto fill = [&](HostChange& c, VertexId v) {
      c.vertex = v;
      gather_hosts(v, c.before);
      c.after = c.before;
    };
    switch (op.kind) {
      case OpKind::move:
        fill(changes[0], op.vertex);
        changes[0].after[0] = op.destination;
        return 1;
      case OpKind::exchange:
        fill(changes[0], op.vertex);
        fill(changes[1], op.partner);
        changes[0].after[0] = placement.original(op.partner);
        changes[1].after[0] = placement.original(op.vertex);
        return 2;
      case OpKind::replicate:
        fill(changes[0], op.vertex);
        changes[0].after.push_back(op.destination);
        return 1;
      case OpKind::remove:
        fill(changes[0], op.vertex);
        changes[0].after.erase(std::find(changes[0].after.begin() + 1, changes[0].after.end(), op.destination));
        return 1;
    }
    return 0;
  }

  // Post-op source hosts and drain counts of net e; returns the new cost.
  long net_after(EdgeId e, const HostChange* change, int num_changes, std::vector<FpgaId>& sources,
                 NetCounts& counts) const {
    const auto& edge = h.edge(e);
    const HostChange* source_change = nullptr;
    counts = net_counts[e];
    for (int i = 0; i < num_changes; ++i) {
      const HostChange& c = change[i];
      if (c.vertex == edge.source) {
        source_change = &c;
      } else if (std::binary_search(edge.drains.begin(), edge.drains.end(), c.vertex)) {
        for (FpgaId f : c.before) add_count(counts, f, -1);
        for (FpgaId f : c.after) add_count(counts, f, +1);
      }
    }
    if (source_change) {
      sources = source_change->after;
    } else {
      gather_hosts(edge.source, sources);
    }
    return cost_of(sources, counts);
  }

  int hops_from_source(VertexId source, FpgaId target) const {
    int best = hm(placement.original(source), target);
    for (FpgaId r : placement.replicas(source)) best = std::min(best, hm(r, target));
    return best;
  }

  int count_on(EdgeId e, FpgaId g) const {
    const auto& counts = net_counts[e];
    auto it = std::lower_bound(counts.begin(), counts.end(), g,
                               [](const auto& entry, FpgaId key) { return entry.first < key; });
    return it != counts.end() && it->first == g ? it->second : 0;
  }

  // Cost of net e after the changes, without materialising the new counts.
  long cost_after(EdgeId e, const HostChange* change, int num_changes) const {
    const auto& edge = h.edge(e);
    const auto& counts = net_counts[e];
    const HostChange* source_change = nullptr;
    auto& delta = delta_scratch;
    delta.clear();
    auto bump = [&](FpgaId f, int d) {
      for (auto& entry : delta) {
        if (entry.first == f) {
          entry.second += d;
          return;
        }
      }
      delta.emplace_back(f, d);
    };
    for (int i = 0; i < num_changes; ++i) {
      const HostChange& c = change[i];
      if (c.vertex == edge.source) {
        source_change = &c;
      } else if (std::binary_search(edge.drains.begin(), edge.drains.end(), c.vertex)) {
        for (FpgaId f : c.before) bump(f, -1);
        for (FpgaId f : c.after) bump(f, +1);
      }
    }
    auto count_of = [&](FpgaId g) { return count_on(e, g); };
    if (!source_change) {
      long cost = net_cost[e];
      for (const auto& [g, d] : delta) {
        if (d == 0) continue;
        const int c = count_of(g);
        if ((c > 0) != (c + d > 0)) cost += (c + d > 0 ? 1 : -1) * hops_from_source(edge.source, g);
      }
      return cost;
    }
    const auto& sources = source_change->after;
    long cost = 0;
    for (const auto& [g, c] : counts) {
      int d = 0;
      for (const auto& entry : delta) {
        if (entry.first == g) d = entry.second;
      }
      if (c + d > 0) cost += nearest_hops(sources, g);
    }
    for (const auto& [g, d] : delta) {
      if (d > 0 && count_of(g) == 0) cost += nearest_hops(sources, g);
    }
    return cost;
  }

  template <typename Fn>
  void for_each_touched_net(int num_changes, Fn&& fn) const {
    ++stamp;
    for (int i = 0; i < num_changes; ++i) {
      for (EdgeId e : h.incidence(changes[i].vertex)) {
        if (net_stamp[e] == stamp) continue;
        net_stamp[e] = stamp;
        fn(e);
      }
    }
  }

  Weight gain(const Op& op) const {
    const int n = describe(op);
    Weight gain = 0;
    for_each_touched_net(n, [&](EdgeId e) {
      const long after = cost_after(e, changes, n);
      gain += h.edge(e).weight * (net_cost[e] - after);
    });
    return gain;
  }

  Evaluation evaluate(const Op& op) const {
    Evaluation result;
    // Resources first: they only depend on the op itself.
    auto over = [&](FpgaId f, const ResourceVector& add, const ResourceVector* sub) {
      ResourceVector next = usage[f] + add;
      if (sub) next -= *sub;
      return !next.fits_within(t.capacity(f));
    };
    const auto& wv = h.vertex_weight(op.vertex);
    switch (op.kind) {
      case OpKind::move:
      case OpKind::replicate:
        if (over(op.destination, wv, nullptr)) result = {0, Block::resource, op.destination};
        break;
      case OpKind::exchange: {
        const auto& wp = h.vertex_weight(op.partner);
        const FpgaId a = placement.original(op.vertex);
        const FpgaId b = placement.original(op.partner);
        if (over(b, wv, &wp)) {
          result = {0, Block::resource, b};
        } else if (over(a, wp, &wv)) {
          result = {0, Block::resource, a};
        }
        break;
      }
      case OpKind::remove:
        break;
    }

    const int n = describe(op);
    std::vector<FpgaId> sources;
    std::vector<FpgaId> old_sources;
    bool hop_ok = true;
    io_touched.clear();
    auto touch = [&](FpgaId f, Weight delta) {
      if (io_delta[f] == 0) io_touched.push_back(f);
      io_delta[f] += delta;
    };
    for_each_touched_net(n, [&](EdgeId e) {
      const Weight w = h.edge(e).weight;
      const long after = net_after(e, changes, n, sources, counts_scratch);
      result.gain += w * (net_cost[e] - after);
      if (t.hop_max()) {
        for (const auto& [g, c] : counts_scratch) {
          if (!t.hop_allowed(nearest_hops(sources, g))) hop_ok = false;
        }
      }
      gather_hosts(h.edge(e).source, old_sources);
      for_each_io(old_sources, net_counts[e], [&](FpgaId f) { touch(f, -w); });
      for_each_io(sources, counts_scratch, [&](FpgaId f) { touch(f, +w); });
    });
    if (result.block == Block::none && !hop_ok) result.block = Block::hop;
    for (FpgaId f : io_touched) {
      if (result.block == Block::none && io_delta[f] > 0 && io[f] + io_delta[f] > t.io_limit(f)) {
        result.block = Block::io;
        result.blocking_fpga = f;
      }
      io_delta[f] = 0;
    }
    return result;
  }

  bool is_legal(const Op& op) const {
    const auto n = static_cast<VertexId>(h.num_vertices());
    const auto kk = static_cast<FpgaId>(k);
    if (op.vertex < 0 || op.vertex >= n) return false;
    switch (op.kind) {
      case OpKind::move:
        return op.destination >= 0 && op.destination < kk && !placement.hosted_on(op.vertex, op.destination);
      case OpKind::replicate:
        return op.destination >= 0 && op.destination < kk && !placement.hosted_on(op.vertex, op.destination);
      case OpKind::remove: {
        const auto& r = placement.replicas(op.vertex);
        return std::binary_search(r.begin(), r.end(), op.destination);
      }
      case OpKind::exchange: {
        if (op.partner < 0 || op.partner >= n || op.partner == op.vertex) return false;
        const FpgaId a = placement.original(op.vertex);
        const FpgaId b = placement.original(op.partner);
        return a != b && !placement.hosted_on(op.vertex, b) && !placement.hosted_on(op.partner, a);
      }
    }
    return false;
  }

  bool is_boundary(VertexId v) const {
    if (!placement.replicas(v).empty()) return true;
    const FpgaId home = placement.original(v);
    for (EdgeId e : h.incidence(v)) {
      const VertexId src = h.edge(e).source;
      if (!placement.replicas(src).empty() || placement.original(src) != home) return true;
      for (const auto& [g, c] : net_counts[e]) {
        if (g != home) return true;
      }
    }
    return false;
  }

  void update_move_cache(VertexId v) {
    Weight* row = &move_cache[static_cast<std::size_t>(v) * k];
    for (FpgaId f = 0; f < static_cast<FpgaId>(k); ++f) {
      row[f] = placement.hosted_on(v, f) ? 0 : gain({OpKind::move, v, f});
    }
  }

  // Heap entries of v; expects an up-to-date move cache for v and its neighbours.
  void refresh_entries(VertexId v) {
    const bool boundary = is_boundary(v);
    const FpgaId home = placement.original(v);
    const Weight* row = &move_cache[static_cast<std::size_t>(v) * k];
    for (FpgaId f = 0; f < static_cast<FpgaId>(k); ++f) {
      const bool hosted = f == home || placement.hosted_on(v, f);
      if (boundary && config.ops.move && !hosted) {
        move_heaps[f].upsert(v, row[f]);
      } else {
        move_heaps[f].remove(v);
      }
      if (boundary && config.ops.replicate && !hosted) {
        replicate_heaps[f].upsert(v, gain({OpKind::replicate, v, f}));
      } else {
        replicate_heaps[f].remove(v);
      }
      if (config.ops.remove && hosted && f != home) {
        remove_heaps[f].upsert(v, gain({OpKind::remove, v, f}));
      } else {
        remove_heaps[f].remove(v);
      }
    }
    refresh_exchange(v, boundary);
  }

  // Best partner among vertices sharing a net with v. The joint gain is
  // move(v) + move(w) plus, for every shared net, the difference between the
  // joint and the two separate evaluations of that net.
  void refresh_exchange(VertexId v, bool boundary) {
    exchange_partner[v] = -1;
    if (!config.ops.exchange || !boundary) {
      exchange_heap.remove(v);
      return;
    }
    const FpgaId a = placement.original(v);
    ++vstamp;
    vertex_stamp[v] = vstamp;
    candidates.clear();
    pair[0].vertex = v;
    gather_hosts(v, pair[0].before);
    for (EdgeId e : h.incidence(v)) {
      const auto& edge = h.edge(e);
      auto visit = [&](VertexId w) {
        const FpgaId b = placement.original(w);
        if (w == v || b == a || placement.hosted_on(v, b) || placement.hosted_on(w, a)) return;
        if (vertex_stamp[w] != vstamp) {
          vertex_stamp[w] = vstamp;
          exchange_corr[w] = 0;
          candidates.push_back(w);
        }
        if (edge.source != v && edge.source != w) {
          // Two drains trading places leave the counts unchanged; the separate
          // evaluations each lose a sole copy on a or b.
          long sole = 0;
          if (count_on(e, a) == 1) sole += hops_from_source(edge.source, a);
          if (count_on(e, b) == 1) sole += hops_from_source(edge.source, b);
          exchange_corr[w] -= edge.weight * sole;
          return;
        }
        pair[0].after = pair[0].before;
        pair[0].after[0] = b;
        pair[1].vertex = w;
        gather_hosts(w, pair[1].before);
        pair[1].after = pair[1].before;
        pair[1].after[0] = a;
        const long joint = cost_after(e, pair, 2);
        const long only_v = cost_after(e, pair, 1);
        const long only_w = cost_after(e, pair + 1, 1);
        exchange_corr[w] += edge.weight * (only_v + only_w - joint - net_cost[e]);
      };
      visit(edge.source);
      for (VertexId d : edge.drains) visit(d);
    }
    VertexId best = -1;
    Weight best_gain = 0;
    for (VertexId w : candidates) {
      const FpgaId b = placement.original(w);
      const Weight g = move_cache[static_cast<std::size_t>(v) * k + b] +
                       move_cache[static_cast<std::size_t>(w) * k + a] + exchange_corr[w];
      if (best < 0 || g > best_gain || (g == best_gain && w < best)) {
        best = w;
        best_gain = g;
      }
    }
    if (best < 0) {
      exchange_heap.remove(v);
      return;
    }
    exchange_partner[v] = best;
    partner_refs[best].push_back(v);
    exchange_heap.upsert(v, best_gain);
  }

  void refresh_all() {
    for (auto& refs : partner_refs) refs.clear();
    const auto n = static_cast<VertexId>(h.num_vertices());
    for (VertexId v = 0; v < n; ++v) update_move_cache(v);
    for (VertexId v = 0; v < n; ++v) refresh_entries(v);
  }

  // Applies op to all incremental state; returns FPGAs whose usage or I/O dropped.
  std::vector<FpgaId> apply_state(const Op& op) {
    const int n = describe(op);
    std::vector<FpgaId> relieved;
    auto relieve = [&](FpgaId f) {
      if (std::find(relieved.begin(), relieved.end(), f) == relieved.end()) relieved.push_back(f);
    };
    // Usage.
    for (int i = 0; i < n; ++i) {
      const auto& c = changes[i];
      const auto& w = h.vertex_weight(c.vertex);
      for (FpgaId f : c.before) {
        if (std::find(c.after.begin(), c.after.end(), f) == c.after.end()) {
          usage[f] -= w;
          if (!w.is_zero()) relieve(f);
        }
      }
      for (FpgaId f : c.after) {
        if (std::find(c.before.begin(), c.before.end(), f) == c.before.end()) usage[f] += w;
      }
    }
    // Nets (the placement still holds the pre-op hosts here).
    std::vector<FpgaId> sources;
    std::vector<FpgaId> old_sources;
    std::vector<EdgeId> nets;
    for_each_touched_net(n, [&](EdgeId e) { nets.push_back(e); });
    std::vector<Weight> before_io = io;
    for (EdgeId e : nets) {
      const Weight w = h.edge(e).weight;
      NetCounts updated;
      const long after = net_after(e, changes, n, sources, updated);
      gather_hosts(h.edge(e).source, old_sources);
      for_each_io(old_sources, net_counts[e], [&](FpgaId f) { io[f] -= w; });
      for_each_io(sources, updated, [&](FpgaId f) { io[f] += w; });
      thd += w * (after - net_cost[e]);
      net_cost[e] = after;
      net_counts[e] = std::move(updated);
    }
    for (FpgaId f = 0; f < static_cast<FpgaId>(k); ++f) {
      if (io[f] < before_io[f]) relieve(f);
    }
    apply_to_placement(placement, op);
    return relieved;
  }

  void apply(const Op& op, bool propagate) {
    const auto relieved = apply_state(op);
    if (!propagate) return;
    if (config.full_recompute) {
      for (auto& bucket : parked) bucket.clear();
      refresh_all();
      return;
    }
    // Vertices sharing a net with a changed vertex.
    const int n = op.kind == OpKind::exchange ? 2 : 1;
    std::vector<VertexId> touched;
    ++vstamp;
    auto add = [&](VertexId v) {
      if (vertex_stamp[v] == vstamp) return;
      vertex_stamp[v] = vstamp;
      touched.push_back(v);
    };
    for (int i = 0; i < n; ++i) {
      const VertexId v = i == 0 ? op.vertex : op.partner;
      add(v);
      for (EdgeId e : h.incidence(v)) {
        add(h.edge(e).source);
        for (VertexId d : h.edge(e).drains) add(d);
      }
    }
    std::vector<VertexId> dependents;
    for (VertexId x : touched) {
      for (VertexId u : partner_refs[x]) {
        if (exchange_partner[u] == x) dependents.push_back(u);
      }
      partner_refs[x].clear();
    }
    std::sort(touched.begin(), touched.end());
    for (VertexId x : touched) update_move_cache(x);
    for (VertexId x : touched) refresh_entries(x);
    std::sort(dependents.begin(), dependents.end());
    dependents.erase(std::unique(dependents.begin(), dependents.end()), dependents.end());
    for (VertexId u : dependents) {
      if (!std::binary_search(touched.begin(), touched.end(), u)) refresh_exchange(u, is_boundary(u));
    }
    for (FpgaId f : relieved) restore(f);
  }

  void restore(FpgaId f) {
    auto bucket = std::move(parked[f]);
    parked[f].clear();
    for (const Parked& entry : bucket) {
      const VertexId v = entry.vertex;
      const bool boundary = is_boundary(v);
      switch (entry.kind) {
        case OpKind::exchange:
          refresh_exchange(v, boundary);
          break;
        case OpKind::move:
        case OpKind::replicate:
        case OpKind::remove: {
          const Op op{entry.kind, v, entry.destination};
          const bool eligible = entry.kind == OpKind::remove ? true : boundary;
          if (eligible && is_legal(op)) heap_for(entry.kind, entry.destination).upsert(v, gain(op));
          break;
        }
      }
    }
  }

  IndexedHeap& heap_for(OpKind kind, FpgaId f) {
    switch (kind) {
      case OpKind::move: return move_heaps[f];
      case OpKind::replicate: return replicate_heaps[f];
      case OpKind::remove: return remove_heaps[f];
      case OpKind::exchange: break;
    }
    return exchange_heap;
  }

  Op entry_op(OpKind kind, FpgaId f, const IndexedHeap::Item& item) const {
    if (kind == OpKind::exchange) {
      const VertexId partner = exchange_partner[item.vertex];
      return {kind, item.vertex, placement.original(partner), partner, item.gain};
    }
    return {kind, item.vertex, f, -1, item.gain};
  }

  bool acceptable(const Op& op) const {
    if (op.kind == OpKind::remove) return op.gain >= 0;
    if (op.kind == OpKind::replicate && replicas_applied >= config.max_replicas) return false;
    if (op.gain > 0) return true;
    return op.gain == 0 && config.allow_zero_gain && zero_gain_applied < config.zero_gain_budget;
  }

  static bool better(const Op& a, const Op& b) {
    if (a.gain != b.gain) return a.gain > b.gain;
    const int pa = kPriority[static_cast<int>(a.kind)];
    const int pb = kPriority[static_cast<int>(b.kind)];
    if (pa != pb) return pa > pb;
    if (a.vertex != b.vertex) return a.vertex < b.vertex;
    return a.destination < b.destination;
  }

  std::optional<Op> select() const {
    std::optional<Op> best;
    auto consider = [&](OpKind kind, FpgaId f, const IndexedHeap& heap) {
      if (heap.empty() || !config.ops.enabled(kind)) return;
      const Op op = entry_op(kind, f, heap.top());
      if (!acceptable(op)) return;
      if (!best || better(op, *best)) best = op;
    };
    consider(OpKind::exchange, -1, exchange_heap);
    for (FpgaId f = 0; f < static_cast<FpgaId>(k); ++f) {
      consider(OpKind::move, f, move_heaps[f]);
      consider(OpKind::replicate, f, replicate_heaps[f]);
      consider(OpKind::remove, f, remove_heaps[f]);
    }
    return best;
  }

  void park(const Op& op, const Evaluation& eval) {
    heap_for(op.kind, op.destination).remove(op.vertex);
    if (op.kind == OpKind::exchange) exchange_partner[op.vertex] = -1;
    // Hop-blocked entries only change when a neighbour moves, which refreshes them.
    if (eval.block == Block::resource || eval.block == Block::io) {
      parked[eval.blocking_fpga].push_back({op.kind, op.vertex, op.destination});
    }
  }

  RefineStats run(const Observer& observer, const Refiner& self) {
    RefineStats stats;
    stats.initial_hop_distance = thd;
    while (stats.applied_total() < config.max_ops) {
      const auto op = select();
      if (!op) break;
      const Evaluation eval = evaluate(*op);
      assert(eval.gain == op->gain);
      if (eval.block != Block::none) {
        park(*op, eval);
        ++stats.rejected;
        continue;
      }
      apply(*op, true);
      ++stats.applied[static_cast<int>(op->kind)];
      if (op->kind == OpKind::replicate) ++replicas_applied;
      if (op->gain == 0 && op->kind != OpKind::remove) ++zero_gain_applied;
      if (observer) observer(*op, self);
    }
    stats.final_hop_distance = thd;
    return stats;
  }

  std::vector<Op> entries() const {
    std::vector<Op> out;
    for (const auto& item : exchange_heap.items()) out.push_back(entry_op(OpKind::exchange, -1, item));
    for (FpgaId f = 0; f < static_cast<FpgaId>(k); ++f) {
      for (const auto& item : move_heaps[f].items()) out.push_back(entry_op(OpKind::move, f, item));
      for (const auto& item : replicate_heaps[f].items()) out.push_back(entry_op(OpKind::replicate, f, item));
      for (const auto& item : remove_heaps[f].items()) out.push_back(entry_op(OpKind::remove, f, item));
    }
    return out;
  }
};

Refiner::Refiner(const Hypergraph& h, const MfsTopology& t, Placement start, RefineConfig config)
    : impl_(std::make_unique<Impl>(h, t, std::move(start), config)) {}

Refiner::~Refiner() = default;

const Placement& Refiner::placement() const { return impl_->placement; }
Placement Refiner::take_placement() && { return std::move(impl_->placement); }
Weight Refiner::total_hop_distance() const { return impl_->thd; }
const std::vector<ResourceVector>& Refiner::resource_usage() const { return impl_->usage; }
const std::vector<Weight>& Refiner::io_usage() const { return impl_->io; }
bool Refiner::is_legal(const Op& op) const { return impl_->is_legal(op); }

Weight Refiner::gain(const Op& op) const {
  if (!is_legal(op)) throw std::invalid_argument("illegal operation");
  return impl_->gain(op);
}

bool Refiner::feasible(const Op& op) const {
  if (!is_legal(op)) throw std::invalid_argument("illegal operation");
  return impl_->evaluate(op).block == Impl::Block::none;
}

void Refiner::apply(const Op& op, bool propagate) {
  if (!is_legal(op)) throw std::invalid_argument("illegal operation");
  impl_->apply(op, propagate);
}

std::vector<Op> Refiner::heap_entries() const { return impl_->entries(); }

std::size_t Refiner::heap_count() const { return 1 + 3 * impl_->k; }

RefineStats Refiner::run(const Observer& observer) { return impl_->run(observer, *this); }

std::optional<Op> Refiner::random_op(Rng& rng) const {
  const auto& p = impl_->placement;
  const auto& ops = impl_->config.ops;
  const auto k = static_cast<FpgaId>(impl_->k);
  const auto& h = impl_->h;
  std::vector<OpKind> kinds;
  for (OpKind kind : {OpKind::move, OpKind::exchange, OpKind::replicate, OpKind::remove}) {
    if (ops.enabled(kind)) kinds.push_back(kind);
  }
  if (kinds.empty() || h.num_vertices() == 0) return std::nullopt;
  const OpKind kind = kinds[rng.below(kinds.size())];
  const auto v = static_cast<VertexId>(rng.below(h.num_vertices()));
  Op op{kind, v, -1};
  switch (kind) {
    case OpKind::move:
    case OpKind::replicate: {
      std::vector<FpgaId> free;
      for (FpgaId f = 0; f < k; ++f) {
        if (!p.hosted_on(v, f)) free.push_back(f);
      }
      if (free.empty()) return std::nullopt;
      op.destination = free[rng.below(free.size())];
      break;
    }
    case OpKind::remove:
      if (p.replicas(v).empty()) return std::nullopt;
      op.destination = p.replicas(v)[rng.below(p.replicas(v).size())];
      break;
    case OpKind::exchange: {
      op.partner = static_cast<VertexId>(rng.below(h.num_vertices()));
      op.destination = p.original(op.partner);
      break;
    }
  }
  if (!is_legal(op)) return std::nullopt;
  op.gain = impl_->gain(op);
  return op;
}

LevelResult refine_level(const Hypergraph& h, const MfsTopology& t, Placement start,
                         const RefineConfig& config, const Observer& observer) {
  Refiner refiner(h, t, std::move(start), config);
  RefineStats stats = refiner.run(observer);
  return {std::move(refiner).take_placement(), stats};
}

Placement project_to_finer(const coarsen::Level& level, const Placement& coarse) {
  const auto& map = level.fine_to_coarse;
  std::vector<FpgaId> original(map.size());
  std::vector<std::vector<FpgaId>> replicas(map.size());
  for (std::size_t v = 0; v < map.size(); ++v) {
    original[v] = coarse.original(map[v]);
    replicas[v] = coarse.replicas(map[v]);
  }
  return Placement(std::move(original), std::move(replicas));
}

bool incremental_vs_full_check(const Hypergraph& h, const MfsTopology& t, Placement start,
                               std::size_t num_ops, std::uint64_t seed,
                               std::optional<std::size_t> inject_stale_after) {
  Refiner refiner(h, t, std::move(start));
  Rng rng(seed);
  auto entries_exact = [&] {
    Placement work = refiner.placement();
    for (const Op& op : refiner.heap_entries()) {
      if (op.gain != local_gain(h, work, t.hops(), op)) return false;
    }
    return refiner.total_hop_distance() == total_hop_distance(h, work, t.hops());
  };
  if (!entries_exact()) return false;
  for (std::size_t i = 0; i < num_ops; ++i) {
    std::optional<Op> op;
    for (int attempt = 0; attempt < 64 && !op; ++attempt) op = refiner.random_op(rng);
    if (!op) continue;
    refiner.apply(*op, !(inject_stale_after && *inject_stale_after == i));
    if (!entries_exact()) return false;
  }
  return true;
}

}  // namespace hopart::refine
