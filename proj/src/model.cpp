#include "hopart/model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hopart {

ResourceVector& ResourceVector::operator+=(const ResourceVector& other) {
  if (other.size() != size()) {
    throw std::invalid_argument("resource vector length mismatch");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    values_[i] += other.values_[i];
  }
  return *this;
}

ResourceVector& ResourceVector::operator-=(const ResourceVector& other) {
  if (other.size() != size()) {
    throw std::invalid_argument("resource vector length mismatch");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    values_[i] -= other.values_[i];
  }
  return *this;
}

bool ResourceVector::fits_within(const ResourceVector& limit) const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] > limit.values_[i]) return false;
  }
  return true;
}

bool ResourceVector::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](Weight w) { return w == 0; });
}

Weight ResourceVector::sum_of_squares() const {
  Weight sum = 0;
  for (Weight w : values_) sum += w * w;
  return sum;
}

ResourceVector operator+(ResourceVector lhs, const ResourceVector& rhs) {
  lhs += rhs;
  return lhs;
}

std::span<const EdgeId> Hypergraph::incident_edges(VertexId v) const {
  if (v < 0 || static_cast<std::size_t>(v) >= num_vertices()) {
    throw std::out_of_range("vertex id " + std::to_string(v) + " out of range (|V|=" +
                            std::to_string(num_vertices()) + ")");
  }
  return incidence_[v];
}

ResourceVector Hypergraph::total_weight() const {
  ResourceVector total(num_types_);
  for (const auto& w : vertex_weights_) total += w;
  return total;
}

VertexId HypergraphBuilder::add_vertex(ResourceVector weight) {
  if (weight.size() != num_types_) {
    throw std::invalid_argument("vertex " + std::to_string(weights_.size()) + " has " +
                                std::to_string(weight.size()) + " resource entries, expected " +
                                std::to_string(num_types_));
  }
  for (std::size_t i = 0; i < weight.size(); ++i) {
    if (weight[i] < 0) {
      throw std::invalid_argument("negative resource usage on vertex " +
                                  std::to_string(weights_.size()));
    }
  }
  weights_.push_back(std::move(weight));
  return static_cast<VertexId>(weights_.size() - 1);
}

void HypergraphBuilder::add_edge(Weight weight, VertexId source, std::span<const VertexId> drains) {
  const auto id = std::to_string(edges_.size());
  if (weight < 1) {
    throw std::invalid_argument("net " + id + " has non-positive weight");
  }
  Hyperedge e;
  e.weight = weight;
  e.source = source;
  e.drains.assign(drains.begin(), drains.end());
  std::sort(e.drains.begin(), e.drains.end());
  auto last = std::unique(e.drains.begin(), e.drains.end());
  if (last != e.drains.end()) {
    diagnostics_.push_back("net " + id + ": repeated drains stored once");
    e.drains.erase(last, e.drains.end());
  }
  if (std::binary_search(e.drains.begin(), e.drains.end(), source)) {
    throw std::invalid_argument("net " + id + ": source repeated in drains");
  }
  if (e.drains.empty()) {
    throw std::invalid_argument("net " + id + ": empty drain set");
  }
  edges_.push_back(std::move(e));
}

void HypergraphBuilder::add_net(Weight weight, std::span<const VertexId> sources,
                                std::span<const VertexId> drains) {
  if (sources.empty()) {
    throw std::invalid_argument("net without source");
  }
  if (sources.size() > 1) {
    diagnostics_.push_back("net with " + std::to_string(sources.size()) +
                           " sources split into one net per source");
  }
  for (VertexId s : sources) add_edge(weight, s, drains);
}

Hypergraph HypergraphBuilder::build() && {
  const auto n = static_cast<VertexId>(weights_.size());
  auto check = [n](VertexId v, std::size_t e) {
    if (v < 0 || v >= n) {
      throw std::invalid_argument("net " + std::to_string(e) + " references dangling vertex " +
                                  std::to_string(v));
    }
  };
  Hypergraph h;
  h.num_types_ = num_types_;
  h.incidence_.resize(weights_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    check(edges_[e].source, e);
    h.incidence_[edges_[e].source].push_back(static_cast<EdgeId>(e));
    for (VertexId d : edges_[e].drains) {
      check(d, e);
      h.incidence_[d].push_back(static_cast<EdgeId>(e));
    }
  }
  h.vertex_weights_ = std::move(weights_);
  h.edges_ = std::move(edges_);
  return h;
}

Placement::Placement(std::vector<FpgaId> original)
    : original_(std::move(original)), replicas_(original_.size()) {}

Placement::Placement(std::vector<FpgaId> original, std::vector<std::vector<FpgaId>> replicas)
    : original_(std::move(original)), replicas_(std::move(replicas)) {
  replicas_.resize(original_.size());
  for (auto& r : replicas_) std::sort(r.begin(), r.end());
}

std::vector<FpgaId> Placement::hosts(VertexId v) const {
  std::vector<FpgaId> result;
  result.reserve(1 + replicas_[v].size());
  result.push_back(original_[v]);
  result.insert(result.end(), replicas_[v].begin(), replicas_[v].end());
  return result;
}

bool Placement::hosted_on(VertexId v, FpgaId f) const {
  return original_[v] == f || std::binary_search(replicas_[v].begin(), replicas_[v].end(), f);
}

std::size_t Placement::replica_count() const {
  std::size_t count = 0;
  for (const auto& r : replicas_) count += r.size();
  return count;
}

void Placement::set_original(VertexId v, FpgaId f) {
  if (std::binary_search(replicas_[v].begin(), replicas_[v].end(), f)) {
    throw std::invalid_argument("vertex " + std::to_string(v) + " already has a replica on FPGA " +
                                std::to_string(f));
  }
  original_[v] = f;
}

void Placement::add_replica(VertexId v, FpgaId f) {
  if (hosted_on(v, f)) {
    throw std::invalid_argument("vertex " + std::to_string(v) + " already hosted on FPGA " +
                                std::to_string(f));
  }
  auto& r = replicas_[v];
  r.insert(std::upper_bound(r.begin(), r.end(), f), f);
}

void Placement::remove_replica(VertexId v, FpgaId f) {
  auto& r = replicas_[v];
  auto it = std::lower_bound(r.begin(), r.end(), f);
  if (it == r.end() || *it != f) {
    throw std::invalid_argument("vertex " + std::to_string(v) + " has no replica on FPGA " +
                                std::to_string(f));
  }
  r.erase(it);
}

std::vector<FpgaId> drain_fpgas(const Hypergraph& h, EdgeId e, const Placement& p) {
  if (e < 0 || static_cast<std::size_t>(e) >= h.num_edges()) {
    throw std::out_of_range("edge id " + std::to_string(e) + " out of range");
  }
  std::vector<FpgaId> result;
  for (VertexId d : h.edge(e).drains) {
    result.push_back(p.original(d));
    result.insert(result.end(), p.replicas(d).begin(), p.replicas(d).end());
  }
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

}  // namespace hopart
