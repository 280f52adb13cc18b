#include "hopart/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hopart/rng.hpp"

namespace hopart::io {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column),
      reason_(message) {}

namespace {

struct Token {
  std::string_view text;
  std::size_t column;
};

struct Record {
  std::size_t line;
  std::vector<Token> tokens;
};

// Splits text into non-empty records (one per line) after stripping comments.
std::vector<Record> tokenize(std::string_view text, char comment) {
  std::vector<Record> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    if (auto c = line.find(comment); c != std::string_view::npos) line = line.substr(0, c);
    Record rec{line_no, {}};
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i >= line.size()) break;
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      rec.tokens.push_back({line.substr(start, i - start), start + 1});
    }
    if (!rec.tokens.empty()) records.push_back(std::move(rec));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return records;
}

class RecordReader {
 public:
  explicit RecordReader(std::vector<Record> records) : records_(std::move(records)) {}

  const Record& next(std::string_view what) {
    if (index_ >= records_.size()) {
      const std::size_t line = records_.empty() ? 1 : records_.back().line + 1;
      throw ParseError(line, 1, "unexpected end of input, expected " + std::string(what));
    }
    return records_[index_++];
  }

  void expect_end() const {
    if (index_ < records_.size()) {
      throw ParseError(records_[index_].line, records_[index_].tokens.front().column,
                       "trailing garbage after last record");
    }
  }

 private:
  std::vector<Record> records_;
  std::size_t index_ = 0;
};

std::int64_t to_int(const Record& rec, std::size_t i, std::string_view what) {
  const Token& tok = rec.tokens[i];
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
  if (ec != std::errc{} || ptr != tok.text.data() + tok.text.size()) {
    throw ParseError(rec.line, tok.column, "expected integer " + std::string(what) + ", got '" +
                                               std::string(tok.text) + "'");
  }
  return value;
}

[[noreturn]] void fail(const Record& rec, std::size_t i, const std::string& message) {
  const std::size_t column = i < rec.tokens.size() ? rec.tokens[i].column : 1;
  throw ParseError(rec.line, column, message);
}

std::int64_t non_negative(const Record& rec, std::size_t i, std::string_view what) {
  const auto value = to_int(rec, i, what);
  if (value < 0) fail(rec, i, "negative " + std::string(what));
  return value;
}

}  // namespace

Hypergraph parse_hypergraph(std::string_view text, std::vector<std::string>* diagnostics) {
  RecordReader reader(tokenize(text, '#'));
  const Record& header = reader.next("header 'V E k'");
  if (header.tokens.size() != 3) fail(header, 0, "malformed header, expected 'V E k'");
  const auto n = non_negative(header, 0, "vertex count");
  const auto m = non_negative(header, 1, "edge count");
  const auto k = non_negative(header, 2, "resource type count");
  if (k < 1) fail(header, 2, "malformed header, resource type count must be positive");

  HypergraphBuilder builder(static_cast<std::size_t>(k));
  for (std::int64_t v = 0; v < n; ++v) {
    const Record& rec = reader.next("vertex resource line");
    if (rec.tokens.size() != static_cast<std::size_t>(k)) {
      fail(rec, 0, "vertex " + std::to_string(v) + " needs " + std::to_string(k) + " resource entries");
    }
    ResourceVector w(static_cast<std::size_t>(k));
    for (std::int64_t i = 0; i < k; ++i) w[i] = non_negative(rec, i, "weight");
    builder.add_vertex(std::move(w));
  }
  std::vector<VertexId> drains;
  for (std::int64_t e = 0; e < m; ++e) {
    const Record& rec = reader.next("net line 'w src d1 ...'");
    if (rec.tokens.size() < 3) fail(rec, 0, "net needs a weight, a source and at least one drain");
    const auto w = to_int(rec, 0, "net weight");
    if (w < 1) fail(rec, 0, "non-positive net weight");
    auto vertex = [&](std::size_t i) {
      const auto v = to_int(rec, i, "vertex id");
      if (v < 0 || v >= n) fail(rec, i, "dangling vertex id " + std::to_string(v));
      return static_cast<VertexId>(v);
    };
    const VertexId src = vertex(1);
    drains.clear();
    for (std::size_t i = 2; i < rec.tokens.size(); ++i) {
      const VertexId d = vertex(i);
      if (d == src) fail(rec, i, "source repeated in drains");
      drains.push_back(d);
    }
    builder.add_edge(w, src, drains);
  }
  reader.expect_end();
  if (diagnostics) *diagnostics = builder.diagnostics();
  return std::move(builder).build();
}

std::string write_hypergraph(const Hypergraph& h) {
  std::ostringstream out;
  out << h.num_vertices() << ' ' << h.num_edges() << ' ' << h.num_types() << '\n';
  for (VertexId v = 0; v < static_cast<VertexId>(h.num_vertices()); ++v) {
    const auto w = h.vertex_weight(v).values();
    for (std::size_t i = 0; i < w.size(); ++i) out << (i ? " " : "") << w[i];
    out << '\n';
  }
  for (const auto& e : h.edges()) {
    out << e.weight << ' ' << e.source;
    for (VertexId d : e.drains) out << ' ' << d;
    out << '\n';
  }
  return out.str();
}

MfsTopology parse_topology(std::string_view text) {
  RecordReader reader(tokenize(text, '#'));
  const Record& header = reader.next("header 'K L k [hop_max]'");
  if (header.tokens.size() != 3 && header.tokens.size() != 4) {
    fail(header, 0, "malformed header, expected 'K L k [hop_max]'");
  }
  const auto k_fpgas = non_negative(header, 0, "FPGA count");
  const auto links = non_negative(header, 1, "link count");
  const auto types = non_negative(header, 2, "resource type count");
  if (k_fpgas < 1) fail(header, 0, "malformed header, FPGA count must be positive");
  if (types < 1) fail(header, 2, "malformed header, resource type count must be positive");
  std::optional<int> hop_max;
  if (header.tokens.size() == 4) {
    const auto hm = to_int(header, 3, "hop_max");
    if (hm < 1) fail(header, 3, "hop_max must be positive");
    hop_max = static_cast<int>(hm);
  }

  std::vector<FpgaSpec> fpgas;
  for (std::int64_t f = 0; f < k_fpgas; ++f) {
    const Record& rec = reader.next("FPGA capacity line");
    const auto count = rec.tokens.size();
    if (count != static_cast<std::size_t>(types) && count != static_cast<std::size_t>(types) + 1) {
      fail(rec, 0, "FPGA " + std::to_string(f) + " needs " + std::to_string(types) +
                       " capacities and an optional io limit");
    }
    FpgaSpec spec{ResourceVector(static_cast<std::size_t>(types)), kUnlimited};
    for (std::int64_t i = 0; i < types; ++i) spec.capacity[i] = non_negative(rec, i, "capacity");
    if (count > static_cast<std::size_t>(types)) spec.io_limit = non_negative(rec, types, "io limit");
    fpgas.push_back(std::move(spec));
  }
  std::vector<std::pair<FpgaId, FpgaId>> link_list;
  std::set<std::pair<FpgaId, FpgaId>> seen;
  for (std::int64_t l = 0; l < links; ++l) {
    const Record& rec = reader.next("link line 'a b'");
    if (rec.tokens.size() != 2) fail(rec, 0, "link needs exactly two FPGA ids");
    const auto a = to_int(rec, 0, "FPGA id");
    const auto b = to_int(rec, 1, "FPGA id");
    if (a < 0 || a >= k_fpgas) fail(rec, 0, "dangling FPGA id " + std::to_string(a));
    if (b < 0 || b >= k_fpgas) fail(rec, 1, "dangling FPGA id " + std::to_string(b));
    if (a == b) fail(rec, 0, "self-link");
    if (!seen.insert(std::minmax(a, b)).second) fail(rec, 0, "duplicate link");
    link_list.emplace_back(static_cast<FpgaId>(a), static_cast<FpgaId>(b));
  }
  reader.expect_end();
  return MfsTopology(std::move(fpgas), std::move(link_list), hop_max);
}

std::string write_topology(const MfsTopology& t) {
  std::ostringstream out;
  out << t.num_fpgas() << ' ' << t.links().size() << ' ' << t.num_types();
  if (t.hop_max()) out << ' ' << *t.hop_max();
  out << '\n';
  for (const auto& spec : t.fpgas()) {
    const auto caps = spec.capacity.values();
    for (std::size_t i = 0; i < caps.size(); ++i) out << (i ? " " : "") << caps[i];
    if (spec.io_limit != kUnlimited) out << ' ' << spec.io_limit;
    out << '\n';
  }
  for (auto [a, b] : t.links()) out << a << ' ' << b << '\n';
  return out.str();
}

std::string write_solution(const Placement& p) {
  std::string out;
  out.reserve(p.num_vertices() * 3);
  for (VertexId v = 0; v < static_cast<VertexId>(p.num_vertices()); ++v) {
    out += std::to_string(p.original(v));
    for (FpgaId r : p.replicas(v)) {
      out += ' ';
      out += std::to_string(r);
    }
    out += '\n';
  }
  return out;
}

Placement parse_solution(std::string_view text, std::optional<std::size_t> num_vertices) {
  const auto records = tokenize(text, '#');
  std::vector<FpgaId> original;
  std::vector<std::vector<FpgaId>> replicas;
  for (const Record& rec : records) {
    const auto vertex = original.size();
    if (num_vertices && vertex >= *num_vertices) fail(rec, 0, "trailing garbage after last vertex");
    const auto orig = non_negative(rec, 0, "FPGA id");
    std::vector<FpgaId> reps;
    for (std::size_t i = 1; i < rec.tokens.size(); ++i) {
      const auto f = non_negative(rec, i, "FPGA id");
      if (f == orig) fail(rec, i, "replica equal to original on vertex " + std::to_string(vertex));
      if (std::find(reps.begin(), reps.end(), f) != reps.end()) {
        fail(rec, i, "duplicate replica on vertex " + std::to_string(vertex));
      }
      reps.push_back(static_cast<FpgaId>(f));
    }
    original.push_back(static_cast<FpgaId>(orig));
    replicas.push_back(std::move(reps));
  }
  if (num_vertices && original.size() != *num_vertices) {
    const std::size_t line = records.empty() ? 1 : records.back().line + 1;
    throw ParseError(line, 1, "solution lists " + std::to_string(original.size()) +
                                  " vertices, expected " + std::to_string(*num_vertices));
  }
  return Placement(std::move(original), std::move(replicas));
}

Hypergraph parse_hmetis(std::string_view text, std::vector<std::string>* diagnostics) {
  RecordReader reader(tokenize(text, '%'));
  const Record& header = reader.next("header 'E V [fmt]'");
  if (header.tokens.size() != 2 && header.tokens.size() != 3) {
    fail(header, 0, "malformed header, expected 'E V [fmt]'");
  }
  const auto m = non_negative(header, 0, "net count");
  const auto n = non_negative(header, 1, "vertex count");
  const auto fmt = header.tokens.size() == 3 ? non_negative(header, 2, "fmt") : 0;
  if (fmt != 0 && fmt != 1 && fmt != 10 && fmt != 11) fail(header, 2, "unsupported fmt");
  const bool edge_weights = fmt % 10 == 1;
  const bool vertex_weights = fmt >= 10;

  struct Net {
    Weight weight;
    std::vector<VertexId> pins;
  };
  std::vector<Net> nets;
  for (std::int64_t e = 0; e < m; ++e) {
    const Record& rec = reader.next("net line");
    std::size_t i = 0;
    Net net{1, {}};
    if (edge_weights) {
      net.weight = to_int(rec, i++, "net weight");
      if (net.weight < 1) fail(rec, 0, "non-positive net weight");
    }
    for (; i < rec.tokens.size(); ++i) {
      const auto pin = to_int(rec, i, "pin");
      if (pin < 1 || pin > n) fail(rec, i, "dangling vertex id " + std::to_string(pin));
      net.pins.push_back(static_cast<VertexId>(pin - 1));
    }
    if (net.pins.empty()) fail(rec, 0, "net without pins");
    nets.push_back(std::move(net));
  }
  HypergraphBuilder builder(1);
  for (std::int64_t v = 0; v < n; ++v) {
    Weight w = 1;
    if (vertex_weights) {
      const Record& rec = reader.next("vertex weight line");
      if (rec.tokens.size() != 1) fail(rec, 0, "vertex weight line needs one integer");
      w = non_negative(rec, 0, "weight");
    }
    builder.add_vertex(ResourceVector{w});
  }
  reader.expect_end();

  std::vector<std::string> notes;
  std::vector<VertexId> drains;
  for (std::size_t e = 0; e < nets.size(); ++e) {
    const VertexId src = nets[e].pins.front();
    drains.clear();
    for (std::size_t i = 1; i < nets[e].pins.size(); ++i) {
      if (nets[e].pins[i] != src) drains.push_back(nets[e].pins[i]);
    }
    if (drains.empty()) {
      notes.push_back("net " + std::to_string(e) + ": single-pin net dropped");
      continue;
    }
    builder.add_edge(nets[e].weight, src, drains);
  }
  if (diagnostics) {
    *diagnostics = std::move(notes);
    diagnostics->insert(diagnostics->end(), builder.diagnostics().begin(), builder.diagnostics().end());
  }
  return std::move(builder).build();
}

InstanceBundle make_bundle(Hypergraph h, MfsTopology t) {
  if (h.num_types() != t.num_types()) {
    throw std::invalid_argument("hypergraph has " + std::to_string(h.num_types()) +
                                " resource types but topology has " + std::to_string(t.num_types()));
  }
  return InstanceBundle{std::move(h), std::move(t), {}};
}

namespace {

std::size_t skewed_fanout(Rng& rng, std::size_t max_fanout, double continue_prob) {
  std::size_t fanout = 1;
  while (fanout < max_fanout && rng.chance(continue_prob)) ++fanout;
  return fanout;
}

}  // namespace

InstanceBundle gen_instance(const GeneratorConfig& c) {
  if (c.vertices == 0) throw std::invalid_argument("generator needs at least one vertex");
  if (c.edges > 0 && c.vertices < 2) throw std::invalid_argument("nets need at least two vertices");
  if (c.fpgas == 0 || c.types == 0) throw std::invalid_argument("need at least one FPGA and one resource type");
  if (c.max_fanout == 0) throw std::invalid_argument("max fanout must be positive");
  if (c.spare < 0.0) throw std::invalid_argument("total vertex weight exceeds total capacity (spare < 0)");
  if (c.heterogeneity < 0.0 || c.heterogeneity >= 1.0) {
    throw std::invalid_argument("heterogeneity must lie in [0, 1)");
  }

  Rng rng(derive_seed(c.seed, SeedStream::generator));
  const auto n = c.vertices;

  HypergraphBuilder builder(c.types);
  for (std::size_t v = 0; v < n; ++v) {
    ResourceVector w(c.types);
    w[0] = rng.between(1, 8);
    for (std::size_t i = 1; i < c.types; ++i) w[i] = rng.chance(0.25) ? rng.between(1, 4) : 0;
    builder.add_vertex(std::move(w));
  }

  std::vector<VertexId> hubs(std::max<std::size_t>(1, n / 20));
  for (auto& hub : hubs) hub = static_cast<VertexId>(rng.below(n));
  const auto window = static_cast<std::int64_t>(std::max<std::size_t>(4, n / 50));
  std::vector<VertexId> drains;
  Weight total_net_weight = 0;
  for (std::size_t e = 0; e < c.edges; ++e) {
    const bool hub = rng.chance(c.hub_share);
    const VertexId src = hub ? hubs[rng.below(hubs.size())] : static_cast<VertexId>(rng.below(n));
    const auto fanout = std::min(skewed_fanout(rng, c.max_fanout, hub ? 0.8 : 0.55), n - 1);
    drains.clear();
    for (std::size_t attempt = 0; drains.size() < fanout && attempt < 8 * fanout; ++attempt) {
      VertexId d;
      if (rng.chance(c.locality)) {
        const auto offset = rng.between(-window, window);
        d = static_cast<VertexId>(((src + offset) % static_cast<std::int64_t>(n) + n) % n);
      } else {
        d = static_cast<VertexId>(rng.below(n));
      }
      if (d != src && std::find(drains.begin(), drains.end(), d) == drains.end()) drains.push_back(d);
    }
    if (drains.empty()) drains.push_back(static_cast<VertexId>((src + 1) % n));
    const Weight w = rng.chance(0.6) ? 1 : rng.between(2, 4);
    total_net_weight += w;
    builder.add_edge(w, src, drains);
  }
  Hypergraph h = std::move(builder).build();

  // Random spanning tree over shuffled labels, then extra links.
  const auto k = c.fpgas;
  std::vector<FpgaId> label(k);
  for (std::size_t f = 0; f < k; ++f) label[f] = static_cast<FpgaId>(f);
  rng.shuffle(label.begin(), label.end());
  std::vector<std::pair<FpgaId, FpgaId>> links;
  std::set<std::pair<FpgaId, FpgaId>> seen;
  for (std::size_t i = 1; i < k; ++i) {
    const FpgaId a = label[i];
    const FpgaId b = label[rng.below(i)];
    links.emplace_back(a, b);
    seen.insert(std::minmax(a, b));
  }
  const std::size_t max_links = k * (k - 1) / 2;
  const std::size_t target = std::min(max_links, links.size() + c.extra_links);
  for (std::size_t attempt = 0; links.size() < target && attempt < 64 * (c.extra_links + 1); ++attempt) {
    const auto a = static_cast<FpgaId>(rng.below(k));
    const auto b = static_cast<FpgaId>(rng.below(k));
    if (a == b || !seen.insert(std::minmax(a, b)).second) continue;
    links.emplace_back(a, b);
  }

  const ResourceVector total = h.total_weight();
  ResourceVector heaviest(c.types);
  for (VertexId v = 0; v < static_cast<VertexId>(n); ++v) {
    for (std::size_t i = 0; i < c.types; ++i) heaviest[i] = std::max(heaviest[i], h.vertex_weight(v)[i]);
  }
  std::vector<double> multiplier(k);
  double multiplier_sum = 0.0;
  for (auto& m : multiplier) {
    m = 1.0 - c.heterogeneity + 2.0 * c.heterogeneity * rng.unit();
    multiplier_sum += m;
  }
  const Weight io_limit =
      c.io_factor ? static_cast<Weight>(std::ceil(*c.io_factor * static_cast<double>(total_net_weight) /
                                                  static_cast<double>(k)))
                  : kUnlimited;
  std::vector<FpgaSpec> fpgas(k);
  for (std::size_t f = 0; f < k; ++f) {
    fpgas[f].capacity = ResourceVector(c.types);
    for (std::size_t i = 0; i < c.types; ++i) {
      const double share = (1.0 + c.spare) * static_cast<double>(total[i]) * multiplier[f] / multiplier_sum;
      fpgas[f].capacity[i] = std::max({static_cast<Weight>(std::ceil(share)), heaviest[i], Weight{1}});
    }
    fpgas[f].io_limit = io_limit;
  }
  return make_bundle(std::move(h), MfsTopology(std::move(fpgas), std::move(links), c.hop_max));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << contents;
}

}  // namespace hopart::io
