// Temporal networks: edge-list ingestion, neighborhood formation sequences,
// degree-based negative sampling and static-edge masking.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace mhne {

using NodeId = std::int32_t;
using Rng = std::mt19937_64;

struct TemporalEdge {
  NodeId source = 0;
  NodeId target = 0;
  double time = 0.0;
};

struct NeighborEvent {
  NodeId neighbor = 0;
  double time = 0.0;

  friend bool operator==(const NeighborEvent&, const NeighborEvent&) = default;
};

using NodePair = std::pair<NodeId, NodeId>;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string detail, const std::string& source = "")
      : std::runtime_error((source.empty() ? "" : source + ": ") + "line " +
                           std::to_string(line) + ": " + detail),
        line_(line),
        detail_(std::move(detail)) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

namespace detail {

inline std::uint64_t pair_key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace detail

// Immutable after construction. Static edges are unordered node pairs for
// both directed and undirected networks; `directed` only controls whose
// neighborhood sequence a temporal edge feeds.
class TemporalNetwork {
 public:
  TemporalNetwork() = default;

  // Edges are kept in the given order as the tie-break for equal times.
  // When `normalize` is set, times are min-max scaled to [0,1].
  static TemporalNetwork from_edges(std::size_t node_count, std::vector<TemporalEdge> edges,
                                    bool directed, bool normalize,
                                    std::vector<std::string> labels = {}) {
    TemporalNetwork net;
    net.node_count_ = node_count;
    net.directed_ = directed;
    net.labels_ = std::move(labels);
    for (const auto& e : edges) {
      if (e.source < 0 || e.target < 0 || static_cast<std::size_t>(e.source) >= node_count ||
          static_cast<std::size_t>(e.target) >= node_count) {
        throw std::out_of_range("temporal edge references an unknown node");
      }
      if (!std::isfinite(e.time)) throw std::invalid_argument("non-finite edge time");
    }
    edges.erase(std::remove_if(edges.begin(), edges.end(),
                               [](const TemporalEdge& e) { return e.source == e.target; }),
                edges.end());
    if (normalize && !edges.empty()) {
      auto [lo, hi] = std::minmax_element(edges.begin(), edges.end(),
                                          [](const auto& a, const auto& b) { return a.time < b.time; });
      const double t0 = lo->time;
      const double span = hi->time - lo->time;
      for (auto& e : edges) e.time = span > 0.0 ? (e.time - t0) / span : 0.0;
    }
    std::stable_sort(edges.begin(), edges.end(),
                     [](const auto& a, const auto& b) { return a.time < b.time; });
    net.edges_ = std::move(edges);

    net.events_.assign(node_count, {});
    std::vector<std::vector<NodeId>> adj(node_count);
    for (const auto& e : net.edges_) {
      net.events_[e.source].push_back({e.target, e.time});
      if (!directed) net.events_[e.target].push_back({e.source, e.time});
      adj[e.source].push_back(e.target);
      adj[e.target].push_back(e.source);
    }
    for (auto& a : adj) {
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    net.neighbors_ = std::move(adj);
    net.degrees_.resize(node_count);
    std::size_t twice_static = 0;
    for (std::size_t v = 0; v < node_count; ++v) {
      net.degrees_[v] = net.neighbors_[v].size();
      twice_static += net.degrees_[v];
    }
    net.static_edge_count_ = twice_static / 2;
    return net;
  }

  std::size_t node_count() const noexcept { return node_count_; }
  bool directed() const noexcept { return directed_; }
  const std::vector<TemporalEdge>& edges() const noexcept { return edges_; }
  const std::vector<NeighborEvent>& events(NodeId u) const { return events_.at(u); }
  const std::vector<NodeId>& neighbors(NodeId u) const { return neighbors_.at(u); }
  std::size_t degree(NodeId u) const { return degrees_.at(u); }
  const std::vector<std::size_t>& degrees() const noexcept { return degrees_; }
  std::size_t static_edge_count() const noexcept { return static_edge_count_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  std::string label(NodeId u) const {
    return labels_.empty() ? std::to_string(u) : labels_.at(u);
  }

  bool has_static_edge(NodeId a, NodeId b) const {
    const auto& n = neighbors_.at(a);
    return std::binary_search(n.begin(), n.end(), b);
  }

  // All distinct static pairs (a < b), ascending.
  std::vector<NodePair> static_pairs() const {
    std::vector<NodePair> out;
    out.reserve(static_edge_count_);
    for (std::size_t a = 0; a < node_count_; ++a) {
      for (NodeId b : neighbors_[a]) {
        if (static_cast<NodeId>(a) < b) out.emplace_back(static_cast<NodeId>(a), b);
      }
    }
    return out;
  }

  // Label -> id lookup; throws if the label is unknown.
  NodeId find(const std::string& label) const {
    if (labels_.empty()) {
      std::size_t pos = 0;
      long long id = std::stoll(label, &pos);
      if (pos != label.size() || id < 0 || static_cast<std::size_t>(id) >= node_count_) {
        throw std::out_of_range("unknown node: " + label);
      }
      return static_cast<NodeId>(id);
    }
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw std::out_of_range("unknown node: " + label);
    return static_cast<NodeId>(it - labels_.begin());
  }

  // Largest edge time, or 0 for an empty network.
  double end_time() const noexcept { return edges_.empty() ? 0.0 : edges_.back().time; }

 private:
  std::size_t node_count_ = 0;
  bool directed_ = false;
  std::vector<TemporalEdge> edges_;
  std::vector<std::vector<NeighborEvent>> events_;
  std::vector<std::vector<NodeId>> neighbors_;
  std::vector<std::size_t> degrees_;
  std::size_t static_edge_count_ = 0;
  std::vector<std::string> labels_;
};

// Reads `src dst time` (or the SNAP signed layout `src dst weight time`)
// with whitespace or comma separators. `#` or `%` starts a comment line.
inline TemporalNetwork read_edge_list(std::istream& in, bool directed) {
  std::unordered_map<std::string, NodeId> ids;
  std::vector<std::string> labels;
  std::vector<TemporalEdge> edges;
  auto intern = [&](const std::string& tok) {
    auto [it, fresh] = ids.try_emplace(tok, static_cast<NodeId>(labels.size()));
    if (fresh) labels.push_back(tok);
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(std::move(t));
    if (tok.empty() || tok[0][0] == '#' || tok[0][0] == '%') continue;
    if (tok.size() != 3 && tok.size() != 4) {
      throw ParseError(lineno, "expected `source target time`, got " + std::to_string(tok.size()) +
                                   " fields");
    }
    const std::string& ts = tok.back();
    double time = 0.0;
    try {
      std::size_t pos = 0;
      time = std::stod(ts, &pos);
      if (pos != ts.size()) throw std::invalid_argument(ts);
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad timestamp '" + ts + "'");
    }
    if (!std::isfinite(time)) throw ParseError(lineno, "non-finite timestamp '" + ts + "'");
    if (tok[0] == tok[1]) continue;
    NodeId s = intern(tok[0]);
    NodeId d = intern(tok[1]);
    edges.push_back({s, d, time});
  }
  if (edges.empty()) throw std::runtime_error("edge list contains no edges");
  const std::size_t n = labels.size();
  return TemporalNetwork::from_edges(n, std::move(edges), directed, true, std::move(labels));
}

inline TemporalNetwork load_edge_list(const std::string& path, bool directed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  try {
    return read_edge_list(in, directed);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path);
  }
}

// The (at most H) latest events of u strictly before t, ascending in time.
inline std::vector<NeighborEvent> history(const TemporalNetwork& net, NodeId u, double t,
                                          std::size_t H) {
  const auto& ev = net.events(u);
  auto end = std::lower_bound(ev.begin(), ev.end(), t,
                              [](const NeighborEvent& e, double x) { return e.time < x; });
  auto count = static_cast<std::size_t>(end - ev.begin());
  auto begin = end - static_cast<std::ptrdiff_t>(std::min(count, H));
  return {begin, end};
}

// Degree^{3/4} noise distribution with rejection of u, v and u's static
// neighbors. Not thread-safe; use one per worker.
class NegativeSampler {
 public:
  static constexpr int kMaxAttempts = 1000;

  explicit NegativeSampler(const TemporalNetwork& net) {
    const auto& deg = net.degrees();
    probs_.resize(deg.size());
    double total = 0.0;
    for (std::size_t v = 0; v < deg.size(); ++v) {
      probs_[v] = std::pow(static_cast<double>(deg[v]), 0.75);
      total += probs_[v];
    }
    if (total <= 0.0) throw std::invalid_argument("negative sampler: network has no edges");
    cumulative_.resize(deg.size());
    double acc = 0.0;
    for (std::size_t v = 0; v < deg.size(); ++v) {
      probs_[v] /= total;
      acc += probs_[v];
      cumulative_[v] = acc;
    }
    cumulative_.back() = 1.0;
  }

  const std::vector<double>& probabilities() const noexcept { return probs_; }

  NodeId draw(Rng& rng) const {
    const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
    auto idx = static_cast<std::size_t>(it - cumulative_.begin());
    if (idx >= cumulative_.size()) idx = cumulative_.size() - 1;
    // Zero-mass nodes share a cumulative value with their predecessor and
    // are never the first index above r.
    return static_cast<NodeId>(idx);
  }

 private:
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

inline std::vector<NodeId> sample_negatives(const NegativeSampler& s, const TemporalNetwork& net,
                                            NodeId u, NodeId v, std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("sample_negatives: N must be >= 1");
  std::vector<NodeId> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    int attempt = 0;
    for (;; ++attempt) {
      if (attempt >= NegativeSampler::kMaxAttempts) {
        throw std::runtime_error(
            "negative sampling: rejection cap exceeded for node " + std::to_string(u) +
            "; the graph is too dense for this many negatives, use a smaller N");
      }
      NodeId c = s.draw(rng);
      if (c == u || c == v || net.has_static_edge(u, c)) continue;
      out.push_back(c);
      break;
    }
  }
  return out;
}

struct MaskedSplit {
  TemporalNetwork train;
  std::vector<NodePair> positives;
  std::vector<NodePair> negatives;
};

// Removes `count` static pairs (every temporal occurrence, both directions)
// and draws an equal number of non-edges uniformly.
inline MaskedSplit mask_static_edges(const TemporalNetwork& net, std::size_t count, Rng& rng) {
  if (count > net.static_edge_count()) {
    throw std::invalid_argument("mask_static_edges: count " + std::to_string(count) +
                                " exceeds the " + std::to_string(net.static_edge_count()) +
                                " static edges");
  }
  const std::size_t n = net.node_count();
  const std::size_t all_pairs = n * (n - 1) / 2;
  if (count > all_pairs - net.static_edge_count()) {
    throw std::invalid_argument("mask_static_edges: not enough non-edges for negatives");
  }

  MaskedSplit out;
  auto pairs = net.static_pairs();
  std::shuffle(pairs.begin(), pairs.end(), rng);
  pairs.resize(count);
  std::sort(pairs.begin(), pairs.end());
  out.positives = pairs;

  std::unordered_set<std::uint64_t> masked;
  for (auto [a, b] : pairs) masked.insert(detail::pair_key(a, b));

  std::unordered_set<std::uint64_t> chosen;
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n) - 1);
  while (out.negatives.size() < count) {
    NodeId a = pick(rng);
    NodeId b = pick(rng);
    if (a == b || net.has_static_edge(a, b)) continue;
    if (!chosen.insert(detail::pair_key(a, b)).second) continue;
    out.negatives.emplace_back(std::min(a, b), std::max(a, b));
  }

  std::vector<TemporalEdge> kept;
  kept.reserve(net.edges().size());
  for (const auto& e : net.edges()) {
    if (!masked.count(detail::pair_key(e.source, e.target))) kept.push_back(e);
  }
  out.train = TemporalNetwork::from_edges(n, std::move(kept), net.directed(), false, net.labels());
  return out;
}

}  // namespace mhne
