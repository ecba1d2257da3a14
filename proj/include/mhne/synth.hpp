// Planted multi-aspect temporal networks simulated by Ogata thinning.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mhne/intensity.hpp"
#include "mhne/params.hpp"
#include "mhne/temporal_graph.hpp"

namespace mhne {

struct PlantedSpec {
  std::size_t aspects = 2;
  std::size_t nodes_per_aspect = 50;
  double mu0 = 1.0;
  double alpha0 = 0.3;
  double delta0 = 1.0;
  double horizon = 20.0;
  double cross_aspect_prob = 0.05;
  bool directed = false;

  std::size_t node_count() const noexcept { return aspects * nodes_per_aspect; }

  void validate() const {
    if (aspects < 1 || nodes_per_aspect < 1) throw std::invalid_argument("planted spec: empty node set");
    if (!(mu0 > 0.0)) throw std::invalid_argument("planted spec: mu0 must be > 0");
    if (alpha0 < 0.0 || !(delta0 > 0.0)) throw std::invalid_argument("planted spec: need alpha0 >= 0, delta0 > 0");
    if (!(alpha0 / delta0 < 1.0)) {
      throw std::invalid_argument("planted spec: alpha0/delta0 must be < 1 (subcritical)");
    }
    if (!(cross_aspect_prob >= 0.0 && cross_aspect_prob < 0.5)) {
      throw std::invalid_argument("planted spec: cross_aspect_prob must be in [0, 0.5)");
    }
    if (horizon < 0.0) throw std::invalid_argument("planted spec: negative horizon");
    if (nodes_per_aspect < 2) throw std::invalid_argument("planted spec: need >= 2 nodes per aspect");
  }
};

struct PlantedEvent {
  TemporalEdge edge;  // raw (unnormalized) time
  std::size_t aspect = 0;
};

struct PlantedTruth {
  std::vector<std::size_t> labels;  // 0-based aspect per node
  std::vector<PlantedEvent> events;
};

struct PlantedNetwork {
  TemporalNetwork network;
  PlantedTruth truth;
};

// Event times of one self-exciting stream on [0, horizon].
inline std::vector<double> simulate_hawkes(double mu, double alpha, double delta, double horizon,
                                           Rng& rng) {
  std::vector<double> times;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double t = 0.0;
  double excite = 0.0;  // sum alpha exp(-delta (t - t_i)) at current t
  while (true) {
    // Intensity decays between events, so its value at t dominates.
    const double bound = mu + excite;
    const double w = -std::log1p(-uni(rng)) / bound;
    excite *= std::exp(-delta * w);
    t += w;
    if (t > horizon) break;
    const double lam = mu + excite;
    if (uni(rng) * bound <= lam) {
      times.push_back(t);
      excite += alpha;
    }
  }
  return times;
}

inline PlantedNetwork generate(const PlantedSpec& spec, Rng& rng) {
  spec.validate();
  const std::size_t K = spec.aspects, per = spec.nodes_per_aspect, n = spec.node_count();
  PlantedNetwork out;
  out.truth.labels.resize(n);
  for (std::size_t u = 0; u < n; ++u) out.truth.labels[u] = u / per;

  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<TemporalEdge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    const std::size_t group = out.truth.labels[u];
    for (double t : simulate_hawkes(spec.mu0, spec.alpha0, spec.delta0, spec.horizon, rng)) {
      const bool cross = K > 1 && uni(rng) < spec.cross_aspect_prob;
      NodeId v;
      if (cross) {
        std::uniform_int_distribution<std::size_t> pick(0, n - per - 1);
        std::size_t idx = pick(rng);
        if (idx >= group * per) idx += per;
        v = static_cast<NodeId>(idx);
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, per - 2);
        std::size_t idx = group * per + pick(rng);
        if (idx >= u) ++idx;
        v = static_cast<NodeId>(idx);
      }
      edges.push_back({static_cast<NodeId>(u), v, t});
      out.truth.events.push_back({edges.back(), group});
    }
  }

  // Order globally by time and push equal timestamps apart.
  std::vector<std::size_t> idx(edges.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return edges[a].time < edges[b].time; });
  std::vector<PlantedEvent> sorted;
  sorted.reserve(idx.size());
  for (auto i : idx) sorted.push_back(out.truth.events[i]);
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    auto& prev = sorted[i - 1].edge.time;
    auto& cur = sorted[i].edge.time;
    if (cur <= prev) cur = prev + 1e-9;
  }
  out.truth.events = std::move(sorted);
  edges.clear();
  for (const auto& e : out.truth.events) edges.push_back(e.edge);

  out.network = TemporalNetwork::from_edges(n, std::move(edges), spec.directed, true);
  return out;
}

// Best agreement over all relabelings of the predicted aspects.
inline double recovery_score(const std::vector<std::size_t>& predicted, const PlantedTruth& truth,
                             std::size_t K) {
  if (K > 6) throw std::invalid_argument("recovery_score: K > 6 needs an assignment solver");
  if (predicted.size() != truth.labels.size()) throw std::invalid_argument("recovery_score: size mismatch");
  if (predicted.empty()) throw std::invalid_argument("recovery_score: empty labeling");
  // confusion[p][t]
  std::vector<std::size_t> confusion(K * K, 0);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] >= K || truth.labels[i] >= K) throw std::out_of_range("recovery_score: label >= K");
    ++confusion[predicted[i] * K + truth.labels[i]];
  }
  std::vector<std::size_t> perm(K);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::size_t best = 0;
  do {
    std::size_t agree = 0;
    for (std::size_t p = 0; p < K; ++p) agree += confusion[p * K + perm[p]];
    best = std::max(best, agree);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(predicted.size());
}

// argmax_k of a node's deterministic pi_u^k averaged over its events; nodes
// without events use their empty-history distribution.
inline std::vector<std::size_t> predicted_aspects(const ModelParams& p, const TemporalNetwork& net) {
  std::vector<std::size_t> out(net.node_count());
  for (std::size_t u = 0; u < net.node_count(); ++u) {
    const auto id = static_cast<NodeId>(u);
    std::vector<double> avg(p.K(), 0.0);
    const auto& ev = net.events(id);
    if (ev.empty()) {
      avg = build_edge_context(p, id, id, 0.0, {}).source_pi.weights;
    } else {
      for (const auto& e : ev) {
        auto ctx = build_edge_context(p, id, e.neighbor, e.time, history(net, id, e.time, p.hyper.history));
        for (std::size_t k = 0; k < p.K(); ++k) avg[k] += ctx.source_pi[k];
      }
    }
    out[u] = static_cast<std::size_t>(std::max_element(avg.begin(), avg.end()) - avg.begin());
  }
  return out;
}

}  // namespace mhne
