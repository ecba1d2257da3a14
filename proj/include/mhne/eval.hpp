// Downstream evaluation: link prediction with a logistic probe, temporal
// node recommendation and single-slice embedding probes.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mhne/intensity.hpp"
#include "mhne/params.hpp"
#include "mhne/temporal_graph.hpp"

namespace mhne {

struct EvalReport {
  std::string task;
  std::map<std::string, double> metrics;
  std::map<std::string, double> config;
  std::uint64_t seed = 0;
};

inline std::vector<double> edge_feature(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("edge_feature: length mismatch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::abs(x[i] - y[i]);
  return out;
}

using FeatureMatrix = std::vector<std::vector<double>>;

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::size_t iterations = 0;
};

struct LogisticOptions {
  double l2 = 1e-4;
  std::size_t max_iter = 500;
  double tol = 1e-8;
};

namespace detail {

inline double log1pexp(double z) noexcept { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline double logistic_objective(const FeatureMatrix& X, const std::vector<int>& y,
                                 const std::vector<double>& w, double b, double l2) {
  double loss = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    double z = b;
    for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * X[i][j];
    loss += log1pexp(z) - (y[i] ? z : 0.0);
  }
  loss /= static_cast<double>(X.size());
  double reg = 0.0;
  for (double v : w) reg += v * v;
  return loss + 0.5 * l2 * reg;
}

}  // namespace detail

// Mean log-loss + (l2/2)|w|^2 (bias unpenalized).
inline double logistic_loss(const FeatureMatrix& X, const std::vector<int>& y, const LogisticModel& model,
                            double l2) {
  return detail::logistic_objective(X, y, model.weights, model.bias, l2);
}

// Gradient descent with Armijo backtracking.
inline LogisticModel logistic_fit(const FeatureMatrix& X, const std::vector<int>& y,
                                  const LogisticOptions& opt = {}) {
  if (X.empty() || X.size() != y.size()) throw std::invalid_argument("logistic_fit: bad input sizes");
  const std::size_t d = X.front().size();
  std::size_t pos = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw std::invalid_argument("logistic_fit: labels must be 0/1");
    pos += static_cast<std::size_t>(v);
  }
  if (pos == 0 || pos == y.size()) throw std::invalid_argument("logistic_fit: need both classes");

  const double n = static_cast<double>(X.size());
  LogisticModel model;
  model.weights.assign(d, 0.0);
  std::vector<double> gw(d);
  double step = 1.0;
  double f = detail::logistic_objective(X, y, model.weights, model.bias, opt.l2);
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      double z = model.bias;
      for (std::size_t j = 0; j < d; ++j) z += model.weights[j] * X[i][j];
      const double r = 1.0 / (1.0 + std::exp(-z)) - y[i];
      for (std::size_t j = 0; j < d; ++j) gw[j] += r * X[i][j];
      gb += r;
    }
    double gnorm2 = gb * gb / (n * n);
    for (std::size_t j = 0; j < d; ++j) {
      gw[j] = gw[j] / n + opt.l2 * model.weights[j];
      gnorm2 += gw[j] * gw[j];
    }
    gb /= n;
    model.iterations = it;
    if (std::sqrt(gnorm2) < opt.tol) break;

    step = std::min(step * 2.0, 1e6);
    std::vector<double> w_new(d);
    double b_new = 0.0, f_new = 0.0;
    while (true) {
      for (std::size_t j = 0; j < d; ++j) w_new[j] = model.weights[j] - step * gw[j];
      b_new = model.bias - step * gb;
      f_new = detail::logistic_objective(X, y, w_new, b_new, opt.l2);
      if (f_new <= f - 0.5 * step * gnorm2 || step < 1e-16) break;
      step *= 0.5;
    }
    if (step < 1e-16) break;
    model.weights = std::move(w_new);
    model.bias = b_new;
    f = f_new;
  }
  return model;
}

inline std::vector<double> logistic_predict(const LogisticModel& model, const FeatureMatrix& X) {
  std::vector<double> out;
  out.reserve(X.size());
  for (const auto& x : X) {
    double z = model.bias;
    for (std::size_t j = 0; j < model.weights.size(); ++j) z += model.weights[j] * x[j];
    out.push_back(1.0 / (1.0 + std::exp(-z)));
  }
  return out;
}

// Unweighted mean of the two per-class F1 scores; an empty class scores 0.
inline double macro_f1(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.empty() || y_true.size() != y_pred.size()) throw std::invalid_argument("macro_f1: bad input sizes");
  double total = 0.0;
  for (int c : {0, 1}) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
      const bool t = y_true[i] == c, p = y_pred[i] == c;
      tp += t && p;
      fp += !t && p;
      fn += t && !p;
    }
    const std::size_t denom = 2 * tp + fp + fn;
    total += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
  return total / 2.0;
}

// Mann-Whitney AUC with average ranks for ties.
inline double auc_roc(const std::vector<int>& y_true, const std::vector<double>& scores) {
  if (y_true.size() != scores.size()) throw std::invalid_argument("auc_roc: bad input sizes");
  const std::size_t n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  std::size_t npos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (y_true[idx[k]]) {
        pos_rank_sum += avg;
        ++npos;
      }
    }
    i = j;
  }
  const std::size_t nneg = n - npos;
  if (npos == 0 || nneg == 0) throw std::invalid_argument("auc_roc: need both classes");
  const double np = static_cast<double>(npos);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(nneg));
}

struct LabeledPairs {
  std::vector<NodePair> pairs;
  std::vector<int> labels;
};

inline LabeledPairs labeled_pairs(const std::vector<NodePair>& positives, const std::vector<NodePair>& negatives) {
  LabeledPairs out;
  for (const auto& p : positives) {
    out.pairs.push_back(p);
    out.labels.push_back(1);
  }
  for (const auto& p : negatives) {
    out.pairs.push_back(p);
    out.labels.push_back(0);
  }
  return out;
}

// Which part of the concatenated embedding feeds the probe.
struct EmbeddingSlice {
  enum class Kind { identity, aspect, concat } kind = Kind::concat;
  std::size_t aspect = 0;

  static EmbeddingSlice identity() { return {Kind::identity, 0}; }
  static EmbeddingSlice aspect_k(std::size_t k) { return {Kind::aspect, k}; }
  static EmbeddingSlice concat() { return {Kind::concat, 0}; }

  static EmbeddingSlice parse(const std::string& s) {
    if (s == "identity") return identity();
    if (s == "concat") return concat();
    if (s.rfind("aspect", 0) == 0) {
      std::size_t pos = 0;
      const std::string num = s.substr(6);
      const long k = num.empty() ? -1 : std::stol(num, &pos);
      if (k >= 1 && pos == num.size()) return aspect_k(static_cast<std::size_t>(k - 1));
    }
    throw std::invalid_argument("unknown embedding slice: " + s);
  }

  std::string name() const {
    switch (kind) {
      case Kind::identity: return "identity";
      case Kind::aspect: return "aspect" + std::to_string(aspect + 1);
      case Kind::concat: return "concat";
    }
    return "concat";
  }

  std::vector<double> extract(const ModelParams& p, NodeId u) const {
    switch (kind) {
      case Kind::identity: {
        auto s = p.I(u);
        return {s.begin(), s.end()};
      }
      case Kind::aspect: {
        if (aspect >= p.K()) throw std::out_of_range("embedding slice: aspect index out of range");
        auto s = p.A(u, aspect);
        return {s.begin(), s.end()};
      }
      case Kind::concat: return concat_embedding(p, u);
    }
    return {};
  }
};

namespace detail {

// Sort pairs canonically, then shuffle with `seed`: the split depends only
// on the pair set and the seed.
inline std::vector<std::size_t> split_order(const LabeledPairs& data, std::uint64_t seed) {
  std::vector<std::size_t> idx(data.pairs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
    return std::tie(data.labels[a], data.pairs[a]) < std::tie(data.labels[b], data.pairs[b]);
  });
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

// Per-column z-scoring with training statistics.
inline void standardize(FeatureMatrix& train, FeatureMatrix& test) {
  if (train.empty()) return;
  const std::size_t d = train.front().size();
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (const auto& r : train) mean += r[j];
    mean /= static_cast<double>(train.size());
    double var = 0.0;
    for (const auto& r : train) var += (r[j] - mean) * (r[j] - mean);
    var /= static_cast<double>(train.size());
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    for (auto& r : train) r[j] = (r[j] - mean) / sd;
    for (auto& r : test) r[j] = (r[j] - mean) / sd;
  }
}

}  // namespace detail

// Fit on the first half of a seeded shuffle, report macro-F1 and AUC on the
// rest.
inline EvalReport probe_pairs(const ModelParams& p, const LabeledPairs& data, const EmbeddingSlice& slice,
                              std::uint64_t seed, const LogisticOptions& opt = {}) {
  if (data.pairs.size() < 4) throw std::invalid_argument("link prediction: need at least 4 labeled pairs");
  const auto order = detail::split_order(data, seed);
  const std::size_t half = order.size() / 2;
  FeatureMatrix train_x, test_x;
  std::vector<int> train_y, test_y;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto [a, b] = data.pairs[order[i]];
    auto f = edge_feature(slice.extract(p, a), slice.extract(p, b));
    if (i < half) {
      train_x.push_back(std::move(f));
      train_y.push_back(data.labels[order[i]]);
    } else {
      test_x.push_back(std::move(f));
      test_y.push_back(data.labels[order[i]]);
    }
  }
  detail::standardize(train_x, test_x);
  const auto model = logistic_fit(train_x, train_y, opt);
  const auto prob = logistic_predict(model, test_x);
  std::vector<int> pred(prob.size());
  for (std::size_t i = 0; i < prob.size(); ++i) pred[i] = prob[i] >= 0.5 ? 1 : 0;

  EvalReport r;
  r.task = "link_prediction";
  r.seed = seed;
  r.metrics["macro_f1"] = macro_f1(test_y, pred);
  r.metrics["auc_roc"] = auc_roc(test_y, prob);
  r.config["dim"] = static_cast<double>(slice.extract(p, 0).size());
  r.config["K"] = static_cast<double>(p.K());
  r.config["H"] = static_cast<double>(p.hyper.history);
  r.config["m"] = static_cast<double>(p.m());
  r.config["pairs"] = static_cast<double>(data.pairs.size());
  return r;
}

inline EvalReport link_prediction(const ModelParams& p, const std::vector<NodePair>& positives,
                                  const std::vector<NodePair>& negatives, std::uint64_t seed) {
  auto r = probe_pairs(p, labeled_pairs(positives, negatives), EmbeddingSlice::concat(), seed);
  r.config["masked"] = static_cast<double>(positives.size());
  return r;
}

inline EvalReport aspect_probe(const ModelParams& p, const LabeledPairs& data, const EmbeddingSlice& slice,
                               std::uint64_t seed) {
  auto r = probe_pairs(p, data, slice, seed);
  r.task = "aspect_probe:" + slice.name();
  return r;
}

struct Recommendation {
  NodeId node = 0;
  double score = 0.0;
};

// Top-k non-neighbors of u by deterministic intensity at time t.
inline std::vector<Recommendation> recommend(const ModelParams& p, const TemporalNetwork& net, NodeId u,
                                             double t, std::size_t k) {
  if (k == 0) throw std::invalid_argument("recommend: k must be >= 1");
  if (u < 0 || static_cast<std::size_t>(u) >= net.node_count()) throw std::out_of_range("recommend: bad node");
  auto ctx = build_edge_context(p, u, u, t, history(net, u, t, p.hyper.history));
  std::vector<Recommendation> cands;
  for (std::size_t v = 0; v < net.node_count(); ++v) {
    const auto id = static_cast<NodeId>(v);
    if (id == u || net.has_static_edge(u, id)) continue;
    ctx.target = id;
    cands.push_back({id, mixed_intensity(p, ctx)});
  }
  auto better = [](const Recommendation& a, const Recommendation& b) {
    return a.score != b.score ? a.score > b.score : a.node < b.node;
  };
  const std::size_t take = std::min(k, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(take), cands.end(), better);
  cands.resize(take);
  return cands;
}

inline std::pair<double, double> precision_recall_at_k(const std::vector<NodeId>& ranked,
                                                       const std::vector<NodeId>& truth, std::size_t k) {
  if (k == 0) throw std::invalid_argument("precision_recall_at_k: k must be >= 1");
  if (truth.empty()) throw std::invalid_argument("precision_recall_at_k: empty ground truth");
  std::vector<NodeId> t(truth);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  std::size_t hits = 0;
  const std::size_t n = std::min(k, ranked.size());
  for (std::size_t i = 0; i < n; ++i) hits += std::binary_search(t.begin(), t.end(), ranked[i]);
  return {static_cast<double>(hits) / static_cast<double>(k),
          static_cast<double>(hits) / static_cast<double>(t.size())};
}

}  // namespace mhne
