// Closed-form pieces of the mixture-of-Hawkes intensity: similarity, decay
// kernel, history attention, aspect contexts, Gumbel-Softmax aspect
// distributions and the per-aspect / mixed (pre-exponential) intensities.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "mhne/params.hpp"
#include "mhne/temporal_graph.hpp"

namespace mhne {

inline constexpr double kLeakySlope = 0.2;

struct AspectDistribution {
  std::vector<double> weights;

  std::size_t size() const noexcept { return weights.size(); }
  double operator[](std::size_t k) const { return weights[k]; }
};

// Negative squared Euclidean distance.
inline double similarity(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("similarity: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return -s;
}

inline double kernel(double delta, double dt) {
  if (dt < 0.0) throw std::invalid_argument("kernel: history event after query time");
  return std::exp(-delta * dt);
}

inline double leaky_relu(double x) noexcept { return x > 0.0 ? x : kLeakySlope * x; }

inline double gumbel(Rng& rng) {
  std::uniform_real_distribution<double> uni(std::numeric_limits<double>::min(), 1.0);
  return -std::log(-std::log(uni(rng)));
}

namespace detail {

inline void softmax_inplace(std::vector<double>& x) {
  const double mx = *std::max_element(x.begin(), x.end());
  double z = 0.0;
  for (auto& v : x) {
    v = std::exp(v - mx);
    z += v;
  }
  for (auto& v : x) v /= z;
}

// a1 . (W I_u) + a2 . (W I_h), before the LeakyReLU.
inline double attention_logit(const ModelParams& p, std::span<const double> wu, NodeId h) {
  const std::size_t m = p.m();
  auto ih = p.I(h);
  double s = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    double wh = 0.0;
    for (std::size_t c = 0; c < m; ++c) wh += p.W[r * m + c] * ih[c];
    s += p.a_vec[r] * wu[r] + p.a_vec[m + r] * wh;
  }
  return s;
}

inline std::vector<double> project(const ModelParams& p, NodeId u) {
  const std::size_t m = p.m();
  auto iu = p.I(u);
  std::vector<double> out(m, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) out[r] += p.W[r * m + c] * iu[c];
  }
  return out;
}

}  // namespace detail

// Softmax over the history of LeakyReLU(a^T [W I_u || W I_h]). All ones when
// attention is disabled.
inline std::vector<double> attention(const ModelParams& p, NodeId u,
                                     const std::vector<NeighborEvent>& hist) {
  if (!p.hyper.use_attention) return std::vector<double>(hist.size(), 1.0);
  if (hist.empty()) return {};
  const auto wu = detail::project(p, u);
  std::vector<double> s(hist.size());
  for (std::size_t j = 0; j < hist.size(); ++j) {
    s[j] = leaky_relu(detail::attention_logit(p, wu, hist[j].neighbor));
  }
  detail::softmax_inplace(s);
  return s;
}

inline std::vector<double> context(const ModelParams& p, NodeId u, double t,
                                   const std::vector<NeighborEvent>& hist, std::size_t k) {
  if (k >= p.K()) throw std::out_of_range("context: aspect index out of range");
  auto au = p.A(u, k);
  std::vector<double> c(au.begin(), au.end());
  if (hist.empty()) return c;
  const double delta = p.decay(u);
  const double inv = 1.0 / static_cast<double>(hist.size());
  std::vector<double> acc(p.m(), 0.0);
  for (const auto& e : hist) {
    const double j = kernel(delta, t - e.time);
    auto ah = p.A(e.neighbor, k);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += j * ah[i];
  }
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (acc[i] * inv + c[i]);
  return c;
}

// Contexts for every aspect, flattened K x m.
inline std::vector<double> contexts(const ModelParams& p, NodeId u, double t,
                                    const std::vector<NeighborEvent>& hist) {
  std::vector<double> out;
  out.reserve(p.K() * p.m());
  for (std::size_t k = 0; k < p.K(); ++k) {
    auto c = context(p, u, t, hist, k);
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

// softmax_k((F(I_n, C^k) + g_k) / tau_n) with explicit noise (empty = none).
// Without Gumbel the temperature is pinned to 1 and the noise is ignored.
inline AspectDistribution aspect_distribution(const ModelParams& p, NodeId n,
                                              std::span<const double> ctx,
                                              std::span<const double> noise) {
  const std::size_t K = p.K(), m = p.m();
  if (ctx.size() != K * m) throw std::invalid_argument("aspect_distribution: bad context size");
  const bool gumbel_on = p.hyper.use_gumbel;
  const double tau = gumbel_on ? p.temperature(n) : 1.0;
  std::vector<double> logits(K);
  for (std::size_t k = 0; k < K; ++k) {
    double g = (gumbel_on && !noise.empty()) ? noise[k] : 0.0;
    logits[k] = (similarity(p.I(n), ctx.subspan(k * m, m)) + g) / tau;
  }
  detail::softmax_inplace(logits);
  return {std::move(logits)};
}

inline AspectDistribution aspect_distribution(const ModelParams& p, NodeId n,
                                              std::span<const double> ctx, Rng& rng,
                                              bool stochastic) {
  if (!stochastic || !p.hyper.use_gumbel) return aspect_distribution(p, n, ctx, {});
  std::vector<double> g(p.K());
  for (auto& x : g) x = gumbel(rng);
  return aspect_distribution(p, n, ctx, g);
}

// Everything about u's window at time t that does not depend on the target.
struct EdgeContext {
  NodeId source = 0;
  NodeId target = 0;
  double time = 0.0;
  std::vector<NeighborEvent> history;
  std::vector<double> kernels;    // J(t - t_h), aligned with history
  std::vector<double> attention;  // aligned with history
  std::vector<double> contexts;   // K x m
  AspectDistribution source_pi;
  std::vector<AspectDistribution> history_pi;
};

// `noise` holds (|history| + 1) x K Gumbel draws, history rows first and the
// source last; pass an empty span for the deterministic distribution.
inline EdgeContext build_edge_context(const ModelParams& p, NodeId u, NodeId v, double t,
                                      std::vector<NeighborEvent> hist,
                                      std::span<const double> noise = {}) {
  const std::size_t K = p.K();
  if (!noise.empty() && noise.size() != (hist.size() + 1) * K) {
    throw std::invalid_argument("build_edge_context: noise has wrong size");
  }
  EdgeContext ctx;
  ctx.source = u;
  ctx.target = v;
  ctx.time = t;
  ctx.history = std::move(hist);
  const double delta = p.decay(u);
  ctx.kernels.reserve(ctx.history.size());
  for (const auto& e : ctx.history) ctx.kernels.push_back(kernel(delta, t - e.time));
  ctx.attention = attention(p, u, ctx.history);
  ctx.contexts = contexts(p, u, t, ctx.history);
  auto row = [&](std::size_t r) {
    return noise.empty() ? std::span<const double>{} : noise.subspan(r * K, K);
  };
  ctx.history_pi.reserve(ctx.history.size());
  for (std::size_t j = 0; j < ctx.history.size(); ++j) {
    ctx.history_pi.push_back(aspect_distribution(p, ctx.history[j].neighbor, ctx.contexts, row(j)));
  }
  ctx.source_pi = aspect_distribution(p, u, ctx.contexts, row(ctx.history.size()));
  return ctx;
}

// mu_{u,v} gamma^k_{u,v} + sum_h pi_h^k attn_{u,h} F(I_h, I_v) gamma^k_{h,v} J(t - t_h)
inline double aspect_intensity(const ModelParams& p, const EdgeContext& ctx, std::size_t k) {
  const NodeId u = ctx.source, v = ctx.target;
  const double base = similarity(p.I(u), p.I(v)) * -similarity(p.A(u, k), p.A(v, k));
  double excite = 0.0;
  for (std::size_t j = 0; j < ctx.history.size(); ++j) {
    const NodeId h = ctx.history[j].neighbor;
    const double alpha = ctx.attention[j] * similarity(p.I(h), p.I(v));
    const double gamma = -similarity(p.A(h, k), p.A(v, k));
    excite += ctx.history_pi[j][k] * alpha * gamma * ctx.kernels[j];
  }
  return base + excite;
}

// Raw mixture sum_k pi_u^k lambda^k; exp() of this is the rate.
inline double mixed_intensity(const ModelParams& p, const EdgeContext& ctx) {
  double lam = 0.0;
  for (std::size_t k = 0; k < p.K(); ++k) lam += ctx.source_pi[k] * aspect_intensity(p, ctx, k);
  return lam;
}

// Deterministic intensity of u -> v at time t using u's latest H events.
inline double score(const ModelParams& p, const TemporalNetwork& net, NodeId u, NodeId v, double t) {
  return mixed_intensity(p, build_edge_context(p, u, v, t, history(net, u, t, p.hyper.history)));
}

}  // namespace mhne
