// Negative-sampling objective, its exact gradient, and the Adam training loop.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "mhne/intensity.hpp"
#include "mhne/params.hpp"
#include "mhne/temporal_graph.hpp"

namespace mhne {

struct LossSample {
  TemporalEdge edge;
  std::vector<NeighborEvent> history;
  std::vector<NodeId> negatives;
  std::vector<double> gumbel;  // (|history| + 1) x K, empty for deterministic
};

inline double softplus(double x) noexcept {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline LossSample make_sample(const TemporalNetwork& net, const NegativeSampler& sampler,
                              const HyperParams& hyper, const TemporalEdge& edge, Rng& rng) {
  LossSample s;
  s.edge = edge;
  s.history = history(net, edge.source, edge.time, hyper.history);
  s.negatives = sample_negatives(sampler, net, edge.source, edge.target, hyper.negatives, rng);
  if (hyper.use_gumbel) {
    s.gumbel.resize((s.history.size() + 1) * hyper.aspects);
    for (auto& g : s.gumbel) g = gumbel(rng);
  }
  return s;
}

namespace detail {

inline void check_finite(double lam) {
  if (!std::isfinite(lam)) {
    throw std::runtime_error("non-finite intensity; parameters have diverged");
  }
}

}  // namespace detail

// -log sigma(lam_pos) - sum_i log sigma(-lam_neg_i)
inline double sample_loss(const ModelParams& p, const LossSample& s) {
  auto ctx = build_edge_context(p, s.edge.source, s.edge.target, s.edge.time, s.history, s.gumbel);
  double lam = mixed_intensity(p, ctx);
  detail::check_finite(lam);
  double loss = softplus(-lam);
  for (NodeId n : s.negatives) {
    ctx.target = n;
    lam = mixed_intensity(p, ctx);
    detail::check_finite(lam);
    loss += softplus(lam);
  }
  return loss;
}

// Sparse gradient: per-node rows for touched nodes, dense W and a_vec.
class GradientSet {
 public:
  GradientSet() = default;
  GradientSet(std::size_t m, std::size_t K) : m_(m), K_(K), W_(m * m, 0.0), a_(2 * m, 0.0) {}

  std::size_t m() const noexcept { return m_; }
  std::size_t K() const noexcept { return K_; }
  const std::vector<NodeId>& nodes() const noexcept { return nodes_; }
  bool touches(NodeId u) const { return slot_.count(u) != 0; }

  // Row handles stay valid only until another node is first touched.
  std::span<double> I(NodeId u) {
    const std::size_t s = slot(u);
    return {identity_.data() + s * m_, m_};
  }
  std::span<double> A(NodeId u, std::size_t k) {
    const std::size_t s = slot(u);
    return {aspect_.data() + (s * K_ + k) * m_, m_};
  }
  double& rho(NodeId u) {
    const std::size_t s = slot(u);
    return rho_[s];
  }
  double& theta(NodeId u) {
    const std::size_t s = slot(u);
    return theta_[s];
  }
  std::vector<double>& W() noexcept { return W_; }
  std::vector<double>& a_vec() noexcept { return a_; }
  const std::vector<double>& W() const noexcept { return W_; }
  const std::vector<double>& a_vec() const noexcept { return a_; }

  // Read access; untouched nodes read as zero.
  double I_at(NodeId u, std::size_t i) const { return get(identity_, u, m_, i); }
  double A_at(NodeId u, std::size_t k, std::size_t i) const {
    return get(aspect_, u, K_ * m_, k * m_ + i);
  }
  double rho_at(NodeId u) const { return get(rho_, u, 1, 0); }
  double theta_at(NodeId u) const { return get(theta_, u, 1, 0); }

  void add(const GradientSet& o) {
    for (std::size_t s = 0; s < o.nodes_.size(); ++s) {
      const NodeId u = o.nodes_[s];
      const std::size_t d = slot(u);
      for (std::size_t i = 0; i < m_; ++i) identity_[d * m_ + i] += o.identity_[s * m_ + i];
      for (std::size_t i = 0; i < K_ * m_; ++i) aspect_[d * K_ * m_ + i] += o.aspect_[s * K_ * m_ + i];
      rho_[d] += o.rho_[s];
      theta_[d] += o.theta_[s];
    }
    for (std::size_t i = 0; i < W_.size(); ++i) W_[i] += o.W_[i];
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  }

  void scale(double c) {
    for (auto* v : {&identity_, &aspect_, &rho_, &theta_, &W_, &a_}) {
      for (auto& x : *v) x *= c;
    }
  }

  double squared_norm() const {
    double s = 0.0;
    for (const auto* v : {&identity_, &aspect_, &rho_, &theta_, &W_, &a_}) {
      for (double x : *v) s += x * x;
    }
    return s;
  }

  std::size_t slot_of(NodeId u) const { return slot_.at(u); }
  std::span<const double> I_row(std::size_t s) const { return {identity_.data() + s * m_, m_}; }
  std::span<const double> A_rows(std::size_t s) const {
    return {aspect_.data() + s * K_ * m_, K_ * m_};
  }
  double rho_row(std::size_t s) const { return rho_[s]; }
  double theta_row(std::size_t s) const { return theta_[s]; }

 private:
  std::size_t slot(NodeId u) {
    auto [it, fresh] = slot_.try_emplace(u, nodes_.size());
    if (fresh) {
      nodes_.push_back(u);
      identity_.resize(identity_.size() + m_, 0.0);
      aspect_.resize(aspect_.size() + K_ * m_, 0.0);
      rho_.push_back(0.0);
      theta_.push_back(0.0);
    }
    return it->second;
  }

  double get(const std::vector<double>& v, NodeId u, std::size_t stride, std::size_t off) const {
    auto it = slot_.find(u);
    return it == slot_.end() ? 0.0 : v[it->second * stride + off];
  }

  std::size_t m_ = 0, K_ = 0;
  std::vector<NodeId> nodes_;
  std::unordered_map<NodeId, std::size_t> slot_;
  std::vector<double> identity_, aspect_, rho_, theta_;
  std::vector<double> W_, a_;
};

namespace detail {

inline double sqdist(std::span<const double> x, std::span<const double> y) { return -similarity(x, y); }

// out += c * (x - y)
inline void axpy_diff(std::span<double> out, double c, std::span<const double> x,
                      std::span<const double> y) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * (x[i] - y[i]);
}

// Backward through pi = softmax((S + g) / tau) with S_k = -|I_n - C^k|^2.
inline void backprop_aspect_distribution(const ModelParams& p, NodeId n, const AspectDistribution& pi,
                                         std::span<const double> dpi, std::span<const double> ctx,
                                         std::span<const double> noise, std::vector<double>& dctx,
                                         GradientSet& g) {
  const std::size_t K = p.K(), m = p.m();
  const bool gumbel_on = p.hyper.use_gumbel;
  const double tau = gumbel_on ? p.temperature(n) : 1.0;
  double dot = 0.0;
  for (std::size_t k = 0; k < K; ++k) dot += pi[k] * dpi[k];
  auto in = p.I(n);
  double dtau = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double dlogit = pi[k] * (dpi[k] - dot);
    auto ck = ctx.subspan(k * m, m);
    if (gumbel_on) {
      const double gk = noise.empty() ? 0.0 : noise[k];
      const double sk = similarity(in, ck);
      dtau -= dlogit * (sk + gk) / (tau * tau);
    }
    const double ds = dlogit / tau;
    axpy_diff(g.I(n), -2.0 * ds, in, ck);
    for (std::size_t i = 0; i < m; ++i) dctx[k * m + i] += 2.0 * ds * (in[i] - ck[i]);
  }
  if (gumbel_on) g.theta(n) += dtau * positive_derivative(p.theta[n]);
}

}  // namespace detail

// Exact gradient of sample_loss with the sample's Gumbel draws held fixed.
inline GradientSet gradients(const ModelParams& p, const LossSample& s, double* loss_out = nullptr) {
  const std::size_t K = p.K(), m = p.m();
  const NodeId u = s.edge.source;
  const double t = s.edge.time;
  const auto ctx = build_edge_context(p, u, s.edge.target, t, s.history, s.gumbel);
  const std::size_t L = ctx.history.size();

  GradientSet g(m, K);
  std::vector<double> dpi_u(K, 0.0), dpi_h(L * K, 0.0), dattn(L, 0.0), dkern(L, 0.0);
  std::vector<double> dctx(K * m, 0.0);
  std::vector<double> lam_k(K), f_hx(L), df_hx(L);
  double loss = 0.0;

  auto target_pass = [&](NodeId x, bool positive_target) {
    const double mu = similarity(p.I(u), p.I(x));
    for (std::size_t j = 0; j < L; ++j) f_hx[j] = similarity(p.I(ctx.history[j].neighbor), p.I(x));
    double lam = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      double v = mu * detail::sqdist(p.A(u, k), p.A(x, k));
      for (std::size_t j = 0; j < L; ++j) {
        const NodeId h = ctx.history[j].neighbor;
        v += ctx.history_pi[j][k] * ctx.attention[j] * f_hx[j] * detail::sqdist(p.A(h, k), p.A(x, k)) *
             ctx.kernels[j];
      }
      lam_k[k] = v;
      lam += ctx.source_pi[k] * v;
    }
    detail::check_finite(lam);
    double glam;
    if (positive_target) {
      loss += softplus(-lam);
      glam = -sigmoid(-lam);
    } else {
      loss += softplus(lam);
      glam = sigmoid(lam);
    }

    double dmu = 0.0;
    std::fill(df_hx.begin(), df_hx.end(), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      dpi_u[k] += glam * lam_k[k];
      const double dl = glam * ctx.source_pi[k];
      const double gam_ux = detail::sqdist(p.A(u, k), p.A(x, k));
      dmu += dl * gam_ux;
      const double dgam_ux = dl * mu;
      detail::axpy_diff(g.A(u, k), 2.0 * dgam_ux, p.A(u, k), p.A(x, k));
      detail::axpy_diff(g.A(x, k), -2.0 * dgam_ux, p.A(u, k), p.A(x, k));
      for (std::size_t j = 0; j < L; ++j) {
        const NodeId h = ctx.history[j].neighbor;
        const double pi = ctx.history_pi[j][k];
        const double at = ctx.attention[j];
        const double J = ctx.kernels[j];
        const double gam = detail::sqdist(p.A(h, k), p.A(x, k));
        const double f = f_hx[j];
        dpi_h[j * K + k] += dl * at * f * gam * J;
        dattn[j] += dl * pi * f * gam * J;
        df_hx[j] += dl * pi * at * gam * J;
        dkern[j] += dl * pi * at * f * gam;
        const double dgam = dl * pi * at * f * J;
        detail::axpy_diff(g.A(h, k), 2.0 * dgam, p.A(h, k), p.A(x, k));
        detail::axpy_diff(g.A(x, k), -2.0 * dgam, p.A(h, k), p.A(x, k));
      }
    }
    detail::axpy_diff(g.I(u), -2.0 * dmu, p.I(u), p.I(x));
    detail::axpy_diff(g.I(x), 2.0 * dmu, p.I(u), p.I(x));
    for (std::size_t j = 0; j < L; ++j) {
      const NodeId h = ctx.history[j].neighbor;
      detail::axpy_diff(g.I(h), -2.0 * df_hx[j], p.I(h), p.I(x));
      detail::axpy_diff(g.I(x), 2.0 * df_hx[j], p.I(h), p.I(x));
    }
  };

  target_pass(s.edge.target, true);
  for (NodeId n : s.negatives) target_pass(n, false);

  // Aspect distributions of the history nodes and of the source.
  const std::span<const double> noise(s.gumbel);
  auto noise_row = [&](std::size_t r) {
    return noise.empty() ? std::span<const double>{} : noise.subspan(r * K, K);
  };
  for (std::size_t j = 0; j < L; ++j) {
    detail::backprop_aspect_distribution(p, ctx.history[j].neighbor, ctx.history_pi[j],
                                         std::span<const double>(dpi_h).subspan(j * K, K), ctx.contexts,
                                         noise_row(j), dctx, g);
  }
  detail::backprop_aspect_distribution(p, u, ctx.source_pi, dpi_u, ctx.contexts, noise_row(L), dctx, g);

  // Contexts.
  for (std::size_t k = 0; k < K; ++k) {
    std::span<const double> dck(dctx.data() + k * m, m);
    auto gau = g.A(u, k);
    if (L == 0) {
      for (std::size_t i = 0; i < m; ++i) gau[i] += dck[i];
      continue;
    }
    for (std::size_t i = 0; i < m; ++i) gau[i] += 0.5 * dck[i];
    const double inv = 1.0 / static_cast<double>(L);
    for (std::size_t j = 0; j < L; ++j) {
      const NodeId h = ctx.history[j].neighbor;
      auto ah = p.A(h, k);
      auto gah = g.A(h, k);
      double dot = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        gah[i] += 0.5 * inv * ctx.kernels[j] * dck[i];
        dot += dck[i] * ah[i];
      }
      dkern[j] += 0.5 * inv * dot;
    }
  }

  // Kernels -> decay of the source.
  if (L > 0) {
    double ddelta = 0.0;
    for (std::size_t j = 0; j < L; ++j) ddelta -= dkern[j] * (t - ctx.history[j].time) * ctx.kernels[j];
    g.rho(u) += ddelta * positive_derivative(p.rho[u]);
  }

  // Attention.
  if (p.hyper.use_attention && L > 0) {
    const auto wu = detail::project(p, u);
    auto iu = p.I(u);
    double dot = 0.0;
    for (std::size_t j = 0; j < L; ++j) dot += ctx.attention[j] * dattn[j];
    std::vector<double> dz_u(m, 0.0);
    auto& dW = g.W();
    auto& da = g.a_vec();
    for (std::size_t j = 0; j < L; ++j) {
      const NodeId h = ctx.history[j].neighbor;
      const double e = detail::attention_logit(p, wu, h);
      const double de = ctx.attention[j] * (dattn[j] - dot) * (e > 0.0 ? 1.0 : kLeakySlope);
      if (de == 0.0) continue;
      const auto wh = detail::project(p, h);
      auto ih = p.I(h);
      auto gih = g.I(h);
      for (std::size_t r = 0; r < m; ++r) {
        da[r] += de * wu[r];
        da[m + r] += de * wh[r];
        dz_u[r] += de * p.a_vec[r];
        const double dzh = de * p.a_vec[m + r];
        for (std::size_t c = 0; c < m; ++c) {
          dW[r * m + c] += dzh * ih[c];
          gih[c] += p.W[r * m + c] * dzh;
        }
      }
    }
    auto giu = g.I(u);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) {
        dW[r * m + c] += dz_u[r] * iu[c];
        giu[c] += p.W[r * m + c] * dz_u[r];
      }
    }
  }

  if (loss_out) *loss_out = loss;
  return g;
}

// Adam that only advances rows present in the gradient (lazy moments).
class SparseAdam {
 public:
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  SparseAdam(const ModelParams& p, double lr)
      : lr_(lr),
        m_I_(p.identity.size(), 0.0), v_I_(p.identity.size(), 0.0),
        m_A_(p.aspect.size(), 0.0), v_A_(p.aspect.size(), 0.0),
        m_rho_(p.rho.size(), 0.0), v_rho_(p.rho.size(), 0.0),
        m_theta_(p.theta.size(), 0.0), v_theta_(p.theta.size(), 0.0),
        m_W_(p.W.size(), 0.0), v_W_(p.W.size(), 0.0),
        m_a_(p.a_vec.size(), 0.0), v_a_(p.a_vec.size(), 0.0) {}

  std::size_t steps() const noexcept { return step_; }

  void step(ModelParams& p, const GradientSet& g) {
    ++step_;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
    auto update = [&](double& x, double& mm, double& vv, double grad) {
      mm = beta1 * mm + (1.0 - beta1) * grad;
      vv = beta2 * vv + (1.0 - beta2) * grad * grad;
      x -= lr_ * (mm / c1) / (std::sqrt(vv / c2) + eps);
    };
    const std::size_t m = p.m(), K = p.K();
    for (NodeId u : g.nodes()) {
      const std::size_t s = g.slot_of(u);
      auto gi = g.I_row(s);
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t o = u * m + i;
        update(p.identity[o], m_I_[o], v_I_[o], gi[i]);
      }
      auto ga = g.A_rows(s);
      for (std::size_t i = 0; i < K * m; ++i) {
        const std::size_t o = u * K * m + i;
        update(p.aspect[o], m_A_[o], v_A_[o], ga[i]);
      }
      update(p.rho[u], m_rho_[u], v_rho_[u], g.rho_row(s));
      if (p.hyper.use_gumbel) update(p.theta[u], m_theta_[u], v_theta_[u], g.theta_row(s));
    }
    if (p.hyper.use_attention) {
      for (std::size_t i = 0; i < p.W.size(); ++i) update(p.W[i], m_W_[i], v_W_[i], g.W()[i]);
      for (std::size_t i = 0; i < p.a_vec.size(); ++i) update(p.a_vec[i], m_a_[i], v_a_[i], g.a_vec()[i]);
    }
  }

 private:
  double lr_;
  std::size_t step_ = 0;
  std::vector<double> m_I_, v_I_, m_A_, v_A_, m_rho_, v_rho_, m_theta_, v_theta_, m_W_, v_W_, m_a_, v_a_;
};

enum class Variant { full, no_attn, no_gumbel, no_attn_no_gumbel };

inline Variant parse_variant(const std::string& name) {
  if (name == "full") return Variant::full;
  if (name == "no_attn") return Variant::no_attn;
  if (name == "no_gumbel") return Variant::no_gumbel;
  if (name == "no_attn_no_gumbel") return Variant::no_attn_no_gumbel;
  throw std::invalid_argument("unknown ablation variant: " + name);
}

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::no_attn: return "no_attn";
    case Variant::no_gumbel: return "no_gumbel";
    case Variant::no_attn_no_gumbel: return "no_attn_no_gumbel";
  }
  return "full";
}

inline HyperParams ablation_config(HyperParams base, Variant v) {
  switch (v) {
    case Variant::full: break;
    case Variant::no_attn: base.use_attention = false; break;
    case Variant::no_gumbel: base.use_gumbel = false; break;
    case Variant::no_attn_no_gumbel:
      base.use_attention = false;
      base.use_gumbel = false;
      break;
  }
  return base;
}

inline HyperParams ablation_config(const HyperParams& base, const std::string& variant) {
  return ablation_config(base, parse_variant(variant));
}

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double seconds = 0.0;
};

struct TrainCallbacks {
  std::function<void(const EpochStats&, const ModelParams&)> on_epoch;
};

struct TrainOptions {
  std::size_t workers = 1;
  double clip_norm = 5.0;
};

namespace detail {

// Stream for one sample, independent of visiting order and worker count.
inline Rng sample_rng(std::uint64_t seed, std::uint64_t epoch, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32), 0x6d686e65u};
  return Rng(seq);
}

// Directed: one sample per edge. Undirected: one per orientation.
inline std::vector<TemporalEdge> training_edges(const TemporalNetwork& net) {
  std::vector<TemporalEdge> out;
  out.reserve(net.edges().size() * (net.directed() ? 1 : 2));
  for (const auto& e : net.edges()) {
    out.push_back(e);
    if (!net.directed()) out.push_back({e.target, e.source, e.time});
  }
  return out;
}

}  // namespace detail

// Continues training from `params` for params.hyper.epochs passes.
inline void train_in_place(ModelParams& params, const TemporalNetwork& net,
                           const TrainCallbacks& callbacks = {}, const TrainOptions& opts = {}) {
  const HyperParams& hyper = params.hyper;
  hyper.validate();
  if (net.edges().empty()) throw std::invalid_argument("train: network has no edges");
  if (params.node_count != net.node_count()) throw std::invalid_argument("train: node count mismatch");
  if (hyper.epochs == 0) return;

  const NegativeSampler sampler(net);
  const auto edges = detail::training_edges(net);
  SparseAdam adam(params, hyper.lr);
  std::vector<std::size_t> order(edges.size());
  const std::size_t workers = std::max<std::size_t>(1, opts.workers);

  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = detail::sample_rng(hyper.seed, epoch, ~std::uint64_t{0});
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss = 0.0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += hyper.batch) {
      const std::size_t b1 = std::min(order.size(), b0 + hyper.batch);
      const std::size_t n = b1 - b0;
      const std::size_t nw = std::min(workers, n);
      std::vector<GradientSet> partial(nw, GradientSet(params.m(), params.K()));
      std::vector<double> partial_loss(nw, 0.0);
      std::vector<std::exception_ptr> errors(nw);
      auto work = [&](std::size_t w) {
        try {
          const std::size_t lo = b0 + n * w / nw, hi = b0 + n * (w + 1) / nw;
          for (std::size_t i = lo; i < hi; ++i) {
            const std::size_t idx = order[i];
            Rng rng = detail::sample_rng(hyper.seed, epoch, idx);
            const auto sample = make_sample(net, sampler, hyper, edges[idx], rng);
            double loss = 0.0;
            partial[w].add(gradients(params, sample, &loss));
            partial_loss[w] += loss;
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      };
      if (nw == 1) {
        work(0);
      } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < nw; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
      }
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
      GradientSet total = std::move(partial[0]);
      for (std::size_t w = 1; w < nw; ++w) total.add(partial[w]);
      for (double l : partial_loss) epoch_loss += l;
      total.scale(1.0 / static_cast<double>(n));
      const double norm = std::sqrt(total.squared_norm());
      if (opts.clip_norm > 0.0 && norm > opts.clip_norm) total.scale(opts.clip_norm / norm);
      adam.step(params, total);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = epoch_loss / static_cast<double>(edges.size());
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!std::isfinite(stats.mean_loss)) {
      throw std::runtime_error("training diverged: mean loss at epoch " + std::to_string(epoch) +
                               " is not finite; try a smaller learning rate");
    }
    if (callbacks.on_epoch) callbacks.on_epoch(stats, params);
  }
}

inline ModelParams train(const TemporalNetwork& net, const HyperParams& hyper,
                         const TrainCallbacks& callbacks = {}, const TrainOptions& opts = {}) {
  Rng rng(hyper.seed);
  ModelParams params = init_params(hyper, net.node_count(), rng);
  train_in_place(params, net, callbacks, opts);
  return params;
}

// Mean loss over every training sample with deterministic negatives
// drawn from `seed`; used to compare models before and after training.
inline double mean_loss(const ModelParams& p, const TemporalNetwork& net, std::uint64_t seed) {
  const NegativeSampler sampler(net);
  const auto edges = detail::training_edges(net);
  double total = 0.0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    Rng rng = detail::sample_rng(seed, 0, i);
    total += sample_loss(p, make_sample(net, sampler, p.hyper, edges[i], rng));
  }
  return total / static_cast<double>(edges.size());
}

}  // namespace mhne
