// Trainable state of the model and its (de)serialization.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mhne/temporal_graph.hpp"

namespace mhne {

struct HyperParams {
  std::size_t aspects = 4;         // K
  std::size_t history = 5;         // H
  std::size_t dim = 20;            // m, per-embedding size
  std::size_t negatives = 5;       // N
  std::size_t batch = 200;
  std::size_t epochs = 20;
  double lr = 0.003;
  std::uint64_t seed = 0;
  bool use_attention = true;
  bool use_gumbel = true;

  std::size_t total_dim() const noexcept { return dim * (aspects + 1); }

  void validate() const {
    if (aspects < 1 || history < 1 || dim < 1 || negatives < 1 || batch < 1) {
      throw std::invalid_argument("hyperparameters: K, H, m, N and batch must all be >= 1");
    }
    if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("hyperparameters: lr must be > 0");
  }

  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

// softplus and its inverse; keeps decay and temperature strictly positive.
inline double positive(double x) noexcept {
  if (x > 30.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double positive_inverse(double y) {
  if (!(y > 0.0)) throw std::domain_error("positive_inverse: argument must be > 0");
  if (y > 30.0) return y + std::log(-std::expm1(-y));
  return std::log(std::expm1(y));
}

// d positive(x) / dx
inline double positive_derivative(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

struct ModelParams {
  HyperParams hyper;
  std::size_t node_count = 0;
  std::vector<double> identity;  // node_count x m
  std::vector<double> aspect;    // node_count x K x m
  std::vector<double> rho;       // decay, unconstrained
  std::vector<double> theta;     // temperature, unconstrained
  std::vector<double> W;         // m x m, row-major
  std::vector<double> a_vec;     // 2m

  std::size_t m() const noexcept { return hyper.dim; }
  std::size_t K() const noexcept { return hyper.aspects; }

  std::span<double> I(NodeId u) { return {identity.data() + u * m(), m()}; }
  std::span<const double> I(NodeId u) const { return {identity.data() + u * m(), m()}; }
  std::span<double> A(NodeId u, std::size_t k) { return {aspect.data() + (u * K() + k) * m(), m()}; }
  std::span<const double> A(NodeId u, std::size_t k) const {
    return {aspect.data() + (u * K() + k) * m(), m()};
  }

  double decay(NodeId u) const { return positive(rho.at(u)); }
  double temperature(NodeId u) const { return positive(theta.at(u)); }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

inline ModelParams init_params(const HyperParams& hyper, std::size_t node_count, Rng& rng) {
  hyper.validate();
  if (node_count < 1) throw std::invalid_argument("init_params: node_count must be >= 1");
  const std::size_t m = hyper.dim;
  const std::size_t K = hyper.aspects;
  ModelParams p;
  p.hyper = hyper;
  p.node_count = node_count;

  const double r = 0.5 / static_cast<double>(m);
  std::uniform_real_distribution<double> emb(-r, r);
  std::uniform_real_distribution<double> small(-0.01, 0.01);
  p.identity.resize(node_count * m);
  for (auto& x : p.identity) x = emb(rng);
  p.aspect.resize(node_count * K * m);
  for (auto& x : p.aspect) x = emb(rng);

  const double one = positive_inverse(1.0);
  p.rho.assign(node_count, one);
  p.theta.assign(node_count, one);

  p.W.assign(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) p.W[i * m + j] = (i == j) ? 1.0 : small(rng);
  }
  p.a_vec.resize(2 * m);
  for (auto& x : p.a_vec) x = small(rng);
  return p;
}

// [I_u, A_u^1, ..., A_u^K]
inline std::vector<double> concat_embedding(const ModelParams& p, NodeId u) {
  std::vector<double> out;
  out.reserve(p.hyper.total_dim());
  auto id = p.I(u);
  out.insert(out.end(), id.begin(), id.end());
  for (std::size_t k = 0; k < p.K(); ++k) {
    auto a = p.A(u, k);
    out.insert(out.end(), a.begin(), a.end());
  }
  return out;
}

namespace detail {

inline constexpr char kModelMagic[5] = {'M', 'H', 'N', 'E', '1'};

template <class T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw std::runtime_error("model file truncated");
  }
  return v;
}

inline void write_array(std::ostream& out, const std::vector<double>& xs) {
  out.write(reinterpret_cast<const char*>(xs.data()),
            static_cast<std::streamsize>(xs.size() * sizeof(double)));
}

inline std::vector<double> read_array(std::istream& in, std::size_t n) {
  std::vector<double> xs(n);
  if (!in.read(reinterpret_cast<char*>(xs.data()), static_cast<std::streamsize>(n * sizeof(double)))) {
    throw std::runtime_error("model file truncated");
  }
  return xs;
}

}  // namespace detail

// Binary layout: magic "MHNE1", hyperparameters, node count, then I, A, rho,
// theta, W, a_vec as native-endian float64 arrays.
inline void save_params(const ModelParams& p, std::ostream& out) {
  out.write(detail::kModelMagic, sizeof(detail::kModelMagic));
  const auto& h = p.hyper;
  for (std::uint64_t v : {std::uint64_t(h.aspects), std::uint64_t(h.history), std::uint64_t(h.dim),
                          std::uint64_t(h.negatives), std::uint64_t(h.batch),
                          std::uint64_t(h.epochs)}) {
    detail::write_pod(out, v);
  }
  detail::write_pod(out, h.lr);
  detail::write_pod(out, h.seed);
  detail::write_pod(out, std::uint8_t(h.use_attention));
  detail::write_pod(out, std::uint8_t(h.use_gumbel));
  detail::write_pod(out, std::uint64_t(p.node_count));
  for (const auto* arr : {&p.identity, &p.aspect, &p.rho, &p.theta, &p.W, &p.a_vec}) {
    detail::write_array(out, *arr);
  }
  if (!out) throw std::runtime_error("failed writing model");
}

inline ModelParams load_params(std::istream& in) {
  char magic[sizeof(detail::kModelMagic)];
  if (!in.read(magic, sizeof(magic))) throw std::runtime_error("model file truncated");
  if (std::memcmp(magic, detail::kModelMagic, 4) != 0) throw std::runtime_error("not an MHNE model file");
  if (magic[4] != detail::kModelMagic[4]) {
    throw std::runtime_error(std::string("unsupported model file version '") + magic[4] + "'");
  }
  ModelParams p;
  auto& h = p.hyper;
  h.aspects = detail::read_pod<std::uint64_t>(in);
  h.history = detail::read_pod<std::uint64_t>(in);
  h.dim = detail::read_pod<std::uint64_t>(in);
  h.negatives = detail::read_pod<std::uint64_t>(in);
  h.batch = detail::read_pod<std::uint64_t>(in);
  h.epochs = detail::read_pod<std::uint64_t>(in);
  h.lr = detail::read_pod<double>(in);
  h.seed = detail::read_pod<std::uint64_t>(in);
  h.use_attention = detail::read_pod<std::uint8_t>(in) != 0;
  h.use_gumbel = detail::read_pod<std::uint8_t>(in) != 0;
  h.validate();
  p.node_count = detail::read_pod<std::uint64_t>(in);
  const std::size_t n = p.node_count, m = h.dim, K = h.aspects;
  // Guard against absurd sizes from a corrupt header before allocating.
  if (n == 0 || n > (std::size_t{1} << 32) || m > (1u << 16) || K > (1u << 10)) {
    throw std::runtime_error("model file header is corrupt");
  }
  p.identity = detail::read_array(in, n * m);
  p.aspect = detail::read_array(in, n * K * m);
  p.rho = detail::read_array(in, n);
  p.theta = detail::read_array(in, n);
  p.W = detail::read_array(in, m * m);
  p.a_vec = detail::read_array(in, 2 * m);
  return p;
}

inline void save_params(const ModelParams& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  save_params(p, out);
}

inline ModelParams load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  return load_params(in);
}

// Text export: `node_count m K`, then `id v_1 ... v_{m(K+1)}` per node.
inline void export_embeddings(const ModelParams& p, std::ostream& out,
                              const std::vector<std::string>& labels = {}) {
  out << p.node_count << ' ' << p.m() << ' ' << p.K() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t u = 0; u < p.node_count; ++u) {
    out << (labels.empty() ? std::to_string(u) : labels.at(u));
    for (double x : concat_embedding(p, static_cast<NodeId>(u))) out << ' ' << x;
    out << '\n';
  }
}

}  // namespace mhne
