#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mhne/intensity.hpp"
#include "oracles.hpp"

namespace mhne {
namespace {

TEST(Similarity, Values) {
  EXPECT_EQ(similarity(std::vector<double>{0, 0}, std::vector<double>{3, 4}), -25.0);
  std::vector<double> x{0.3, -1.2, 7};
  EXPECT_EQ(similarity(x, x), 0.0);
  EXPECT_EQ(similarity(std::vector<double>{1}, std::vector<double>{-1}), -4.0);
  EXPECT_THROW(similarity(std::vector<double>{1}, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(Kernel, Values) {
  EXPECT_EQ(kernel(1.0, 0.0), 1.0);
  EXPECT_NEAR(kernel(1.0, std::log(2.0)), 0.5, 1e-15);
  EXPECT_NEAR(kernel(2.0, 0.5), std::exp(-1.0), 1e-15);
  EXPECT_THROW(kernel(1.0, -0.1), std::invalid_argument);
  for (double dt = 0.05; dt < 3; dt += 0.1) {
    EXPECT_GT(kernel(1.0, dt), kernel(1.0, dt + 0.01));
    EXPECT_GT(kernel(1.0, dt), kernel(1.1, dt));
  }
}

class IntensityFixture : public ::testing::Test {
 protected:
  std::mt19937_64 rng{2024};
};

TEST_F(IntensityFixture, AttentionSingletonAndSymmetric) {
  auto p = oracle::random_params(6, 3, 2, rng);
  auto a = attention(p, 0, {{1, 0.2}});
  ASSERT_EQ(a.size(), 1u);
  EXPECT_DOUBLE_EQ(a[0], 1.0);

  for (NodeId h : {2, 3, 4}) {
    auto dst = p.I(h);
    auto src = p.I(1);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  a = attention(p, 0, {{1, 0.1}, {2, 0.2}, {3, 0.3}, {4, 0.4}});
  for (double w : a) EXPECT_NEAR(w, 0.25, 1e-15);

  p.hyper.use_attention = false;
  a = attention(p, 0, {{1, 0.1}, {2, 0.3}});
  EXPECT_EQ(a, (std::vector<double>{1.0, 1.0}));
}

TEST_F(IntensityFixture, AttentionMatchesOracle) {
  for (int trial = 0; trial < 20; ++trial) {
    auto p = oracle::random_params(6, 3, 2, rng);
    std::vector<NeighborEvent> hist{{1, 0.1}, {4, 0.2}, {2, 0.5}};
    auto a = attention(p, 0, hist);
    auto o = oracle::attention(p, 0, hist);
    double sum = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      EXPECT_NEAR(a[j], o[j], 1e-12);
      sum += a[j];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST_F(IntensityFixture, ContextCases) {
  auto p = oracle::random_params(6, 3, 2, rng);
  auto c = context(p, 0, 0.7, {}, 1);
  auto a0 = p.A(0, 1);
  EXPECT_TRUE(std::equal(c.begin(), c.end(), a0.begin()));

  c = context(p, 0, 0.7, {{3, 0.7}}, 1);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(c[i], 0.5 * (p.A(3, 1)[i] + p.A(0, 1)[i]), 1e-15);

  std::vector<NeighborEvent> hist{{1, 0.1}, {4, 0.3}, {2, 0.6}};
  for (std::size_t k = 0; k < 2; ++k) {
    c = context(p, 0, 0.9, hist, k);
    auto o = oracle::context(p, 0, 0.9, hist, k);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(c[i], o[i], 1e-12);
  }
  EXPECT_THROW(context(p, 0, 0.9, hist, 2), std::out_of_range);
}

TEST_F(IntensityFixture, AspectDistributionSymmetricAndSharp) {
  auto p = oracle::random_params(4, 2, 3, rng);
  // All contexts equal -> equal similarities -> uniform.
  std::vector<double> ctx = {0.1, 0.2, 0.1, 0.2, 0.1, 0.2};
  auto pi = aspect_distribution(p, 1, ctx, {});
  for (double w : pi.weights) EXPECT_NEAR(w, 1.0 / 3, 1e-15);

  // Distinct similarities with a gap >= 0.1 at tau = 1e-3.
  p.theta[1] = positive_inverse(1e-3);
  auto in = p.I(1);
  ctx = {in[0], in[1], in[0] + 0.4, in[1], in[0], in[1] + 0.5};
  pi = aspect_distribution(p, 1, ctx, {});
  EXPECT_GT(pi[0], 0.99);
}

TEST_F(IntensityFixture, GumbelArgmaxMatchesSoftmax) {
  HyperParams h;
  h.dim = 1;
  h.aspects = 3;
  Rng init(1);
  auto p = init_params(h, 1, init);  // tau = 1
  p.I(0)[0] = 0.0;
  // F = -c^2 for contexts c = 0, 0.5, 1.
  std::vector<double> ctx = {0.0, 0.5, 1.0};
  std::vector<double> logits = {0.0, -0.25, -1.0};
  std::vector<double> soft(3);
  const double z = std::exp(logits[0]) + std::exp(logits[1]) + std::exp(logits[2]);
  for (int k = 0; k < 3; ++k) soft[k] = std::exp(logits[k]) / z;

  Rng rng2(77);
  const int draws = 100000;
  std::vector<double> freq(3, 0.0);
  for (int i = 0; i < draws; ++i) {
    auto pi = aspect_distribution(p, 0, ctx, rng2, true);
    double sum = std::accumulate(pi.weights.begin(), pi.weights.end(), 0.0);
    ASSERT_NEAR(sum, 1.0, 1e-9);
    freq[std::max_element(pi.weights.begin(), pi.weights.end()) - pi.weights.begin()] += 1.0 / draws;
  }
  double l1 = 0;
  for (int k = 0; k < 3; ++k) l1 += std::abs(freq[k] - soft[k]);
  EXPECT_LE(l1, 0.02);
}

TEST_F(IntensityFixture, NoGumbelPinsTemperature) {
  auto p = oracle::random_params(4, 2, 3, rng, true, false);
  p.theta[2] = 5.0;
  std::vector<double> ctx = {0.1, 0.2, -0.3, 0.4, 0.5, -0.6};
  std::vector<double> noise = {3.0, -2.0, 1.0};
  auto a = aspect_distribution(p, 2, ctx, noise);
  auto b = aspect_distribution(p, 2, ctx, {});
  EXPECT_EQ(a.weights, b.weights);
  p.theta[2] = -5.0;
  EXPECT_EQ(aspect_distribution(p, 2, ctx, {}).weights, b.weights);
}

TEST_F(IntensityFixture, AspectIntensityCases) {
  auto p = oracle::random_params(6, 3, 2, rng);
  auto ctx = build_edge_context(p, 0, 5, 0.5, {});
  for (std::size_t k = 0; k < 2; ++k) {
    const double expect = similarity(p.I(0), p.I(5)) * -similarity(p.A(0, k), p.A(5, k));
    EXPECT_EQ(aspect_intensity(p, ctx, k), expect);
  }
  auto z = p;
  std::fill(z.aspect.begin(), z.aspect.end(), 0.0);
  auto zc = build_edge_context(z, 0, 5, 0.9, {{1, 0.1}, {2, 0.4}});
  for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(aspect_intensity(z, zc, k), 0.0);
}

TEST_F(IntensityFixture, MixedIntensityDegenerateCases) {
  auto p = oracle::random_params(6, 3, 1, rng);
  auto ctx = build_edge_context(p, 0, 5, 0.9, {{1, 0.1}, {2, 0.4}});
  EXPECT_NEAR(mixed_intensity(p, ctx), aspect_intensity(p, ctx, 0), 1e-15);

  // Every aspect identical and no noise -> uniform pi, equal lambda^k.
  auto q = oracle::random_params(6, 3, 3, rng);
  for (NodeId n = 0; n < 6; ++n) {
    for (std::size_t k = 1; k < 3; ++k) {
      auto src = q.A(n, 0);
      auto dst = q.A(n, k);
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
  auto qc = build_edge_context(q, 0, 5, 0.9, {{1, 0.1}, {2, 0.4}});
  for (double w : qc.source_pi.weights) EXPECT_NEAR(w, 1.0 / 3, 1e-12);
  EXPECT_NEAR(mixed_intensity(q, qc), aspect_intensity(q, qc, 0), 1e-12);
}

TEST_F(IntensityFixture, MatchesOracleOnRandomFixtures) {
  for (int trial = 0; trial < 50; ++trial) {
    const bool attn = trial % 4 != 1, gum = trial % 4 != 2;
    auto f = oracle::random_fixture(rng, attn, gum);
    const auto& s = f.sample;
    auto ctx = build_edge_context(f.params, s.edge.source, s.edge.target, s.edge.time, s.history, s.gumbel);
    auto o = oracle::intensity(f.params, s.edge.source, s.edge.target, s.edge.time, s.history, s.gumbel);
    for (std::size_t k = 0; k < f.params.K(); ++k) EXPECT_NEAR(aspect_intensity(f.params, ctx, k), o.per_aspect[k], 1e-12);
    EXPECT_NEAR(mixed_intensity(f.params, ctx), o.mixed, 1e-12);
  }
}

TEST_F(IntensityFixture, Properties) {
  for (int trial = 0; trial < 200; ++trial) {
    auto f = oracle::random_fixture(rng);
    auto& p = f.params;
    const auto& s = f.sample;
    auto ctx = build_edge_context(p, s.edge.source, s.edge.target, s.edge.time, s.history, s.gumbel);

    auto check_simplex = [](const std::vector<double>& w) {
      double sum = 0;
      for (double x : w) {
        EXPECT_GT(x, 0.0);
        EXPECT_LT(x, 1.0 + 1e-15);
        sum += x;
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
    };
    check_simplex(ctx.source_pi.weights);
    for (const auto& pi : ctx.history_pi) check_simplex(pi.weights);
    if (!ctx.attention.empty()) check_simplex(ctx.attention);

    double lo = 1e300, hi = -1e300;
    for (std::size_t k = 0; k < p.K(); ++k) {
      const double l = aspect_intensity(p, ctx, k);
      lo = std::min(lo, l);
      hi = std::max(hi, l);
    }
    const double mix = mixed_intensity(p, ctx);
    EXPECT_LE(lo - 1e-12, mix);
    EXPECT_LE(mix, hi + 1e-12);
    EXPECT_GT(std::exp(mix), 0.0);

    // Permuting history entries together with their noise rows.
    if (s.history.size() >= 2) {
      auto hist = s.history;
      auto noise = s.gumbel;
      const std::size_t K = p.K();
      std::swap(hist[0], hist[1]);
      if (!noise.empty()) std::swap_ranges(noise.begin(), noise.begin() + K, noise.begin() + K);
      auto c2 = build_edge_context(p, s.edge.source, s.edge.target, s.edge.time, hist, noise);
      EXPECT_NEAR(mixed_intensity(p, c2), mix, 1e-12);
    }
  }
}

// Without attention and with K = 1, the intensity is a multivariate Hawkes
// form: base similarity plus kernel-weighted history similarities scaled by gamma.
TEST_F(IntensityFixture, ReducesToMultivariateHawkes) {
  auto p = oracle::random_params(6, 3, 1, rng, false, true);
  std::vector<NeighborEvent> hist{{1, 0.1}, {2, 0.4}, {3, 0.8}};
  auto ctx = build_edge_context(p, 0, 5, 0.9, hist);
  const double delta = p.decay(0);
  double expect = similarity(p.I(0), p.I(5)) * -similarity(p.A(0, 0), p.A(5, 0));
  for (const auto& e : hist) {
    expect += similarity(p.I(e.neighbor), p.I(5)) * -similarity(p.A(e.neighbor, 0), p.A(5, 0)) *
              std::exp(-delta * (0.9 - e.time));
  }
  EXPECT_NEAR(mixed_intensity(p, ctx), expect, 1e-12);
}

TEST_F(IntensityFixture, NoiseSizeValidated) {
  auto p = oracle::random_params(6, 3, 2, rng);
  std::vector<double> bad(3);
  EXPECT_THROW(build_edge_context(p, 0, 1, 0.5, {{2, 0.1}}, bad), std::invalid_argument);
}

}  // namespace
}  // namespace mhne
