#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "mhne/temporal_graph.hpp"

namespace mhne {
namespace {

TemporalNetwork parse(const std::string& text, bool directed) {
  std::istringstream in(text);
  return read_edge_list(in, directed);
}

TEST(LoadEdgeList, DirectedNormalizesTimes) {
  auto net = parse("a b 1\na c 2\nb c 3\n", true);
  EXPECT_EQ(net.node_count(), 3u);
  ASSERT_EQ(net.edges().size(), 3u);
  EXPECT_DOUBLE_EQ(net.edges()[0].time, 0.0);
  EXPECT_DOUBLE_EQ(net.edges()[1].time, 0.5);
  EXPECT_DOUBLE_EQ(net.edges()[2].time, 1.0);
  EXPECT_EQ(net.events(net.find("a")).size(), 2u);
  EXPECT_EQ(net.events(net.find("c")).size(), 0u);
}

TEST(LoadEdgeList, UndirectedInsertsBothEndpoints) {
  auto net = parse("a b 1\na c 2\nb c 3\n", false);
  for (const char* n : {"a", "b", "c"}) EXPECT_EQ(net.events(net.find(n)).size(), 2u) << n;
  // Each raw edge shows up in both endpoints' sequences at its time.
  for (const auto& e : net.edges()) {
    for (auto [x, y] : {std::pair{e.source, e.target}, std::pair{e.target, e.source}}) {
      const auto& ev = net.events(x);
      EXPECT_TRUE(std::find(ev.begin(), ev.end(), NeighborEvent{y, e.time}) != ev.end());
    }
  }
}

TEST(LoadEdgeList, ParseErrorsNameTheLine) {
  try {
    parse("a b xyz\n", true);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  try {
    parse("# header\na b 1\na b\n", true);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse("a b inf\n", true), ParseError);
  EXPECT_THROW(parse("a b nan\n", true), ParseError);
  EXPECT_THROW(parse("", true), std::runtime_error);
  EXPECT_THROW(parse("# only comments\n\n", true), std::runtime_error);
  EXPECT_THROW(load_edge_list("/nonexistent/edges.txt", true), std::runtime_error);
}

TEST(LoadEdgeList, CommentsSelfLoopsDuplicatesAndCsv) {
  auto net = parse("# c\n% 4 3\n1,2,5,100\n1,1,3,150\n2,1,-1,200\n1,2,1,200\n", true);
  EXPECT_EQ(net.node_count(), 2u);
  EXPECT_EQ(net.edges().size(), 3u);  // self-loop dropped, duplicate kept
  EXPECT_EQ(net.static_edge_count(), 1u);
  EXPECT_EQ(net.degree(0), 1u);
}

TEST(LoadEdgeList, ConstantTimesMapToZero) {
  auto net = parse("a b 7\nb c 7\n", true);
  for (const auto& e : net.edges()) EXPECT_EQ(e.time, 0.0);
}

TEST(LoadEdgeList, TiesKeepInputOrder) {
  auto net = parse("a c 1\na b 1\na d 0\n", true);
  const auto& ev = net.events(net.find("a"));
  ASSERT_EQ(ev.size(), 3u);
  EXPECT_EQ(net.label(ev[0].neighbor), "d");
  EXPECT_EQ(net.label(ev[1].neighbor), "c");
  EXPECT_EQ(net.label(ev[2].neighbor), "b");
}

TEST(History, StrictCutoffAndLength) {
  auto net = TemporalNetwork::from_edges(4, {{0, 1, 0.1}, {0, 2, 0.2}, {0, 3, 0.3}}, true, false);
  auto h = history(net, 0, 0.25, 5);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_DOUBLE_EQ(h[0].time, 0.1);
  EXPECT_DOUBLE_EQ(h[1].time, 0.2);
  h = history(net, 0, 0.25, 1);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_DOUBLE_EQ(h[0].time, 0.2);
  EXPECT_TRUE(history(net, 0, 0.05, 5).empty());
  EXPECT_EQ(history(net, 0, 0.2, 5).size(), 1u);  // equal time excluded
  EXPECT_TRUE(history(net, 3, 1.0, 5).empty());
}

TEST(History, PropertyLatestStrictlyEarlierEvents) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(0, 1);
  std::uniform_int_distribution<NodeId> node(0, 5);
  std::vector<TemporalEdge> edges;
  for (int i = 0; i < 200; ++i) {
    NodeId a = node(rng), b = node(rng);
    if (a != b) edges.push_back({a, b, std::round(uni(rng) * 20) / 20});  // many ties
  }
  auto net = TemporalNetwork::from_edges(6, edges, false, false);
  for (int trial = 0; trial < 300; ++trial) {
    const NodeId u = node(rng);
    const double t = uni(rng);
    const std::size_t H = 1 + trial % 6;
    auto h = history(net, u, t, H);
    // brute force: filter then take the tail
    std::vector<NeighborEvent> all;
    for (const auto& e : net.events(u)) {
      if (e.time < t) all.push_back(e);
    }
    std::vector<NeighborEvent> expect(all.end() - std::min(all.size(), H), all.end());
    EXPECT_EQ(h, expect);
    for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i - 1].time, h[i].time);
  }
}

TEST(NegativeSampler, AnalyticProbabilities) {
  // node 0 is u; node 1 has degree 1, node 2 degree 16.
  std::vector<TemporalEdge> edges;
  NodeId next = 3;
  edges.push_back({1, next++, 0.0});
  for (int i = 0; i < 16; ++i) edges.push_back({2, next++, 0.0});
  auto net = TemporalNetwork::from_edges(static_cast<std::size_t>(next), edges, true, false);
  NegativeSampler s(net);
  const auto& p = s.probabilities();
  const double leaves = 17.0;  // every leaf has degree 1
  const double total = 1.0 + 8.0 + leaves;
  EXPECT_NEAR(p[1] / (p[1] + p[2]), 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(p[2], 8.0 / total, 1e-15);
  EXPECT_EQ(p[0], 0.0);
  double sum = 0;
  for (double x : p) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(NegativeSampler, EmpiricalMatchesAnalytic) {
  // 10-node fixture; u = 0 is isolated so nothing is rejected.
  std::vector<TemporalEdge> edges = {{1, 2, 0}, {1, 3, 0}, {1, 4, 0}, {2, 3, 0}, {5, 6, 0},
                                     {6, 7, 0}, {7, 8, 0}, {8, 9, 0}, {9, 1, 0}, {4, 5, 0}};
  auto net = TemporalNetwork::from_edges(10, edges, true, false);
  NegativeSampler s(net);
  Rng rng(5);
  const std::size_t draws = 1'000'000;
  std::vector<double> freq(10, 0.0);
  // v = 0 as well, so only u/v exclusions apply and both are massless.
  auto neg = sample_negatives(s, net, 0, 0, draws, rng);
  for (NodeId n : neg) freq[n] += 1.0 / draws;
  double l1 = 0;
  for (std::size_t i = 0; i < 10; ++i) l1 += std::abs(freq[i] - s.probabilities()[i]);
  EXPECT_LE(l1, 0.005);
}

TEST(NegativeSampler, RejectsNeighborsAndEndpoints) {
  auto net = TemporalNetwork::from_edges(4, {{0, 1, 0}, {2, 3, 0}, {1, 2, 0}}, true, false);
  NegativeSampler s(net);
  Rng rng(1);
  // u = 0 (neighbor 1), v = 3: only node 2 is eligible.
  auto neg = sample_negatives(s, net, 0, 3, 50, rng);
  for (NodeId n : neg) EXPECT_EQ(n, 2);
  EXPECT_THROW(sample_negatives(s, net, 0, 3, 0, rng), std::invalid_argument);
}

TEST(NegativeSampler, RejectionCap) {
  // Complete graph: every candidate is a neighbor of u.
  auto net = TemporalNetwork::from_edges(3, {{0, 1, 0}, {0, 2, 0}, {1, 2, 0}}, false, false);
  NegativeSampler s(net);
  Rng rng(1);
  EXPECT_THROW(sample_negatives(s, net, 0, 1, 1, rng), std::runtime_error);
}

TEST(MaskStaticEdges, Triangle) {
  auto net = TemporalNetwork::from_edges(5, {{0, 1, 0.1}, {1, 2, 0.2}, {2, 0, 0.3}, {0, 1, 0.4}}, false, false);
  Rng rng(3);
  auto split = mask_static_edges(net, 1, rng);
  EXPECT_EQ(split.train.static_edge_count(), 2u);
  ASSERT_EQ(split.positives.size(), 1u);
  ASSERT_EQ(split.negatives.size(), 1u);
  auto [a, b] = split.positives[0];
  EXPECT_FALSE(split.train.has_static_edge(a, b));
  for (const auto& e : split.train.edges()) {
    EXPECT_FALSE((e.source == a && e.target == b) || (e.source == b && e.target == a));
  }
  auto [c, d] = split.negatives[0];
  EXPECT_FALSE(net.has_static_edge(c, d));
  EXPECT_NE(c, d);
}

TEST(MaskStaticEdges, ZeroIsIdentityAndTooManyThrows) {
  auto net = TemporalNetwork::from_edges(4, {{0, 1, 0.1}, {1, 2, 0.2}}, true, false);
  Rng rng(3);
  auto split = mask_static_edges(net, 0, rng);
  EXPECT_EQ(split.train.edges().size(), 2u);
  EXPECT_TRUE(split.positives.empty());
  EXPECT_TRUE(split.negatives.empty());
  EXPECT_THROW(mask_static_edges(net, 3, rng), std::invalid_argument);
}

TEST(MaskStaticEdges, PropertyEdgeDisjointAndBalanced) {
  std::mt19937_64 gen(17);
  std::uniform_int_distribution<NodeId> node(0, 29);
  std::vector<TemporalEdge> edges;
  for (int i = 0; i < 300; ++i) {
    NodeId a = node(gen), b = node(gen);
    if (a != b) edges.push_back({a, b, i / 300.0});
  }
  auto net = TemporalNetwork::from_edges(30, edges, true, false);
  Rng rng(9);
  const std::size_t count = net.static_edge_count() / 3;
  auto split = mask_static_edges(net, count, rng);
  EXPECT_EQ(split.train.static_edge_count(), net.static_edge_count() - count);
  std::set<NodePair> pos(split.positives.begin(), split.positives.end());
  std::set<NodePair> neg(split.negatives.begin(), split.negatives.end());
  EXPECT_EQ(pos.size(), count);
  EXPECT_EQ(neg.size(), count);
  for (const auto& p : neg) EXPECT_FALSE(pos.count(p));
  for (const auto& e : split.train.edges()) {
    EXPECT_FALSE(pos.count({std::min(e.source, e.target), std::max(e.source, e.target)}));
  }
}

}  // namespace
}  // namespace mhne
