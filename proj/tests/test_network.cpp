#include "dfsc/network.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dfsc;

namespace {

Inboxes seed_message(const NetworkGraph& g, SensorId origin) {
  Inboxes in;
  for (SensorId s : g.ids()) in[s];
  in[origin][{origin, 1}] = FloodMessage{origin, 1, ControlCommand{0, 0, 0, 4}, 0};
  return in;
}

int rounds_until_everyone_knows(const NetworkGraph& g, SensorId origin) {
  Inboxes in = seed_message(g, origin);
  for (int r = 0; r <= static_cast<int>(g.ids().size()); ++r) {
    bool all = true;
    for (SensorId s : g.ids()) all = all && latest_from(in[s], origin) != nullptr;
    if (all) return r;
    in = flood_round(g, in);
  }
  return -1;
}

}  // namespace

TEST(BuildGraph, InclusiveBoundary) {
  const auto g = build_graph({{1, Position(0, 0)}, {2, Position(800, 0)}}, 800.0);
  EXPECT_TRUE(g.connected(1, 2));
  const auto h = build_graph({{1, Position(0, 0)}, {2, Position(801, 0)}}, 800.0);
  EXPECT_FALSE(h.connected(1, 2));
  EXPECT_EQ(h.components().size(), 2u);
}

TEST(BuildGraph, SymmetricWithoutSelfEdges) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0, 2000);
  std::map<SensorId, Position> pos;
  for (int i = 1; i <= 15; ++i) pos[i] = Position(u(rng), u(rng));
  const auto g = build_graph(pos, 800.0);
  for (SensorId a : g.ids()) {
    EXPECT_FALSE(g.connected(a, a));
    for (SensorId b : g.neighbors(a)) EXPECT_TRUE(g.connected(b, a));
  }
}

TEST(NetworkGraph, ClosedNeighbourhoodAndDiameter) {
  NetworkGraph g({1, 2, 3, 4});
  g.connect(1, 2);
  g.connect(2, 3);
  g.connect(3, 4);
  EXPECT_EQ(g.closed_neighborhood(2), (std::vector<SensorId>{1, 2, 3}));
  EXPECT_EQ(g.eccentricity(1), 3);
  EXPECT_EQ(g.diameter({1, 2, 3, 4}), 3);
}

TEST(FloodRound, LineGraphTakesTwoHops) {
  NetworkGraph g({1, 2, 3});
  g.connect(1, 2);
  g.connect(2, 3);
  Inboxes in = seed_message(g, 1);
  in = flood_round(g, in);
  EXPECT_EQ(latest_from(in[3], 1), nullptr);
  EXPECT_NE(latest_from(in[2], 1), nullptr);
  in = flood_round(g, in);
  ASSERT_NE(latest_from(in[3], 1), nullptr);
  EXPECT_EQ(std::get<ControlCommand>(latest_from(in[3], 1)->payload).id, 4);
}

TEST(FloodRound, CompleteGraphOneRound) {
  NetworkGraph g({1, 2, 3, 4, 5});
  for (int a = 1; a <= 5; ++a) {
    for (int b = a + 1; b <= 5; ++b) g.connect(a, b);
  }
  EXPECT_EQ(rounds_until_everyone_knows(g, 3), 1);
}

TEST(FloodRound, DuplicatesCollapse) {
  NetworkGraph g({1, 2});
  g.connect(1, 2);
  Inboxes in = seed_message(g, 1);
  for (int r = 0; r < 5; ++r) in = flood_round(g, in);
  EXPECT_EQ(in[1].size(), 1u);
  EXPECT_EQ(in[2].size(), 1u);
}

TEST(FloodRound, LatestIterationWins) {
  NetworkGraph g({1, 2});
  g.connect(1, 2);
  Inboxes in;
  in[2];
  in[1][{1, 1}] = FloodMessage{1, 1, ControlCommand{0, 0, 0, 1}, 0};
  in[1][{1, 2}] = FloodMessage{1, 2, ControlCommand{0, 0, 0, 2}, 0};
  in = flood_round(g, in);
  EXPECT_EQ(latest_from(in[2], 1)->iteration, 2);
}

TEST(FloodRound, RandomConnectedGraphsDisseminateWithinDiameter) {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 19;
    NetworkGraph g([&] {
      std::vector<SensorId> ids;
      for (int i = 1; i <= n; ++i) ids.push_back(i);
      return ids;
    }());
    // Random spanning tree plus a few chords keeps it connected.
    for (int i = 2; i <= n; ++i) g.connect(i, std::uniform_int_distribution<int>(1, i - 1)(rng));
    for (int k = 0; k < n / 3; ++k) {
      const int a = std::uniform_int_distribution<int>(1, n)(rng);
      const int b = std::uniform_int_distribution<int>(1, n)(rng);
      if (a != b) g.connect(a, b);
    }
    ASSERT_EQ(g.components().size(), 1u);
    const int diam = g.diameter(g.ids());
    for (SensorId s : g.ids()) {
      const int r = rounds_until_everyone_knows(g, s);
      EXPECT_GE(r, 0);
      EXPECT_LE(r, diam);
      EXPECT_EQ(r, g.eccentricity(s));
    }
  }
}
