#include "dfsc/simulation.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <numeric>

using namespace dfsc;
using dfsc::test::gaussian_track;
using dfsc::test::label;
using nlohmann::json;

namespace {

Scenario small() { return parse_scenario(dfsc::test::kSmallScenario); }

std::ptrdiff_t index_of(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) - v.begin();
}

// Two sensors 760 m apart, both facing north, one target north and one south
// of their midpoint. Actions: stay or turn around.
struct SplitFixture {
  Scenario sc;
  std::map<SensorId, SensorPose> poses;
  std::map<SensorId, LmbDensity> predicted;
  NetworkGraph graph;

  SplitFixture() : graph(std::vector<SensorId>{1, 2}) {
    json j = json::parse(dfsc::test::kSmallScenario);
    j["profile"]["rho_max"] = 800;
    j["profile"]["theta_max_deg"] = 60;
    j["actions"] = json::array({json{{"id", 0}}, json{{"id", 1}, {"dtheta_deg", 180}}});
    j["sensors"][1]["x"] = 760;
    j["targets"] = json::array();
    sc = parse_scenario(j.dump());
    for (const auto& s : sc.sensors) poses[s.id] = s.pose;
    graph.connect(1, 2);
    Rng rng(5);
    for (SensorId s : {1, 2}) {
      predicted[s] = LmbDensity({gaussian_track(label(0, s, 0), 0.6, 380, 400, 10, 200, rng),
                                 gaussian_track(label(0, s, 1), 0.6, 380, -400, 10, 200, rng)});
    }
  }
};

double summed_reward(const ControlProblem& p, const MultiSensorCommand& cmd) {
  double total = 0.0;
  for (SensorId s : p.roster()) total += p.evaluate(s, cmd).reward;
  return total;
}

}  // namespace

TEST(RunSingle, FixedNeverMoves) {
  const Scenario sc = small();
  const RunRecord r = run_single(sc, Method::Fixed, 0, 3);
  ASSERT_EQ(r.steps.size(), 8u);
  for (const auto& st : r.steps) {
    for (const auto& [s, u] : st.commands) EXPECT_EQ(u.id, 0);
    for (const auto& [s, pose] : st.poses) EXPECT_EQ(pose, sc.sensor(s).pose);
  }
}

TEST(RunSingle, NoTargetsNoClutterGivesZeroOspa) {
  json j = json::parse(dfsc::test::kSmallScenario);
  j["duration"] = 1;
  j["targets"] = json::array();
  j["clutter"]["rate"] = 0;
  const RunRecord r = run_single(parse_scenario(j.dump()), Method::Dfsc, 0, 1);
  ASSERT_EQ(r.steps.size(), 1u);
  EXPECT_TRUE(r.steps[0].estimates.empty());
  EXPECT_EQ(r.steps[0].ospa, 0.0);
}

TEST(RunSingle, PipelineOrderAndFreshPosteriors) {
  const RunRecord r = run_single(small(), Method::Dfsc, 0, 2);
  for (const auto& st : r.steps) {
    EXPECT_EQ(st.fused_posterior_step, st.step);
    const auto& g = st.stages;
    EXPECT_LT(index_of(g, "predict"), index_of(g, "control"));
    EXPECT_LT(index_of(g, "control"), index_of(g, "measure"));
    EXPECT_LT(index_of(g, "measure"), index_of(g, "update"));
    EXPECT_LT(index_of(g, "update"), index_of(g, "share"));
    EXPECT_LT(index_of(g, "share"), index_of(g, "fuse"));
    EXPECT_LT(index_of(g, "fuse"), index_of(g, "estimate"));
    EXPECT_LT(index_of(g, "estimate"), static_cast<std::ptrdiff_t>(g.size()));
  }
}

TEST(RunSingle, Deterministic) {
  const Scenario sc = small();
  for (Method m : {Method::Dfsc, Method::Isc, Method::Dcdsc}) {
    const RunRecord a = run_single(sc, m, 0, 11);
    const RunRecord b = run_single(sc, m, 0, 11);
    ASSERT_EQ(a.steps.size(), b.steps.size());
    EXPECT_EQ(a.mean_ospa, b.mean_ospa);
    for (std::size_t k = 0; k < a.steps.size(); ++k) {
      EXPECT_EQ(a.steps[k].commands, b.steps[k].commands);
      ASSERT_EQ(a.steps[k].estimates.size(), b.steps[k].estimates.size());
      for (std::size_t i = 0; i < a.steps[k].estimates.size(); ++i) {
        EXPECT_EQ(a.steps[k].estimates[i].state, b.steps[k].estimates[i].state);
      }
    }
  }
}

TEST(MonteCarlo, SingleRunMatchesRunSingle) {
  const Scenario sc = small();
  const Campaign c = run_monte_carlo(sc, Method::Isc, 1, 21);
  const RunRecord r = run_single(sc, Method::Isc, 0, 21);
  EXPECT_EQ(c.mean_ospa, r.mean_ospa);
  EXPECT_EQ(c.mean_ospa2, r.mean_ospa2);
}

TEST(MonteCarlo, MeansAreArithmeticMeans) {
  const Scenario sc = small();
  const Campaign c = run_monte_carlo(sc, Method::Fixed, 3, 30);
  ASSERT_EQ(c.runs.size(), 3u);
  double o = 0.0, o2 = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(c.runs[i].seed, 30u + i);
    o += c.runs[i].mean_ospa;
    o2 += c.runs[i].mean_ospa2;
  }
  EXPECT_NEAR(c.mean_ospa, o / 3, 1e-12);
  EXPECT_NEAR(c.mean_ospa2, o2 / 3, 1e-12);
  ASSERT_EQ(c.mean_cardinality.size(), 8u);
  for (int k = 0; k < 8; ++k) {
    double card = 0.0;
    for (const auto& r : c.runs) card += static_cast<double>(r.steps[k].estimates.size());
    EXPECT_NEAR(c.mean_cardinality[k], card / 3, 1e-12);
  }
  EXPECT_EQ(c.truth_cardinality[0], 1.0);
  EXPECT_EQ(c.truth_cardinality[7], 2.0);
}

TEST(MonteCarlo, TracksBothTargetsEventually) {
  const Campaign c = run_monte_carlo(small(), Method::Dfsc, 2, 40);
  EXPECT_NEAR(c.mean_cardinality.back(), 2.0, 0.5);
  EXPECT_LT(c.runs[0].steps.back().ospa, 30.0);
}

TEST(ControlProblem, IndependentControlDuplicatesWhileFloodingSplits) {
  SplitFixture f;
  const StepContext ctx(f.sc, f.poses, f.predicted, f.graph);
  const ControlProblem problem(ctx, {1, 2}, DensityScope::Neighbourhood);

  const OptimizerReport isc = isc_run(problem);
  // Each assumes the other keeps looking north, so both turn south.
  EXPECT_EQ(isc.selected.at(1).id, 1);
  EXPECT_EQ(isc.selected.at(2).id, 1);

  const DfscResult df = dfsc_run(problem, f.graph, 20);
  EXPECT_NE(df.commands.at(1).id, df.commands.at(2).id);
  EXPECT_GT(summed_reward(problem, df.commands), summed_reward(problem, isc.selected));
}
