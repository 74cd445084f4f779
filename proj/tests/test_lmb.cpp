#include "dfsc/lmb.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace dfsc;
using dfsc::test::gaussian_track;
using dfsc::test::label;
using dfsc::test::point_track;
using dfsc::test::state;

namespace {

SensorModel sensor_model() {
  SensorModel m;
  m.noise_sigma = 5.0;
  return m;
}

double mean_pd(const LabeledTrack& t, const SensorPose& pose, const DetectionProfile& prof) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < t.size(); ++j) {
    s += t.weights[j] * detection_probability(prof, pose, Position(t.particles.col(j).head<2>()));
  }
  return s;
}

}  // namespace

TEST(LmbDensity, KeepsLabelOrderAndRejectsDuplicates) {
  LmbDensity d;
  d.insert(point_track(label(3), 0.5, state(0, 0)));
  d.insert(point_track(label(1), 0.5, state(0, 0)));
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.tracks()[0].label, label(1));
  EXPECT_THROW(d.insert(point_track(label(1), 0.2, state(0, 0))), std::invalid_argument);
}

TEST(LmbDensityEval, EmptySetIsProductOfMisses) {
  LmbDensity d({point_track(label(0), 0.7, state(0, 0)), point_track(label(1), 0.4, state(5, 5))});
  EXPECT_DOUBLE_EQ(lmb_density_eval(d, {}), 0.3 * 0.6);
}

TEST(LmbDensityEval, DuplicateLabelsGiveZero) {
  LmbDensity d({point_track(label(0), 0.7, state(0, 0))});
  const std::vector<LabeledState> X{{label(0), state(0, 0)}, {label(0), state(0, 0)}};
  EXPECT_EQ(lmb_density_eval(d, X), 0.0);
}

TEST(LmbDensityEval, SingleTrackLabelMarginals) {
  LmbDensity d({point_track(label(0), 0.7, state(0, 0))});
  EXPECT_DOUBLE_EQ(label_set_weight(d, {label(0)}), 0.7);
  EXPECT_DOUBLE_EQ(label_set_weight(d, {}), 0.3);
}

TEST(LmbDensityEval, LabelSubsetWeightsSumToOne) {
  std::vector<LabeledTrack> tracks;
  const double rs[] = {0.1, 0.35, 0.5, 0.77, 0.9, 0.999};
  for (int i = 0; i < 6; ++i) tracks.push_back(point_track(label(i), rs[i], state(i, 0)));
  LmbDensity d(tracks);
  double total = 0.0;
  for (int mask = 0; mask < 64; ++mask) {
    std::vector<TrackLabel> L;
    for (int i = 0; i < 6; ++i) {
      if (mask & (1 << i)) L.push_back(label(i));
    }
    total += label_set_weight(d, L);
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Predict, DeterministicConstantVelocity) {
  MotionModel m;
  m.sigma_accel = 0.0;
  m.survival_prob = 1.0;
  Rng rng(1);
  LmbDensity d({point_track(label(0), 0.8, state(0, 0, 10, 0), 1)});
  const LmbDensity p = predict(d, m, {}, rng);
  EXPECT_TRUE(p.tracks()[0].particles.col(0).isApprox(state(10, 0, 10, 0)));
  EXPECT_DOUBLE_EQ(p.tracks()[0].r, 0.8);
}

TEST(Predict, SurvivalScalesExistence) {
  MotionModel m;
  Rng rng(1);
  LmbDensity d({point_track(label(0), 0.5, state(0, 0))});
  EXPECT_DOUBLE_EQ(predict(d, m, {}, rng).tracks()[0].r, 0.495);
}

TEST(Predict, EmptyStaysEmpty) {
  Rng rng(1);
  EXPECT_TRUE(predict(LmbDensity{}, MotionModel{}, BirthModel{}, rng).empty());
}

TEST(Predict, CardinalityBalance) {
  Rng rng(3);
  LmbDensity d({gaussian_track(label(0), 0.9, 0, 0, 5, 50, rng), gaussian_track(label(1), 0.4, 100, 0, 5, 50, rng)});
  BirthModel b;
  b.step = 4;
  b.sensor = 2;
  b.particles = 20;
  b.positions = {Position(10, 10), Position(300, 40), Position(-50, 0)};
  MotionModel m;
  const LmbDensity p = predict(d, m, b, rng);
  EXPECT_NEAR(eap_cardinality(p), m.survival_prob * eap_cardinality(d) + 3 * b.r_birth, 1e-12);
  EXPECT_NE(p.find({4, 2, 2}), nullptr);
}

TEST(Update, EmptyScanMatchesSingleTrackBayes) {
  Rng rng(11);
  DetectionProfile prof;
  // Straddles the range limit, so the particles see different p_D values.
  LmbDensity d({gaussian_track(label(0), 0.6, 560, 0, 30, 300, rng)});
  const SensorPose pose{0, 0, 0};
  const double pbar = mean_pd(d.tracks()[0], pose, prof);
  ASSERT_GT(pbar, 0.1);
  ASSERT_LT(pbar, 0.9);
  const LmbDensity u = update(d, {}, pose, {prof, 5.0}, 1e-5, rng);
  EXPECT_NEAR(u.tracks()[0].r, 0.6 * (1 - pbar) / (1 - 0.6 * pbar), 1e-12);
  EXPECT_TRUE(u.tracks()[0].particles.isApprox(d.tracks()[0].particles));
  EXPECT_NEAR(u.tracks()[0].weights.sum(), 1.0, 1e-9);
}

TEST(Update, TrackOutsideFovUnchanged) {
  Rng rng(2);
  LmbDensity d({gaussian_track(label(0), 0.7, -300, 0, 10, 100, rng)});
  const MeasurementSet Z{Measurement(100, 0), Measurement(250, 30)};
  const LmbDensity u = update(d, Z, {0, 0, 0}, sensor_model(), 1e-5, rng);
  EXPECT_DOUBLE_EQ(u.tracks()[0].r, 0.7);
  EXPECT_TRUE(u.tracks()[0].weights.isApprox(d.tracks()[0].weights));
}

TEST(Update, EmptyScanBlindSensorIsIdentity) {
  Rng rng(2);
  LmbDensity d({gaussian_track(label(0), 0.7, -300, 0, 10, 100, rng), gaussian_track(label(1), 0.2, 0, -400, 10, 100, rng)});
  const LmbDensity u = update(d, {}, {0, 0, 0}, sensor_model(), 1e-5, rng);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(u.tracks()[i].r, d.tracks()[i].r);
    EXPECT_EQ(u.tracks()[i].weights, d.tracks()[i].weights);
  }
}

TEST(Update, SingleMeasurementTwoHypothesisOracle) {
  Rng rng(9);
  const SensorModel sm = sensor_model();
  const SensorPose pose{0, 0, 0};
  LmbDensity d({gaussian_track(label(0), 0.4, 210, 0, 8, 400, rng)});
  const Measurement z(200, 0);
  const double kappa = 1e-5;
  const LabeledTrack& t = d.tracks()[0];
  double D = 0.0, miss = 0.0;
  Eigen::VectorXd w_det(t.size());
  for (Eigen::Index j = 0; j < t.size(); ++j) {
    const Position x = t.particles.col(j).head<2>();
    const double pd = detection_probability(sm.profile, pose, x);
    w_det[j] = t.weights[j] * pd * measurement_likelihood(pose, x, z, sm.noise_sigma);
    D += w_det[j];
    miss += t.weights[j] * (1 - pd);
  }
  const double r = 0.4;
  const double want = (r * D + r * miss * kappa) / (r * D + r * miss * kappa + (1 - r) * kappa);
  const LmbDensity u = update(d, {z}, pose, sm, kappa, rng);
  EXPECT_NEAR(u.tracks()[0].r, want, 1e-12);
  EXPECT_GT(u.tracks()[0].r, 0.4);
  const double before = (position_of(eap_state(t)) - Position(200, 0)).norm();
  const double after = (position_of(eap_state(u.tracks()[0])) - Position(200, 0)).norm();
  EXPECT_LT(after, before);
}

TEST(Update, PostConditionsOnClutteredScan) {
  Rng rng(4);
  std::vector<LabeledTrack> tr;
  for (int i = 0; i < 8; ++i) tr.push_back(gaussian_track(label(i), 0.3 + 0.08 * i, 100 + 8 * i, -20 + 4 * i, 6, 200, rng));
  LmbDensity d(tr);
  MeasurementSet Z;
  for (int i = 0; i < 9; ++i) Z.emplace_back(102 + 8 * i, -19 + 4 * i);
  const auto res = update_with_births(d, Z, {0, 0, 0}, sensor_model(), 1e-5, rng);
  EXPECT_TRUE(res.used_gibbs);
  for (const auto& t : res.posterior.tracks()) {
    EXPECT_GE(t.r, 0.0);
    EXPECT_LE(t.r, 1.0);
    EXPECT_NEAR(t.weights.sum(), 1.0, 1e-9);
  }
  EXPECT_EQ(res.measurement_association.size(), 9);
}

TEST(Update, BirthCandidatesAreUnexplainedMeasurements) {
  Rng rng(4);
  LmbDensity d({gaussian_track(label(0), 0.9, 200, 0, 5, 200, rng)});
  const MeasurementSet Z{Measurement(200, 0), Measurement(400, 100)};
  UpdateOptions opts;
  const auto res = update_with_births(d, Z, {0, 0, 0}, sensor_model(), 1e-5, rng, opts);
  ASSERT_EQ(res.birth_candidates.size(), 1u);
  EXPECT_EQ(res.birth_candidates[0], 1);
  EXPECT_GT(res.measurement_association[0], 0.95);
}

TEST(Update, LabelEquivariance) {
  Rng rng(21);
  const LabeledTrack a = gaussian_track(label(0, 1, 0), 0.5, 200, 0, 6, 150, rng);
  const LabeledTrack b = gaussian_track(label(0, 1, 1), 0.8, 230, 10, 6, 150, rng);
  const LabeledTrack c = gaussian_track(label(0, 1, 2), 0.3, 260, -10, 6, 150, rng);
  auto relabel = [](LabeledTrack t, TrackLabel l) {
    t.label = l;
    return t;
  };
  // Reverse the label order.
  LmbDensity d1({a, b, c});
  LmbDensity d2({relabel(a, label(5, 3, 2)), relabel(b, label(5, 3, 1)), relabel(c, label(5, 3, 0))});
  const MeasurementSet Z{Measurement(205, 2), Measurement(228, 9)};
  const LmbDensity u1 = update(d1, Z, {0, 0, 0}, sensor_model(), 1e-5, rng);
  const LmbDensity u2 = update(d2, Z, {0, 0, 0}, sensor_model(), 1e-5, rng);
  EXPECT_NEAR(u1.find(a.label)->r, u2.find(label(5, 3, 2))->r, 1e-12);
  EXPECT_NEAR(u1.find(b.label)->r, u2.find(label(5, 3, 1))->r, 1e-12);
  EXPECT_NEAR(u1.find(c.label)->r, u2.find(label(5, 3, 0))->r, 1e-12);
}

TEST(EapCardinality, Sums) {
  EXPECT_EQ(eap_cardinality(LmbDensity{}), 0.0);
  LmbDensity d({point_track(label(0), 0.9, state(0, 0)), point_track(label(1), 0.4, state(0, 0))});
  EXPECT_DOUBLE_EQ(eap_cardinality(d), 1.3);
  EXPECT_DOUBLE_EQ(eap_cardinality(LmbDensity({point_track(label(0), 1.0, state(0, 0))})), 1.0);
}

TEST(EapState, WeightedMean) {
  EXPECT_TRUE(eap_state(point_track(label(0), 1.0, state(3, 4, 1, 2))).isApprox(state(3, 4, 1, 2)));
  LabeledTrack t;
  t.particles.resize(kStateDim, 2);
  t.particles.col(0) = state(0, 0);
  t.particles.col(1) = state(10, 0);
  t.weights = Eigen::Vector2d(0.5, 0.5);
  EXPECT_DOUBLE_EQ(eap_state(t)[0], 5.0);
  t.weights = Eigen::Vector2d(1.0, 0.0);
  EXPECT_EQ(eap_state(t), state(0, 0));
}

TEST(ExtractEstimates, ThresholdAndCap) {
  LmbDensity low({point_track(label(0), 0.5, state(0, 0))});
  EXPECT_TRUE(extract_estimates(low, 0.9).empty());

  LmbDensity d({point_track(label(0), 0.95, state(0, 0)), point_track(label(1), 0.92, state(1, 0)),
                point_track(label(2), 0.3, state(2, 0))});
  const auto e = extract_estimates(d, 0.9);
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0].label, label(0));
  EXPECT_EQ(e[1].label, label(1));

  LmbDensity one({point_track(label(0), 1.0, state(0, 0))});
  EXPECT_EQ(extract_estimates(one, 1.0).size(), 1u);
}

TEST(ExtractEstimates, CardinalityCapRoundsHalfUp) {
  // Three tracks at 0.9 but EAP cardinality 2.7 + 0 rounds to 3; two at 0.9 with
  // nothing else gives 1.8 -> 2.
  LmbDensity d({point_track(label(0), 0.9, state(0, 0)), point_track(label(1), 0.9, state(0, 0))});
  EXPECT_EQ(extract_estimates(d, 0.5).size(), 2u);
  LmbDensity e({point_track(label(0), 0.95, state(0, 0)), point_track(label(1), 0.55, state(0, 0))});
  EXPECT_EQ(extract_estimates(e, 0.5).size(), 2u);  // 1.5 -> 2
  LmbDensity f({point_track(label(0), 0.9, state(0, 0)), point_track(label(1), 0.55, state(0, 0))});
  EXPECT_EQ(extract_estimates(f, 0.5).size(), 1u);  // 1.45 -> 1
}

TEST(PruneResample, RemovesWeakTracksAndFlattensWeights) {
  Rng rng(1);
  LabeledTrack t = gaussian_track(label(0), 0.8, 0, 0, 10, 300, rng);
  for (Eigen::Index j = 0; j < t.size(); ++j) t.weights[j] = 1.0 + (j % 7);
  t.weights /= t.weights.sum();
  LmbDensity d({t, point_track(label(1), 1e-6, state(0, 0))});
  const LmbDensity p = prune_resample(d, 1e-3, 500, rng);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p.tracks()[0].size(), 500);
  EXPECT_TRUE((p.tracks()[0].weights.array() == 1.0 / 500).all());
}

TEST(PruneResample, PreservesEapWithinMonteCarloError) {
  Rng rng(77);
  LabeledTrack t = gaussian_track(label(0), 0.8, 0, 0, 10, 1000, rng);
  for (Eigen::Index j = 0; j < t.size(); ++j) t.weights[j] = std::exp(-0.01 * t.particles(0, j));
  t.weights /= t.weights.sum();
  const LmbDensity d({t});
  const double mean = eap_state(t)[0];
  double var = 0.0;
  for (Eigen::Index j = 0; j < t.size(); ++j) var += t.weights[j] * std::pow(t.particles(0, j) - mean, 2);
  const int N = 500;
  const double tol = 3.0 * std::sqrt(var) / std::sqrt(N);
  for (int trial = 0; trial < 100; ++trial) {
    const LmbDensity p = prune_resample(d, 1e-3, N, rng);
    EXPECT_LT(std::abs(eap_state(p.tracks()[0])[0] - mean), tol);
  }
}

TEST(Transition, ConstantTurnWithZeroRateIsConstantVelocity) {
  const State x = state(1, 2, 3, -4, 0.0);
  EXPECT_EQ(transition(x, MotionKind::ConstantTurn, 1.0), transition(x, MotionKind::ConstantVelocity, 1.0));
}

TEST(Transition, ConstantTurnPreservesSpeed) {
  const State x = state(0, 0, 10, 0, 0.1);
  const State y = transition(x, MotionKind::ConstantTurn, 1.0);
  EXPECT_NEAR(std::hypot(y[2], y[3]), 10.0, 1e-12);
  EXPECT_NEAR(std::atan2(y[3], y[2]), 0.1, 1e-12);
}
