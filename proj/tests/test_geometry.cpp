#include "dfsc/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace dfsc;

namespace {

DetectionProfile standard_profile() {
  DetectionProfile p;
  p.pd_max = 0.98;
  p.rho_min = 0.0;
  p.rho_max = 600.0;
  p.lambda_taper = 65.0;
  p.theta_max = deg2rad(45.0);
  return p;
}

}  // namespace

TEST(ApplyCommand, IdentityCommand) {
  const SensorPose p = apply_command({0, 0, 0}, {0, 0, 0});
  EXPECT_EQ(p, (SensorPose{0, 0, 0}));
}

TEST(ApplyCommand, Rotation) {
  const SensorPose p = apply_command({100, 50, 0}, {0, 0, deg2rad(22.5)});
  EXPECT_DOUBLE_EQ(p.px, 100.0);
  EXPECT_DOUBLE_EQ(p.py, 50.0);
  EXPECT_NEAR(p.theta, 0.392699, 1e-6);
}

TEST(ApplyCommand, WrapsPastPi) {
  const SensorPose p = apply_command({0, 0, 3.1}, {10, 0, 0.1});
  EXPECT_DOUBLE_EQ(p.px, 10.0);
  EXPECT_NEAR(p.theta, 3.2 - 2 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(p.theta, -3.08319, 1e-5);
}

TEST(DetectionProbability, ZeroAtMaxRange) {
  const auto prof = standard_profile();
  EXPECT_DOUBLE_EQ(detection_probability(prof, {0, 0, 0}, Position(600, 0)), 0.0);
  EXPECT_DOUBLE_EQ(detection_probability(prof, {0, 0, 0}, Position(600.5, 0)), 0.0);
}

TEST(DetectionProbability, PeakAtMinRange) {
  const auto prof = standard_profile();
  EXPECT_DOUBLE_EQ(detection_probability(prof, {0, 0, 0}, Position(0, 0)), 0.98);
}

TEST(DetectionProbability, MidRange) {
  const auto prof = standard_profile();
  const double want = 0.98 * std::tanh(300.0 / 65.0) / std::tanh(600.0 / 65.0);
  EXPECT_NEAR(detection_probability(prof, {0, 0, 0}, Position(300, 0)), want, 1e-15);
  EXPECT_NEAR(want, 0.97980, 1e-5);  // hand value printed to five places, truncated
}

TEST(DetectionProbability, OutsideAngularFov) {
  const auto prof = standard_profile();
  const double b = prof.theta_max + 0.01;
  for (double rho : {10.0, 300.0, 590.0}) {
    const Position t(rho * std::cos(b), rho * std::sin(b));
    EXPECT_EQ(detection_probability(prof, {0, 0, 0}, t), 0.0);
  }
}

TEST(DetectionProbability, BearingIsRelativeToBoresight) {
  const auto prof = standard_profile();
  const SensorPose north{0, 0, std::numbers::pi / 2};
  EXPECT_GT(detection_probability(prof, north, Position(0, 200)), 0.9);
  EXPECT_EQ(detection_probability(prof, north, Position(200, 0)), 0.0);
}

TEST(SensorFrame, IdentityPose) {
  const Measurement z = to_sensor_frame({0, 0, 0}, Position(10, 5));
  EXPECT_DOUBLE_EQ(z.x(), 10.0);
  EXPECT_DOUBLE_EQ(z.y(), 5.0);
}

TEST(SensorFrame, QuarterTurn) {
  const Measurement z = to_sensor_frame({0, 0, std::numbers::pi / 2}, Position(0, 10));
  EXPECT_NEAR(z.x(), 10.0, 1e-12);
  EXPECT_NEAR(z.y(), 0.0, 1e-12);
}

TEST(SensorFrame, RoundTrip) {
  Rng rng(7);
  std::uniform_real_distribution<double> u(-1000, 1000), a(-3.1, 3.1);
  for (int i = 0; i < 200; ++i) {
    const SensorPose pose{u(rng), u(rng), a(rng)};
    const Position x(u(rng), u(rng));
    const Position back = from_sensor_frame(pose, to_sensor_frame(pose, x));
    EXPECT_NEAR((back - x).norm(), 0.0, 1e-9);
  }
}

TEST(MeasurementLikelihood, PeakValue) {
  const SensorPose pose{20, -5, 0.3};
  const Position x(200, 100);
  const double v = measurement_likelihood(pose, x, to_sensor_frame(pose, x), 5.0);
  EXPECT_NEAR(v, 1.0 / (2 * std::numbers::pi * 25.0), 1e-15);
  EXPECT_NEAR(v, 6.3662e-3, 1e-7);
}

TEST(MeasurementLikelihood, FarTailAndSymmetry) {
  const SensorPose pose{0, 0, 0};
  const Position x(100, 0);
  const Measurement z0 = to_sensor_frame(pose, x);
  EXPECT_LT(measurement_likelihood(pose, x, Measurement(z0 + Measurement(50, 0)), 5.0), 1e-20);
  const Measurement d(3.0, -4.0);
  EXPECT_DOUBLE_EQ(measurement_likelihood(pose, x, Measurement(z0 + d), 5.0),
                   measurement_likelihood(pose, x, Measurement(z0 - d), 5.0));
}

TEST(GenerateDetections, EmptyWithoutTargetsOrClutter) {
  Rng rng(1);
  EXPECT_TRUE(generate_detections({0, 0, 0}, standard_profile(), {}, 5.0, 0.0, rng).empty());
}

TEST(GenerateDetections, TargetOutsideFovIsNeverDetected) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    EXPECT_TRUE(generate_detections({0, 0, 0}, standard_profile(), {Position(-200, 0)}, 5.0, 0.0, rng).empty());
  }
}

TEST(GenerateDetections, EmpiricalDetectionRate) {
  const auto prof = standard_profile();
  const Position target(300, 0);
  const double pd = detection_probability(prof, {0, 0, 0}, target);
  Rng rng(2024);
  int hits = 0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    hits += static_cast<int>(generate_detections({0, 0, 0}, prof, {target}, 5.0, 0.0, rng).size());
  }
  EXPECT_NEAR(static_cast<double>(hits) / trials, pd, 0.005);
}

TEST(GenerateDetections, ClutterStaysInsideFov) {
  const auto prof = standard_profile();
  Rng rng(5);
  const SensorPose pose{0, 0, 0};
  long total = 0;
  const int scans = 2000;
  for (int i = 0; i < scans; ++i) {
    for (const auto& d : generate_detections(pose, prof, {}, 5.0, 5.0, rng)) {
      EXPECT_EQ(d.source, -1);
      const Position world = from_sensor_frame(pose, d.z);
      EXPECT_GT(detection_probability(prof, pose, world) + (world.norm() >= 599.0 ? 1.0 : 0.0), 0.0);
      ++total;
    }
  }
  EXPECT_NEAR(static_cast<double>(total) / scans, 5.0, 0.15);
}

TEST(DetectionProfile, FovArea) {
  const auto prof = standard_profile();
  EXPECT_NEAR(prof.fov_area(), 0.5 * (2 * prof.theta_max) * 600.0 * 600.0, 1e-6);
  EXPECT_TRUE(prof.valid());
  DetectionProfile bad = prof;
  bad.rho_min = 700;
  EXPECT_FALSE(bad.valid());
}
