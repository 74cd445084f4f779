#pragma once

// Sensor kinematics, field-of-view detection profile and the sensor-frame
// Cartesian measurement model.

#include "dfsc/types.hpp"

#include <vector>

namespace dfsc {

struct SensorPose {
  double px = 0.0;
  double py = 0.0;
  double theta = 0.0;  // boresight orientation, (-pi, pi]

  Position position() const { return {px, py}; }
  friend bool operator==(const SensorPose&, const SensorPose&) = default;
};

struct ControlCommand {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;
  int id = 0;

  friend bool operator==(const ControlCommand&, const ControlCommand&) = default;
};

using ActionCatalogue = std::vector<ControlCommand>;

struct DetectionProfile {
  double pd_max = 0.98;
  double rho_min = 0.0;
  double rho_max = 600.0;
  double lambda_taper = 65.0;
  double theta_max = deg2rad(45.0);

  bool valid() const;
  /// Area of the annular FoV sector, used for uniform clutter.
  double fov_area() const;
};

using Measurement = Vec2<double>;
using MeasurementSet = std::vector<Measurement>;

SensorPose apply_command(const SensorPose& pose, const ControlCommand& cmd);

/// Range and signed bearing of a point relative to the sensor boresight.
template <typename Scalar>
Vec2<Scalar> range_bearing(const SensorPose& pose, const Vec2<Scalar>& target) {
  const Scalar dx = target.x() - Scalar(pose.px);
  const Scalar dy = target.y() - Scalar(pose.py);
  return {std::hypot(dx, dy), wrap_angle<Scalar>(std::atan2(dy, dx) - Scalar(pose.theta))};
}

/// tanh-tapered detection probability inside the FoV, 0 outside.
template <typename Scalar>
Scalar detection_probability(const DetectionProfile& profile, const SensorPose& pose,
                             const Vec2<Scalar>& target) {
  const Vec2<Scalar> rb = range_bearing(pose, target);
  const Scalar rho = rb[0];
  if (std::abs(rb[1]) > Scalar(profile.theta_max) || rho > Scalar(profile.rho_max)) {
    return Scalar(0);
  }
  const Scalar lambda = Scalar(profile.lambda_taper);
  return Scalar(profile.pd_max) * std::tanh((Scalar(profile.rho_max) - rho) / lambda) /
         std::tanh((Scalar(profile.rho_max) - Scalar(profile.rho_min)) / lambda);
}

/// Target displacement expressed in the sensor frame (x axis along the boresight).
template <typename Scalar>
Vec2<Scalar> to_sensor_frame(const SensorPose& pose, const Vec2<Scalar>& target) {
  const Scalar c = std::cos(Scalar(pose.theta));
  const Scalar s = std::sin(Scalar(pose.theta));
  const Scalar dx = target.x() - Scalar(pose.px);
  const Scalar dy = target.y() - Scalar(pose.py);
  return {c * dx + s * dy, -s * dx + c * dy};
}

template <typename Scalar>
Vec2<Scalar> from_sensor_frame(const SensorPose& pose, const Vec2<Scalar>& z) {
  const Scalar c = std::cos(Scalar(pose.theta));
  const Scalar s = std::sin(Scalar(pose.theta));
  return {Scalar(pose.px) + c * z.x() - s * z.y(), Scalar(pose.py) + s * z.x() + c * z.y()};
}

/// Isotropic bivariate Gaussian density of z around the predicted displacement.
template <typename Scalar>
Scalar measurement_likelihood(const SensorPose& pose, const Vec2<Scalar>& target,
                              const Vec2<Scalar>& z, Scalar noise_sigma) {
  const Scalar var = noise_sigma * noise_sigma;
  const Scalar d2 = (z - to_sensor_frame(pose, target)).squaredNorm();
  return std::exp(-d2 / (Scalar(2) * var)) / (Scalar(2) * std::numbers::pi_v<Scalar> * var);
}

struct Detection {
  Measurement z;
  int source = -1;  // index into the target list, -1 for clutter
};

/// Simulates one scan: per-target Bernoulli detection plus Poisson clutter over
/// the FoV sector. Returned order is shuffled.
std::vector<Detection> generate_detections(const SensorPose& pose, const DetectionProfile& profile,
                                           const std::vector<Position>& targets,
                                           double noise_sigma, double clutter_rate, Rng& rng);

MeasurementSet measurements_of(const std::vector<Detection>& detections);

}  // namespace dfsc
